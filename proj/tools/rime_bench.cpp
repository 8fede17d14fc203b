// Benchmark CLI: instance generation, stream replay through RIME or a
// baseline, seed-set evaluation and the gamma trace.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rime/bench.hpp"
#include "rime/errors.hpp"
#include "rime/io.hpp"
#include "rime/oracles.hpp"

namespace {

struct ModelFlags {
  std::string config_path;
  std::size_t k = 10;
  std::size_t l = 20;
  std::size_t T = 10;
  double B = 1.0;
  double eps1 = 0.2;
  double R_override = 32.0;
  bool theory_R = false;
  std::string model = "logistic";
  std::string mode = "incremental";
  std::string center;
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
  app->add_option("--config", f.config_path, "key = value file applied before flags");
  app->add_option("--k", f.k, "seed budget")->capture_default_str();
  app->add_option("--l", f.l, "number of sampled hyperparameters")->capture_default_str();
  app->add_option("--T", f.T, "MWU iterations")->capture_default_str();
  app->add_option("--B", f.B, "hyperparameter cube radius")->capture_default_str();
  app->add_option("--eps1", f.eps1, "threshold granularity")->capture_default_str();
  app->add_option("--R-override", f.R_override, "practical R")->capture_default_str();
  app->add_flag("--theory-R", f.theory_R, "use the theoretical R instead of --R-override");
  app->add_option("--model", f.model, "linear, logistic or probit")->capture_default_str();
  app->add_option("--mode", f.mode, "incremental or fully_dynamic")->capture_default_str();
  app->add_option("--center", f.center, "comma separated cube center of length d");
}

rime::RimeConfig build_config(const CLI::App* app, const ModelFlags& f, std::uint64_t seed,
                              std::size_t d) {
  rime::RimeConfig cfg;
  cfg.d = d;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw rime::ConfigError("cannot open config " + f.config_path);
    rime::read_config(in, cfg);
  }
  auto given = [&](const char* name) { return app->count(name) > 0; };
  if (given("--k") || f.config_path.empty()) cfg.k = f.k;
  if (given("--l") || f.config_path.empty()) cfg.l = f.l;
  if (given("--T") || f.config_path.empty()) cfg.T = f.T;
  if (given("--B") || f.config_path.empty()) cfg.B = f.B;
  if (given("--eps1") || f.config_path.empty()) cfg.eps1 = f.eps1;
  if (given("--model") || f.config_path.empty()) cfg.model = rime::parse_model_kind(f.model);
  if (given("--mode") || f.config_path.empty()) cfg.mode = rime::parse_engine_mode(f.mode);
  if (given("--R-override")) cfg.R_override = f.R_override;
  if (f.theory_R) cfg.R_override.reset();
  if (!f.center.empty()) rime::set_config_field(cfg, "center", f.center);
  cfg.seed = seed;
  if (cfg.d != d) throw rime::ConfigError("config d does not match the graph dimension");
  cfg.validate();
  return cfg;
}

std::vector<rime::NodeId> parse_seed_list(const std::string& text) {
  std::vector<rime::NodeId> out;
  std::string s = text;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream ss(s);
  for (long long v; ss >> v;) {
    if (v < 0) throw rime::ParseError("negative node id in seed list");
    out.push_back(static_cast<rime::NodeId>(v));
  }
  if (!ss.eof()) throw rime::ParseError("bad seed list '" + text + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rime_bench: dynamic robust influence maximization benchmarks"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "governs all randomness")->capture_default_str();

  auto* gen_graph = app.add_subcommand("gen-graph", "synthetic graph with random features");
  std::size_t n0 = 100, m0 = 0, feat_dim = 3;
  std::string graph_out;
  gen_graph->add_option("--n0", n0, "node count")->capture_default_str();
  gen_graph->add_option("--m0", m0, "edge count (default 2 n0)");
  gen_graph->add_option("--feat-dim", feat_dim, "features per node")->capture_default_str();
  gen_graph->add_option("--out", graph_out, "graph file")->required();

  auto* gen_updates = app.add_subcommand("gen-updates", "random update stream for a graph");
  std::string graph_in, stream_out, setting = "incremental";
  std::optional<std::size_t> count;
  gen_updates->add_option("--graph", graph_in, "graph file")->required();
  gen_updates->add_option("--count", count, "number of updates (default 2 m0)");
  gen_updates->add_option("--setting", setting, "incremental or fully_dynamic")->capture_default_str();
  gen_updates->add_option("--out", stream_out, "update stream file")->required();

  auto* run = app.add_subcommand("run", "replay a stream through RIME or a baseline");
  ModelFlags run_flags;
  std::string run_graph, run_updates, algo = "rime", trace_out, summary_out;
  std::size_t eval_runs = 10000, stride = 50, root_count = 0;
  bool no_eval = false;
  run->add_option("--graph", run_graph, "graph file")->required();
  run->add_option("--updates", run_updates, "update stream file (optional)");
  run->add_option("--algo", algo, "rime, base, hiro or lugreedy")->capture_default_str();
  run->add_option("--eval-runs", eval_runs, "Monte-Carlo cascades per theta")->capture_default_str();
  run->add_option("--stride", stride, "evaluate min spread every this many steps")->capture_default_str();
  run->add_option("--root-count", root_count, "HIRO roots per theta (default n / 10)");
  run->add_flag("--no-eval", no_eval, "skip min spread evaluation");
  run->add_option("--trace", trace_out, "trace CSV (default stdout)");
  run->add_option("--summary", summary_out, "summary JSON (default stderr)");
  add_model_flags(run, run_flags);

  auto* eval = app.add_subcommand("eval", "min spread of a seed set over sampled thetas");
  ModelFlags eval_flags;
  std::string eval_graph, seeds_text;
  std::size_t eval_eval_runs = 10000;
  eval->add_option("--graph", eval_graph, "graph file")->required();
  eval->add_option("--seeds", seeds_text, "comma separated node ids")->required();
  eval->add_option("--eval-runs", eval_eval_runs, "Monte-Carlo cascades per theta")->capture_default_str();
  add_model_flags(eval, eval_flags);

  auto* gamma = app.add_subcommand("gamma", "per-event gamma trace of a RIME run");
  ModelFlags gamma_flags;
  std::string gamma_graph, gamma_updates, gamma_out;
  gamma->add_option("--graph", gamma_graph, "graph file")->required();
  gamma->add_option("--updates", gamma_updates, "update stream file")->required();
  gamma->add_option("--out", gamma_out, "gamma CSV (default stdout)");
  add_model_flags(gamma, gamma_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_graph) {
      rime::Rng rng(seed);
      const auto g = rime::gen_synthetic(n0, gen_graph->count("--m0") ? m0 : 2 * n0, feat_dim, rng);
      rime::save_graph_file(graph_out, g);
    } else if (*gen_updates) {
      const auto g = rime::load_graph_file(graph_in);
      rime::Rng rng(seed);
      auto spec = rime::StreamSpec::defaults(rime::parse_stream_setting(setting),
                                             count.value_or(2 * g.num_edges()));
      rime::save_stream_file(stream_out, rime::gen_stream(g, spec, rng));
    } else if (*run) {
      const auto g = rime::load_graph_file(run_graph);
      std::vector<rime::Update> stream;
      if (!run_updates.empty()) stream = rime::load_stream_file(run_updates, g.feature_dim());
      rime::ExperimentConfig cfg;
      cfg.algo = algo;
      cfg.rime = build_config(run, run_flags, seed, g.edge_dim());
      cfg.root_count = root_count;
      cfg.eval_runs = eval_runs;
      cfg.stride = stride;
      cfg.evaluate = !no_eval;
      if (algo != "rime") rime::parse_baseline_kind(algo);
      const auto res = rime::run_experiment(g, stream, cfg);
      if (trace_out.empty()) {
        rime::write_trace_csv(std::cout, res.trace);
      } else {
        std::ofstream out(trace_out);
        rime::write_trace_csv(out, res.trace);
      }
      const auto summary = rime::summary_json(res, cfg);
      if (summary_out.empty()) {
        std::cerr << summary << '\n';
      } else {
        std::ofstream(summary_out) << summary << '\n';
      }
    } else if (*eval) {
      const auto g = rime::load_graph_file(eval_graph);
      const auto cfg = build_config(eval, eval_flags, seed, g.edge_dim());
      const auto S = parse_seed_list(seeds_text);
      for (auto v : S) {
        if (!g.has_node(v)) throw rime::PreconditionError("seed " + std::to_string(v) + " not in graph");
      }
      rime::Rng rng(rime::Rng::derive(seed, 0x6576616cull));
      const auto thetas = rime::config_thetas(cfg);
      nlohmann::json j;
      std::vector<double> per_theta;
      for (const auto& th : thetas) {
        per_theta.push_back(rime::monte_carlo_spread(g, th, cfg.model, S, eval_eval_runs, rng).mean);
      }
      j["seeds"] = S;
      j["per_theta"] = per_theta;
      j["min_spread"] = per_theta.empty() ? 0.0 : *std::min_element(per_theta.begin(), per_theta.end());
      std::cout << j.dump(2) << '\n';
    } else if (*gamma) {
      const auto g = rime::load_graph_file(gamma_graph);
      const auto stream = rime::load_stream_file(gamma_updates, g.feature_dim());
      rime::ExperimentConfig cfg;
      cfg.rime = build_config(gamma, gamma_flags, seed, g.edge_dim());
      cfg.rime.track_gamma = true;
      cfg.evaluate = false;
      const auto res = rime::run_experiment(g, stream, cfg);
      if (gamma_out.empty()) {
        rime::write_gamma_csv(std::cout, res.gamma);
      } else {
        std::ofstream out(gamma_out);
        rime::write_gamma_csv(out, res.gamma);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
