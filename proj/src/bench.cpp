#include "rime/bench.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include "json.hpp"
#include "rime/errors.hpp"
#include "rime/io.hpp"
#include "rime/oracles.hpp"

namespace rime {

namespace {

constexpr std::uint64_t kEvalStream = 0x6576616cull;
constexpr std::uint64_t kBaselineStream = 0x62617365ull;

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point t0) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

FeatureVector random_features(std::size_t dim, Rng& rng) {
  FeatureVector f(dim);
  for (auto& x : f) x = rng.uniform(-1.0, 1.0);
  return f;
}

// Uniform absent ordered pair; assumes one exists.
Edge absent_pair(const DynGraph& g, Rng& rng) {
  const auto nodes = g.node_list();
  const std::size_t n = nodes.size();
  const std::size_t free = n * (n - 1) - g.num_edges();
  if (free * 4 >= n * (n - 1)) {
    while (true) {
      const NodeId u = nodes[rng.below(n)];
      const NodeId v = nodes[rng.below(n)];
      if (u != v && !g.has_edge(u, v)) return {u, v};
    }
  }
  auto pick = rng.below(free);
  for (NodeId u : g.sorted_nodes()) {
    for (NodeId v : g.sorted_nodes()) {
      if (u == v || g.has_edge(u, v)) continue;
      if (pick-- == 0) return {u, v};
    }
  }
  throw ContractError("absent_pair: no free pair");
}

}  // namespace

DynGraph gen_synthetic(std::size_t n0, std::size_t m0, std::size_t feat_dim, Rng& rng) {
  if (feat_dim == 0) throw ConfigError("gen_synthetic: feature dimension must be positive");
  const std::size_t pairs = n0 < 2 ? 0 : n0 * (n0 - 1);
  if (m0 > pairs) throw SizeError("gen_synthetic: more edges than ordered pairs");
  DynGraph g(feat_dim);
  for (NodeId v = 0; v < n0; ++v) g.add_node(v, random_features(feat_dim, rng));
  if (2 * m0 > pairs) {
    // Dense: partial Fisher-Yates over all pairs.
    std::vector<Edge> all;
    all.reserve(pairs);
    for (NodeId u = 0; u < n0; ++u) {
      for (NodeId v = 0; v < n0; ++v) {
        if (u != v) all.push_back({u, v});
      }
    }
    for (std::size_t j = 0; j < m0; ++j) {
      std::swap(all[j], all[j + rng.below(all.size() - j)]);
      g.add_edge(all[j].src, all[j].dst);
    }
    return g;
  }
  while (g.num_edges() < m0) {
    const auto u = static_cast<NodeId>(rng.below(n0));
    const auto v = static_cast<NodeId>(rng.below(n0));
    if (u != v && !g.has_edge(u, v)) g.add_edge(u, v);
  }
  return g;
}

std::string to_string(StreamSetting s) {
  return s == StreamSetting::kIncremental ? "incremental" : "fully_dynamic";
}

StreamSetting parse_stream_setting(const std::string& name) {
  if (name == "incremental") return StreamSetting::kIncremental;
  if (name == "fully_dynamic" || name == "fully-dynamic") return StreamSetting::kFullyDynamic;
  throw ConfigError("unknown stream setting '" + name + "'");
}

StreamSpec StreamSpec::defaults(StreamSetting setting, std::size_t count) {
  StreamSpec s;
  s.count = count;
  s.setting = setting;
  if (setting == StreamSetting::kIncremental) {
    s.mix = {0.5, 0.5, 0.0, 0.0};
  } else {
    s.mix = {0.25, 0.25, 0.25, 0.25};
  }
  return s;
}

void StreamSpec::validate() const {
  double total = 0.0;
  for (double w : mix) {
    if (!(w >= 0)) throw ConfigError("stream mix weights must be non-negative");
    total += w;
  }
  if (!(total > 0)) throw ConfigError("stream mix has no positive weight");
  if (setting == StreamSetting::kIncremental && (mix[2] > 0 || mix[3] > 0)) {
    throw ConfigError("incremental stream cannot contain removals");
  }
}

std::vector<Update> gen_stream(const DynGraph& g0, const StreamSpec& spec, Rng& rng) {
  spec.validate();
  DynGraph g = g0;
  std::vector<Update> out;
  out.reserve(spec.count);
  NodeId next_id = static_cast<NodeId>(g.id_capacity());
  for (std::size_t step = 0; step < spec.count; ++step) {
    const std::size_t n = g.num_nodes();
    std::array<double, 4> w = spec.mix;
    if (n < 2 || g.num_edges() >= n * (n - 1)) w[1] = 0;
    if (n == 0) w[2] = 0;
    if (g.num_edges() == 0) w[3] = 0;
    const double total = w[0] + w[1] + w[2] + w[3];
    if (!(total > 0)) throw PreconditionError("gen_stream: no update kind is possible");
    double r = rng.uniform() * total;
    std::size_t kind = 4;
    for (std::size_t j = 0; j < 4; ++j) {
      if (w[j] == 0) continue;
      kind = j;
      if (r < w[j]) break;
      r -= w[j];
    }

    Update u;
    if (kind == 0) {
      u = InsertNode{next_id++, random_features(g.feature_dim(), rng)};
    } else if (kind == 1) {
      const Edge e = absent_pair(g, rng);
      u = InsertEdge{e.src, e.dst};
    } else if (kind == 2) {
      u = RemoveNode{g.node_list()[rng.below(n)]};
    } else {
      const auto edges = g.edges();
      const Edge e = edges[rng.below(edges.size())];
      u = RemoveEdge{e.src, e.dst};
    }
    apply_update(g, u);
    out.push_back(std::move(u));
  }
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << "step,cum_ns,min_spread,restarts\n";
  for (const auto& r : rows) {
    os << r.step << ',' << r.cum_ns << ',';
    if (r.min_spread) os << format_double(*r.min_spread);
    os << ',' << r.restarts << '\n';
  }
}

void write_gamma_csv(std::ostream& os, const std::vector<GammaEvent>& events) {
  os << "event,gamma_incremental,gamma_fully_dynamic\n";
  for (const auto& e : events) {
    os << e.event << ',' << format_double(e.incremental) << ',' << format_double(e.fully_dynamic)
       << '\n';
  }
}

BaselineConfig baseline_config(const ExperimentConfig& cfg) {
  BaselineConfig b;
  b.k = cfg.rime.k;
  b.T = cfg.rime.T;
  b.root_count = cfg.root_count;
  b.eval_runs = cfg.eval_runs;
  b.model = cfg.rime.model;
  b.space = cfg.rime.space();
  return b;
}

ExperimentResult run_experiment(const DynGraph& g0, const std::vector<Update>& stream,
                                const ExperimentConfig& cfg) {
  cfg.rime.validate();
  ExperimentResult res;
  res.thetas = config_thetas(cfg.rime);
  Rng eval_rng(Rng::derive(cfg.rime.seed, kEvalStream));
  auto evaluate_at = [&](std::size_t step, const DynGraph& g, const std::vector<NodeId>& S)
      -> std::optional<double> {
    const bool last = step == stream.size();
    const bool sampled = cfg.stride > 0 && step % cfg.stride == 0;
    if (!cfg.evaluate || !(last || sampled)) return std::nullopt;
    return min_spread(g, res.thetas, cfg.rime.model, S, cfg.eval_runs, eval_rng);
  };

  std::uint64_t cum = 0;
  if (cfg.algo == "rime") {
    auto t0 = Clock::now();
    RimeEngine engine(cfg.rime, g0);
    cum += elapsed_ns(t0);
    for (std::size_t step = 0; step <= stream.size(); ++step) {
      if (step > 0) {
        t0 = Clock::now();
        engine.process_update(stream[step - 1]);
        cum += elapsed_ns(t0);
      }
      std::vector<NodeId> S;
      for (NodeId v : engine.seeder().solution().union_set) {
        if (engine.graph().has_node(v)) S.push_back(v);
      }
      TraceRow row{step, cum, evaluate_at(step, engine.graph(), S), engine.stats().restarts};
      res.trace.push_back(row);
      if (step == stream.size()) {
        res.final_seeds = std::move(S);
        res.final_min_spread = row.min_spread;
      }
    }
    res.restarts = engine.stats().restarts;
    res.stats = engine.stats();
    res.gamma = engine.seeder().gamma_log();
  } else {
    const BaselineKind kind = parse_baseline_kind(cfg.algo);
    const BaselineConfig bcfg = baseline_config(cfg);
    Rng rng(Rng::derive(cfg.rime.seed, kBaselineStream));
    DynGraph g = g0;
    for (std::size_t step = 0; step <= stream.size(); ++step) {
      const auto t0 = Clock::now();
      if (step > 0) apply_update(g, stream[step - 1]);
      std::vector<NodeId> S;
      if (g.num_nodes() > 0) S = run_baseline(kind, g, res.thetas, bcfg, rng).seeds;
      cum += elapsed_ns(t0);
      TraceRow row{step, cum, evaluate_at(step, g, S), 0};
      res.trace.push_back(row);
      if (step == stream.size()) {
        res.final_seeds = std::move(S);
        res.final_min_spread = row.min_spread;
      }
    }
  }
  res.total_ns = cum;
  return res;
}

std::string summary_json(const ExperimentResult& r, const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["algo"] = cfg.algo;
  j["mode"] = to_string(cfg.rime.mode);
  j["seed"] = cfg.rime.seed;
  j["updates"] = r.trace.empty() ? 0 : r.trace.size() - 1;
  j["final_min_spread"] = r.final_min_spread ? nlohmann::json(*r.final_min_spread) : nlohmann::json();
  j["seed_set_size"] = r.final_seeds.size();
  j["seeds"] = r.final_seeds;
  j["restarts"] = r.restarts;
  j["total_ns"] = r.total_ns;
  if (r.stats) {
    j["phases"] = r.stats->phases;
    j["stages"] = r.stats->stages;
    j["bipartite_events"] = r.stats->bipartite_events;
    j["find_seeds_calls"] = r.stats->find_seeds_calls;
    j["est_edges_scanned"] = r.stats->est_edges_scanned_total;
    nlohmann::json log = nlohmann::json::array();
    for (const auto& rec : r.stats->restart_log) {
      log.push_back({{"step", rec.step}, {"reason", to_string(rec.reason)}, {"n0", rec.n0}, {"m0", rec.m0}});
    }
    j["restart_log"] = log;
  }
  return j.dump(2);
}

}  // namespace rime
