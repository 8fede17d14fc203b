#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "rime/bench.hpp"
#include "rime/errors.hpp"
#include "rime/io.hpp"
#include "rime/oracles.hpp"

using namespace rime;

namespace {

std::string graph_text(const DynGraph& g) {
  std::ostringstream os;
  write_graph(os, g);
  return os.str();
}

std::vector<std::string> lines_of(const std::vector<Update>& s) {
  std::vector<std::string> out;
  for (const auto& u : s) out.push_back(format_update(u));
  return out;
}

// Ordered k-subsets by recursive choice, max of min_i spread.
void best_subset(const DynGraph& g, const std::vector<ThetaProbability>& probs,
                 const std::vector<NodeId>& nodes, std::size_t k, std::size_t from,
                 std::vector<NodeId>& cur, double& best) {
  if (cur.size() == k) {
    double worst = 1e300;
    for (const auto& p : probs) worst = std::min(worst, fx::enumerate_spread(g, p, cur));
    best = std::max(best, worst);
    return;
  }
  for (std::size_t i = from; i < nodes.size(); ++i) {
    cur.push_back(nodes[i]);
    best_subset(g, probs, nodes, k, i + 1, cur, best);
    cur.pop_back();
  }
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("exact_spread examples") {
  DynGraph g = fx::empty_nodes(3);
  CHECK(exact_spread(g, fx::constant_table(0.5), std::vector<NodeId>{1}) == 1.0);
  g.add_edge(0, 1);
  fx::TableProb p = fx::constant_table(0.0);
  p.set(0, 1, 0.3);
  CHECK(exact_spread(g, p, std::vector<NodeId>{0}) == doctest::Approx(1.3));
  g.add_edge(1, 2);
  p.set(1, 2, 0.6);
  CHECK(exact_spread(g, p, std::vector<NodeId>{0}) == doctest::Approx(1.0 + 0.3 + 0.3 * 0.6));
  CHECK(exact_spread(g, p, std::vector<NodeId>{}) == 0.0);
  Rng rng(81);
  CHECK_THROWS_AS(exact_spread(fx::random_graph(10, 21, 1, rng), p, std::vector<NodeId>{0}), SizeError);
}

TEST_CASE("property: exact_spread matches an independent enumerator") {
  Rng rng(82);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    DynGraph g = fx::random_graph(n, rng.below(13), 1, rng);
    const auto p = fx::random_table(g, rng);
    std::vector<NodeId> S;
    for (NodeId v : g.sorted_nodes()) {
      if (rng.bernoulli(0.3)) S.push_back(v);
    }
    CHECK(exact_spread(g, p, S) == doctest::Approx(fx::enumerate_spread(g, p, S)).epsilon(1e-12));
  }
}

TEST_CASE("monte_carlo_spread examples") {
  Rng rng(83);
  DynGraph g = fx::empty_nodes(4);
  g.add_edge(0, 1);
  fx::TableProb p = fx::constant_table(0.0);
  p.set(0, 1, 0.3);
  const auto none = monte_carlo_spread(g, p, std::vector<NodeId>{}, 100, rng);
  CHECK(none.mean == 0.0);
  CHECK(none.stderr_ == 0.0);
  const auto all = monte_carlo_spread(g, p, g.sorted_nodes(), 100, rng);
  CHECK(all.mean == 4.0);
  CHECK(all.stderr_ == 0.0);
  const auto est = monte_carlo_spread(g, p, std::vector<NodeId>{0}, 100000, rng);
  CHECK(std::abs(est.mean - 1.3) <= 3.0 * est.stderr_);
}

TEST_CASE("property: Monte Carlo agrees with exact spread") {
  Rng rng(84);
  int outside = 0;
  for (int trial = 0; trial < 20; ++trial) {
    DynGraph g = fx::random_graph(6, 10, 1, rng);
    const auto p = fx::random_table(g, rng);
    const std::vector<NodeId> S{static_cast<NodeId>(rng.below(6))};
    const auto est = monte_carlo_spread(g, p, S, 100000, rng);
    if (std::abs(est.mean - exact_spread(g, p, S)) > 3.0 * est.stderr_) ++outside;
  }
  // Each trial misses with probability 0.27%; two misses in twenty is already rare.
  CHECK(outside <= 1);
}

TEST_CASE("min_spread examples") {
  Rng rng(85);
  DynGraph g = gen_synthetic(10, 20, 1, rng);
  const Theta t{0.4, -0.7};
  const std::vector<NodeId> S{2, 5};
  Rng a(3), b(3);
  const double single = monte_carlo_spread(g, t, ModelKind::kLogistic, S, 2000, a).mean;
  CHECK(min_spread(g, {t}, ModelKind::kLogistic, S, 2000, b) == single);
  const double dup = min_spread(g, {t, t}, ModelKind::kLogistic, S, 20000, rng);
  CHECK(dup == doctest::Approx(single).epsilon(0.05));
}

TEST_CASE("brute_force_robust_opt examples") {
  SUBCASE("k = n returns every node") {
    Rng rng(86);
    DynGraph g = fx::random_graph(3, 4, 1, rng);
    const auto r = brute_force_robust_opt(g, {{0.1, 0.2}}, ModelKind::kLogistic, 3);
    CHECK(r.set == std::vector<NodeId>{0, 1, 2});
    CHECK(r.value == doctest::Approx(3.0));
  }
  SUBCASE("two disjoint live arcs") {
    DynGraph g(1);
    for (NodeId v = 0; v < 4; ++v) g.add_node(v, {1.0});
    g.add_edge(0, 1);
    g.add_edge(2, 3);
    const auto r = brute_force_robust_opt(g, {{1.0, 1.0}}, ModelKind::kLinear, 1);
    CHECK(r.value == doctest::Approx(2.0));
    CHECK((r.set == std::vector<NodeId>{0} || r.set == std::vector<NodeId>{2}));
  }
  SUBCASE("random instances against a second enumerator") {
    Rng rng(87);
    for (int trial = 0; trial < 5; ++trial) {
      DynGraph g = fx::random_graph(8, 10, 1, rng);
      const std::vector<Theta> thetas{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                      {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
      const auto r = brute_force_robust_opt(g, thetas, ModelKind::kLogistic, 2);
      std::vector<ThetaProbability> probs;
      for (const auto& t : thetas) probs.emplace_back(g, ModelKind::kLogistic, t);
      double best = 0.0;
      std::vector<NodeId> cur;
      best_subset(g, probs, g.sorted_nodes(), 2, 0, cur, best);
      CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
      CHECK(r.set.size() == 2);
    }
  }
  SUBCASE("size limits") {
    Rng rng(88);
    CHECK_THROWS_AS(brute_force_robust_opt(fx::empty_nodes(13), {{0.0, 0.0}}, ModelKind::kLinear, 1),
                    SizeError);
    CHECK_THROWS_AS(brute_force_robust_opt(fx::empty_nodes(6), {{0.0, 0.0}}, ModelKind::kLinear, 4),
                    SizeError);
  }
}

TEST_CASE("gen_synthetic") {
  Rng rng(89);
  DynGraph two = gen_synthetic(2, 2, 3, rng);
  CHECK(two.edges() == std::vector<Edge>{{0, 1}, {1, 0}});
  CHECK(two.edge_feature(0, 1).size() == 6);
  DynGraph g = gen_synthetic(30, 60, 3, rng);
  CHECK(g.num_nodes() == 30);
  CHECK(g.num_edges() == 60);
  for (NodeId v : g.sorted_nodes()) {
    for (double f : g.features(v)) CHECK(std::abs(f) <= 1.0);
  }
  for (const auto& e : g.edges()) CHECK(e.src != e.dst);
  Rng a(5), b(5);
  CHECK(graph_text(gen_synthetic(20, 40, 3, a)) == graph_text(gen_synthetic(20, 40, 3, b)));
}

TEST_CASE("property: generated streams replay cleanly") {
  Rng rng(90);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(20);
    DynGraph g = gen_synthetic(n, std::min<std::size_t>(rng.below(30), n * (n - 1)), 1, rng);
    const bool dynamic = trial % 2 == 0;
    const std::size_t count = 2 * std::max<std::size_t>(g.num_edges(), 1);
    const auto spec =
        StreamSpec::defaults(dynamic ? StreamSetting::kFullyDynamic : StreamSetting::kIncremental, count);
    const auto stream = gen_stream(g, spec, rng);
    CHECK(stream.size() == count);
    DynGraph h = g;
    for (const auto& u : stream) {
      if (!dynamic) CHECK_FALSE(is_removal(u));
      REQUIRE_NOTHROW(apply_update(h, u));
    }
  }
  StreamSpec bad = StreamSpec::defaults(StreamSetting::kIncremental, 3);
  bad.mix = {0.5, 0.0, 0.5, 0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("graph and stream files round trip") {
  Rng rng(91);
  DynGraph g = gen_synthetic(15, 25, 3, rng);
  std::istringstream is(graph_text(g));
  DynGraph back = read_graph(is);
  CHECK(graph_text(back) == graph_text(g));
  for (NodeId v : g.sorted_nodes()) {
    const auto a = g.features(v);
    const auto b = back.features(v);
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  const auto stream = gen_stream(g, StreamSpec::defaults(StreamSetting::kFullyDynamic, 40), rng);
  std::ostringstream os;
  write_stream(os, stream);
  std::istringstream sis(os.str());
  CHECK(lines_of(read_stream(sis, 3)) == lines_of(stream));
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse_update("+x 1 2"), ParseError);
  CHECK_THROWS_AS(parse_update("+e 1"), ParseError);
  CHECK_THROWS_AS(parse_update("+n 4 0.1 0.2", 3), ParseError);
  CHECK_THROWS_AS(parse_update("-e a b"), ParseError);
  std::istringstream bad_graph("2 1 1\nnode 0 0.5\nnode 1 0.5\nedge 0 7\n");
  CHECK_THROWS(read_graph(bad_graph));
}

TEST_CASE("config files") {
  RimeConfig cfg;
  std::istringstream is("# comment\n\nk = 7\neps1 = 0.25\nmode = fully_dynamic\nmodel = probit\n");
  read_config(is, cfg);
  CHECK(cfg.k == 7);
  CHECK(cfg.eps1 == 0.25);
  CHECK(cfg.mode == EngineMode::kFullyDynamic);
  CHECK(cfg.model == ModelKind::kProbit);
  RimeConfig again;
  std::istringstream round(format_config(cfg));
  read_config(round, again);
  CHECK(format_config(again) == format_config(cfg));
  std::istringstream unknown("kappa = 3\n");
  CHECK_THROWS_AS(read_config(unknown, cfg), ConfigError);
}

TEST_CASE("run_experiment traces and summary") {
  Rng rng(92);
  DynGraph g = gen_synthetic(12, 24, 1, rng);
  const auto stream = gen_stream(g, StreamSpec::defaults(StreamSetting::kIncremental, 20), rng);
  ExperimentConfig cfg;
  cfg.rime.d = 2;
  cfg.rime.k = 2;
  cfg.rime.l = 2;
  cfg.rime.T = 2;
  cfg.eval_runs = 200;
  cfg.stride = 5;
  for (const std::string algo : {"rime", "base", "hiro", "lugreedy"}) {
    cfg.algo = algo;
    const auto r = run_experiment(g, stream, cfg);
    REQUIRE(r.trace.size() == stream.size() + 1);
    for (std::size_t j = 0; j < r.trace.size(); ++j) {
      CHECK(r.trace[j].step == j);
      if (j > 0) CHECK(r.trace[j].cum_ns >= r.trace[j - 1].cum_ns);
    }
    CHECK(r.trace[5].min_spread.has_value());
    CHECK_FALSE(r.trace[6].min_spread.has_value());
    CHECK(r.final_min_spread.has_value());
    const auto j = nlohmann::json::parse(summary_json(r, cfg));
    CHECK(j.contains("final_min_spread"));
    CHECK(j.contains("restarts"));
    CHECK(j.contains("total_ns"));
    CHECK(j["seed_set_size"].get<std::size_t>() == r.final_seeds.size());
  }
  std::ostringstream csv;
  write_trace_csv(csv, run_experiment(g, stream, cfg).trace);
  CHECK(csv.str().rfind("step,cum_ns,min_spread,restarts\n", 0) == 0);
}

}  // TEST_SUITE
