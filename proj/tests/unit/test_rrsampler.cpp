#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "rime/errors.hpp"
#include "rime/rrsampler.hpp"

using namespace rime;

namespace {

std::vector<NodeId> members(const RRSet& r) { return {r.members().begin(), r.members().end()}; }

// Keeps one RR set in step with a graph update, the way the coverage layer does.
void track_insert(RRSet& r, const DynGraph& g, Edge e, const EdgeProbFn& prob, Rng& rng) {
  if (!r.contains(e.dst) || r.outcome(e.src, e.dst) != RRSet::Outcome::kUndecided) return;
  if (r.contains(e.src)) {
    record_edge_outcome(r, e, prob, rng);
  } else {
    augment_rr_set(r, g, e, prob, rng);
  }
}

void track_remove_edge(RRSet& r, Edge e) {
  if (r.outcome(e.src, e.dst) == RRSet::Outcome::kLive) {
    reduce_rr_set(r, e);
  } else {
    forget_edge(r, e);
  }
}

// Nodes that reach the root through the set's live edges.
std::vector<NodeId> live_closure(const RRSet& r) {
  std::set<NodeId> reach{r.root()};
  const auto live = r.live_edges();
  bool grew = true;
  while (grew) {
    grew = false;
    for (const Edge& e : live) {
      if (reach.count(e.dst) && !reach.count(e.src)) {
        reach.insert(e.src);
        grew = true;
      }
    }
  }
  return {reach.begin(), reach.end()};
}

}  // namespace

TEST_SUITE("rrsampler") {

TEST_CASE("sample_rr_set examples") {
  SUBCASE("isolated root") {
    DynGraph g = fx::empty_nodes(3);
    Rng rng(1);
    const RRSet r = sample_rr_set(g, fx::constant_table(1.0), 1, rng);
    CHECK(members(r) == std::vector<NodeId>{1});
    CHECK(r.edges_checked() == 0);
  }
  SUBCASE("deterministic path") {
    DynGraph g = fx::empty_nodes(2);
    g.add_edge(0, 1);
    Rng rng(1);
    const RRSet r = sample_rr_set(g, fx::constant_table(1.0), 1, rng);
    CHECK(members(r) == std::vector<NodeId>{0, 1});
    CHECK(r.live_edges() == std::vector<Edge>{{0, 1}});
    CHECK(r.dead_edges().empty());
    CHECK(r.audit(&g).empty());
  }
  SUBCASE("star of five spokes at one half") {
    DynGraph g = fx::empty_nodes(6);
    for (NodeId s = 1; s <= 5; ++s) g.add_edge(s, 0);
    Rng rng(2);
    RRSampler sampler;
    std::vector<double> sizes;
    for (int j = 0; j < 10000; ++j) {
      sizes.push_back(static_cast<double>(sampler.sample(g, fx::constant_table(0.5), 0, rng).size()));
    }
    CHECK(std::abs(fx::mean(sizes) - 3.5) <= 3 * fx::std_err(sizes));
  }
  SUBCASE("dead root throws") {
    DynGraph g = fx::empty_nodes(2);
    Rng rng(1);
    CHECK_THROWS_AS(sample_rr_set(g, fx::constant_table(1.0), 5, rng), PreconditionError);
  }
}

TEST_CASE("every in-edge of a member is examined once") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    DynGraph g = fx::random_graph(12, 30, 1, rng);
    const auto prob = fx::random_table(g, rng);
    const RRSet r = sample_rr_set(g, prob, static_cast<NodeId>(rng.below(12)), rng);
    std::size_t in_edges = 0;
    for (NodeId v : r.members()) in_edges += g.in_neighbors(v).size();
    CHECK(r.edges_checked() == in_edges);
    CHECK(r.num_live() + r.num_dead() == r.edges_checked());
    CHECK(live_closure(r) == members(r));
    CHECK(r.audit(&g).empty());
  }
}

TEST_CASE("estimate_generation_rate") {
  SUBCASE("edgeless graph uses the ceil(R) guard") {
    DynGraph g = fx::empty_nodes(4);
    Rng rng(1);
    const auto est = estimate_generation_rate(g, fx::constant_table(0.5), 2.5, 0, rng);
    CHECK(est.sets_sampled == 3);
    CHECK(est.rate == doctest::Approx(3.0 / 4.0));
    CHECK(est.n0 == 4);
  }
  SUBCASE("complete graph on three nodes at p = 0") {
    DynGraph g = fx::empty_nodes(3);
    for (NodeId u = 0; u < 3; ++u) {
      for (NodeId v = 0; v < 3; ++v) {
        if (u != v) g.add_edge(u, v);
      }
    }
    Rng rng(1);
    const auto est = estimate_generation_rate(g, fx::constant_table(0.0), 2.0, g.num_edges(), rng);
    CHECK(est.sets_sampled == 6);
    CHECK(est.rate == doctest::Approx(2.0));
  }
  SUBCASE("fixed seed reproduces K") {
    Rng gr(9);
    DynGraph g = fx::random_graph(30, 60, 1, gr);
    const auto prob = fx::random_table(g, gr, 0.0, 0.4);
    Rng a(5), b(5);
    const auto ea = estimate_generation_rate(g, prob, 4.0, g.num_edges(), a);
    const auto eb = estimate_generation_rate(g, prob, 4.0, g.num_edges(), b);
    CHECK(ea.sets_sampled == eb.sets_sampled);
    CHECK(ea.rate == doctest::Approx(static_cast<double>(ea.sets_sampled) / 30.0));
  }
  SUBCASE("non-positive R is rejected") {
    DynGraph g = fx::empty_nodes(2);
    Rng rng(1);
    CHECK_THROWS_AS(estimate_generation_rate(g, fx::constant_table(0.5), 0.0, 1, rng), ConfigError);
  }
}

TEST_CASE("estimate_generation_rate stops at the first set reaching R m0") {
  Rng rng(21);
  DynGraph g = fx::random_graph(20, 50, 1, rng);
  const auto prob = fx::random_table(g, rng, 0.0, 0.5);
  const double R = 3.0;
  Rng a(8), b(8);
  const auto est = estimate_generation_rate(g, prob, R, g.num_edges(), a);
  // Replay the same draws: roots come from below(n) and sampling consumes the rest.
  RRSampler sampler;
  std::size_t total = 0, sets = 0;
  const auto nodes = g.node_list();
  while (static_cast<double>(total) < R * static_cast<double>(g.num_edges())) {
    const NodeId root = nodes[b.below(nodes.size())];
    total += std::max<std::size_t>(1, sampler.sample_edges_checked(g, prob, root, b));
    ++sets;
  }
  CHECK(est.sets_sampled == sets);
}

TEST_CASE("augment_rr_set examples") {
  SUBCASE("live edge from a source with no in-edges") {
    DynGraph g = fx::empty_nodes(2);
    Rng rng(1);
    RRSet r = sample_rr_set(g, fx::constant_table(1.0), 1, rng);
    g.add_edge(0, 1);
    const auto res = augment_rr_set(r, g, {0, 1}, fx::constant_table(1.0), rng);
    CHECK(res.added == std::vector<NodeId>{0});
    CHECK(res.edges_newly_checked == 1);
    CHECK(r.audit(&g).empty());
  }
  SUBCASE("dead edge is memoized") {
    DynGraph g = fx::empty_nodes(2);
    Rng rng(1);
    RRSet r = sample_rr_set(g, fx::constant_table(0.0), 1, rng);
    g.add_edge(0, 1);
    const auto res = augment_rr_set(r, g, {0, 1}, fx::constant_table(0.0), rng);
    CHECK(res.added.empty());
    CHECK(r.outcome(0, 1) == RRSet::Outcome::kDead);
    CHECK_THROWS_AS(augment_rr_set(r, g, {0, 1}, fx::constant_table(1.0), rng), ContractError);
  }
  SUBCASE("chain w -> u -> v explores upstream") {
    // w = 0, u = 1, v = 2.
    DynGraph g = fx::empty_nodes(3);
    g.add_edge(0, 1);
    Rng rng(1);
    RRSet r = sample_rr_set(g, fx::constant_table(1.0), 2, rng);
    CHECK(members(r) == std::vector<NodeId>{2});
    g.add_edge(1, 2);
    const auto res = augment_rr_set(r, g, {1, 2}, fx::constant_table(1.0), rng);
    CHECK(res.added == std::vector<NodeId>{0, 1});
    CHECK(res.edges_newly_checked == 2);
    CHECK(r.audit(&g).empty());
  }
  SUBCASE("preconditions") {
    DynGraph g = fx::empty_nodes(3);
    g.add_edge(0, 1);
    Rng rng(1);
    RRSet r = sample_rr_set(g, fx::constant_table(1.0), 1, rng);
    CHECK_THROWS_AS(augment_rr_set(r, g, {0, 1}, fx::constant_table(1.0), rng), ContractError);
    CHECK_THROWS_AS(augment_rr_set(r, g, {2, 1}, fx::constant_table(1.0), rng), ContractError);
  }
}

TEST_CASE("reduce_rr_set examples") {
  SUBCASE("chain loses everything upstream") {
    // v = 0 is the root, u = 1, w = 2.
    DynGraph g = fx::empty_nodes(3);
    g.add_edge(1, 0);
    g.add_edge(2, 1);
    Rng rng(1);
    RRSet r = sample_rr_set(g, fx::constant_table(1.0), 0, rng);
    g.remove_edge(1, 0);
    const auto res = reduce_rr_set(r, {1, 0});
    CHECK(res.removed == std::vector<NodeId>{1, 2});
    CHECK(members(r) == std::vector<NodeId>{0});
    CHECK(r.edges_checked() == 0);
    CHECK(r.audit(&g).empty());
  }
  SUBCASE("diamond keeps a doubly reachable node") {
    // root 0; a = 1 and b = 2 lead to the root; u = 3 reaches both.
    DynGraph g = fx::empty_nodes(4);
    g.add_edge(1, 0);
    g.add_edge(2, 0);
    g.add_edge(3, 1);
    g.add_edge(3, 2);
    Rng rng(1);
    RRSet r = sample_rr_set(g, fx::constant_table(1.0), 0, rng);
    REQUIRE(members(r) == std::vector<NodeId>{0, 1, 2, 3});
    g.remove_edge(3, 1);
    const auto res = reduce_rr_set(r, {3, 1});
    CHECK(res.removed.empty());
    CHECK(members(r) == std::vector<NodeId>{0, 1, 2, 3});
    CHECK(r.audit(&g).empty());
  }
  SUBCASE("a dead record cannot be reduced") {
    DynGraph g = fx::empty_nodes(2);
    g.add_edge(0, 1);
    Rng rng(1);
    RRSet r = sample_rr_set(g, fx::constant_table(0.0), 1, rng);
    CHECK_THROWS_AS(reduce_rr_set(r, {0, 1}), ContractError);
    CHECK(forget_edge(r, {0, 1}));
    CHECK(!forget_edge(r, {0, 1}));
  }
}

TEST_CASE("remove_node_from_rr_set examples") {
  // root 0 <- 1 <- 2, and 3 -> 0 as a leaf.
  DynGraph g = fx::empty_nodes(5);
  g.add_edge(1, 0);
  g.add_edge(2, 1);
  g.add_edge(3, 0);
  Rng rng(1);
  const RRSet base = sample_rr_set(g, fx::constant_table(1.0), 0, rng);
  REQUIRE(members(base) == std::vector<NodeId>{0, 1, 2, 3});
  SUBCASE("non-member is a no-op") {
    RRSet r = base;
    CHECK(remove_node_from_rr_set(r, 4).removed.empty());
    CHECK(members(r) == members(base));
  }
  SUBCASE("sole intermediate takes its upstream along") {
    RRSet r = base;
    CHECK(remove_node_from_rr_set(r, 1).removed == std::vector<NodeId>{1, 2});
    CHECK(members(r) == std::vector<NodeId>{0, 3});
  }
  SUBCASE("leaf member") {
    RRSet r = base;
    CHECK(remove_node_from_rr_set(r, 3).removed == std::vector<NodeId>{3});
  }
  SUBCASE("the root cannot be removed") {
    RRSet r = base;
    CHECK_THROWS_AS(remove_node_from_rr_set(r, 0), ContractError);
  }
}

TEST_CASE("property: random maintenance keeps every invariant") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    DynGraph g = fx::random_graph(10, 15, 1, rng);
    const auto prob = fx::random_table(g, rng);
    fx::TableProb p = prob;
    p.fallback = 0.5;
    const NodeId root = static_cast<NodeId>(rng.below(10));
    RRSet r = sample_rr_set(g, p, root, rng);
    NodeId next = 10;
    for (int step = 0; step < 60; ++step) {
      const auto kind = rng.below(4);
      const auto nodes = g.node_list();
      if (kind == 0) {
        g.add_node(next++, {0.0});
      } else if (kind == 1) {
        const NodeId u = nodes[rng.below(nodes.size())];
        const NodeId v = nodes[rng.below(nodes.size())];
        if (u == v || g.has_edge(u, v)) continue;
        g.add_edge(u, v);
        track_insert(r, g, {u, v}, p, rng);
      } else if (kind == 2) {
        const NodeId x = nodes[rng.below(nodes.size())];
        if (x == root) continue;
        g.remove_node(x);
        remove_node_from_rr_set(r, x);
      } else {
        if (g.num_edges() == 0) continue;
        const auto edges = g.edges();
        const Edge e = edges[rng.below(edges.size())];
        g.remove_edge(e.src, e.dst);
        track_remove_edge(r, e);
      }
      REQUIRE(r.audit(&g).empty());
      CHECK(live_closure(r) == members(r));
      CHECK(r.contains(root));
    }
  }
}

TEST_CASE("property: deterministic probabilities match fresh sampling") {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    DynGraph g = fx::random_graph(12, 10, 1, rng);
    fx::TableProb p = fx::random_table(g, rng);
    for (auto& [key, val] : p.p) val = val < 0.5 ? 0.0 : 1.0;
    p.fallback = 0.0;
    const NodeId root = static_cast<NodeId>(rng.below(12));
    RRSet r = sample_rr_set(g, p, root, rng);
    for (int step = 0; step < 25; ++step) {
      const auto u = static_cast<NodeId>(rng.below(12));
      const auto v = static_cast<NodeId>(rng.below(12));
      if (u == v || g.has_edge(u, v)) continue;
      p.set(u, v, rng.bernoulli(0.5) ? 1.0 : 0.0);
      g.add_edge(u, v);
      track_insert(r, g, {u, v}, p, rng);
    }
    const RRSet fresh = sample_rr_set(g, p, root, rng);
    CHECK(members(r) == members(fresh));
  }
}

TEST_CASE("property: one incremental insertion preserves the size distribution") {
  Rng gr(33);
  DynGraph g = fx::random_graph(20, 40, 1, gr);
  fx::TableProb p = fx::random_table(g, gr, 0.1, 0.6);
  Edge e{0, 0};
  while (true) {
    e = {static_cast<NodeId>(gr.below(20)), static_cast<NodeId>(gr.below(20))};
    if (e.src != e.dst && !g.has_edge(e.src, e.dst)) break;
  }
  p.set(e.src, e.dst, 0.7);
  DynGraph after = g;
  after.add_edge(e.src, e.dst);
  Rng rng(34);
  RRSampler sampler;
  std::vector<double> inc, fresh;
  for (int j = 0; j < 5000; ++j) {
    const NodeId root = e.dst;
    RRSet r = sampler.sample(g, p, root, rng);
    track_insert(r, after, e, p, rng);
    inc.push_back(static_cast<double>(r.size()));
    fresh.push_back(static_cast<double>(sampler.sample(after, p, root, rng).size()));
  }
  const double se = std::hypot(fx::std_err(inc), fx::std_err(fresh));
  CHECK(std::abs(fx::mean(inc) - fx::mean(fresh)) <= 3 * se);
}

}  // TEST_SUITE
