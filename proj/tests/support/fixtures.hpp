#pragma once

// Hand-rolled instance generators and small independent oracles shared by the
// unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "rime/netcore.hpp"
#include "rime/rng.hpp"
#include "rime/rrsampler.hpp"

namespace fx {

using rime::DynGraph;
using rime::Edge;
using rime::NodeId;
using rime::Rng;

inline rime::FeatureVector random_features(std::size_t dim, Rng& rng) {
  rime::FeatureVector f(dim);
  for (auto& x : f) x = rng.uniform(-1.0, 1.0);
  return f;
}

inline DynGraph empty_nodes(std::size_t n, std::size_t feat_dim = 1) {
  DynGraph g(feat_dim);
  for (NodeId v = 0; v < n; ++v) g.add_node(v, rime::FeatureVector(feat_dim, 0.0));
  return g;
}

// n nodes, up to m distinct random arcs (fewer if the graph saturates).
inline DynGraph random_graph(std::size_t n, std::size_t m, std::size_t feat_dim, Rng& rng) {
  DynGraph g(feat_dim);
  for (NodeId v = 0; v < n; ++v) g.add_node(v, random_features(feat_dim, rng));
  const std::size_t cap = n < 2 ? 0 : n * (n - 1);
  m = std::min(m, cap);
  while (g.num_edges() < m) {
    const auto u = static_cast<NodeId>(rng.below(n));
    const auto v = static_cast<NodeId>(rng.below(n));
    if (u != v && !g.has_edge(u, v)) g.add_edge(u, v);
  }
  return g;
}

// Per-arc probabilities held in a table; unknown arcs get `fallback`.
struct TableProb {
  std::map<std::pair<NodeId, NodeId>, double> p;
  double fallback = 0.0;

  double operator()(NodeId u, NodeId v) const {
    auto it = p.find({u, v});
    return it == p.end() ? fallback : it->second;
  }
  void set(NodeId u, NodeId v, double x) { p[{u, v}] = x; }
};

inline TableProb random_table(const DynGraph& g, Rng& rng, double lo = 0.0, double hi = 1.0) {
  TableProb t;
  for (const Edge& e : g.edges()) t.set(e.src, e.dst, rng.uniform(lo, hi));
  return t;
}

inline TableProb constant_table(double p) {
  TableProb t;
  t.fallback = p;
  return t;
}

// Expected reach by enumerating live-edge subsets with an explicit stack,
// written independently of the library oracle.
inline double enumerate_spread(const DynGraph& g, const rime::EdgeProbFn& prob,
                               const std::vector<NodeId>& S) {
  const auto edges = g.edges();
  const std::size_t m = edges.size();
  const std::size_t cap = g.id_capacity();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    double w = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double p = prob(edges[j].src, edges[j].dst);
      w *= (mask >> j & 1) ? p : 1.0 - p;
    }
    if (w == 0.0) continue;
    std::vector<char> on(cap, 0);
    std::vector<NodeId> stack;
    for (NodeId s : S) {
      if (g.has_node(s) && !on[s]) {
        on[s] = 1;
        stack.push_back(s);
      }
    }
    std::size_t reached = stack.size();
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < m; ++j) {
        if (!(mask >> j & 1) || edges[j].src != u || on[edges[j].dst]) continue;
        on[edges[j].dst] = 1;
        ++reached;
        stack.push_back(edges[j].dst);
      }
    }
    total += w * static_cast<double>(reached);
  }
  return total;
}

// All k-subsets of the live nodes, in lexicographic order.
inline std::vector<std::vector<NodeId>> k_subsets(const std::vector<NodeId>& nodes, std::size_t k) {
  std::vector<std::vector<NodeId>> out;
  if (k > nodes.size()) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t j = 0; j < k; ++j) idx[j] = j;
  while (true) {
    std::vector<NodeId> s;
    for (auto j : idx) s.push_back(nodes[j]);
    out.push_back(std::move(s));
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == nodes.size() - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double std_err(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

}  // namespace fx
