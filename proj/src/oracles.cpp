#include "rime/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "rime/errors.hpp"

namespace rime {

SpreadEstimate monte_carlo_spread(const DynGraph& g, const EdgeProbFn& prob,
                                  std::span<const NodeId> S, std::size_t runs, Rng& rng) {
  SpreadEstimate out;
  if (S.empty() || runs == 0) return out;
  std::vector<std::uint32_t> stamp(g.id_capacity(), 0);
  std::vector<NodeId> frontier;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t r = 1; r <= runs; ++r) {
    const auto epoch = static_cast<std::uint32_t>(r);
    frontier.clear();
    for (NodeId s : S) {
      if (g.has_node(s) && stamp[s] != epoch) {
        stamp[s] = epoch;
        frontier.push_back(s);
      }
    }
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      const NodeId u = frontier[head];
      for (NodeId v : g.out_neighbors(u)) {
        if (stamp[v] != epoch && rng.bernoulli(prob(u, v))) {
          stamp[v] = epoch;
          frontier.push_back(v);
        }
      }
    }
    const auto c = static_cast<double>(frontier.size());
    sum += c;
    sum_sq += c * c;
  }
  const auto n = static_cast<double>(runs);
  out.mean = sum / n;
  if (runs > 1) {
    const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1));
    out.stderr_ = std::sqrt(var / n);
  }
  return out;
}

SpreadEstimate monte_carlo_spread(const DynGraph& g, const Theta& theta, ModelKind model,
                                  std::span<const NodeId> S, std::size_t runs, Rng& rng) {
  return monte_carlo_spread(g, ThetaProbability(g, model, theta), S, runs, rng);
}

double exact_spread(const DynGraph& g, const EdgeProbFn& prob, std::span<const NodeId> S) {
  const auto edges = g.edges();
  if (edges.size() > 20) throw SizeError("exact_spread: more than 20 edges");
  std::vector<double> p(edges.size());
  for (std::size_t j = 0; j < edges.size(); ++j) p[j] = prob(edges[j].src, edges[j].dst);
  std::vector<char> seen(g.id_capacity(), 0);
  std::vector<NodeId> stack;
  std::vector<std::vector<std::pair<NodeId, std::size_t>>> out(g.id_capacity());
  for (std::size_t j = 0; j < edges.size(); ++j) out[edges[j].src].push_back({edges[j].dst, j});
  double total = 0.0;
  const std::uint32_t subsets = 1u << edges.size();
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    double w = 1.0;
    for (std::size_t j = 0; j < edges.size(); ++j) w *= (mask >> j & 1u) ? p[j] : 1.0 - p[j];
    if (w == 0.0) continue;
    std::fill(seen.begin(), seen.end(), 0);
    stack.clear();
    std::size_t reached = 0;
    for (NodeId s : S) {
      if (g.has_node(s) && !seen[s]) {
        seen[s] = 1;
        stack.push_back(s);
      }
    }
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      ++reached;
      for (auto [v, j] : out[u]) {
        if ((mask >> j & 1u) && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    total += w * static_cast<double>(reached);
  }
  return total;
}

double min_spread(const DynGraph& g, const std::vector<Theta>& thetas, ModelKind model,
                  std::span<const NodeId> S, std::size_t runs, Rng& rng) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& theta : thetas) {
    best = std::min(best, monte_carlo_spread(g, theta, model, S, runs, rng).mean);
  }
  return thetas.empty() ? 0.0 : best;
}

std::vector<double> exact_spread_table(const DynGraph& g, const EdgeProbFn& prob) {
  const auto nodes = g.sorted_nodes();
  const auto edges = g.edges();
  if (nodes.size() > 12) throw SizeError("exact_spread_table: more than 12 nodes");
  if (edges.size() > 16) throw SizeError("exact_spread_table: more than 16 edges");
  const std::size_t n = nodes.size();
  std::vector<std::size_t> pos(g.id_capacity(), 0);
  for (std::size_t i = 0; i < n; ++i) pos[nodes[i]] = i;
  std::vector<double> p(edges.size());
  for (std::size_t j = 0; j < edges.size(); ++j) p[j] = prob(edges[j].src, edges[j].dst);

  const std::size_t subsets = std::size_t{1} << n;
  std::vector<double> table(subsets, 0.0);
  std::vector<std::uint32_t> reach(n);
  for (std::uint32_t mask = 0; mask < (1u << edges.size()); ++mask) {
    double w = 1.0;
    for (std::size_t j = 0; j < edges.size(); ++j) w *= (mask >> j & 1u) ? p[j] : 1.0 - p[j];
    if (w == 0.0) continue;
    // Transitive closure over the live edges by fixed-point iteration.
    for (std::size_t i = 0; i < n; ++i) reach[i] = 1u << i;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t j = 0; j < edges.size(); ++j) {
        if (!(mask >> j & 1u)) continue;
        const std::size_t a = pos[edges[j].src], b = pos[edges[j].dst];
        const std::uint32_t merged = reach[a] | reach[b];
        if (merged != reach[a]) {
          reach[a] = merged;
          changed = true;
        }
      }
    }
    std::vector<std::uint32_t> cover(subsets, 0);
    for (std::size_t s = 1; s < subsets; ++s) {
      const auto low = static_cast<std::size_t>(std::countr_zero(s));
      cover[s] = cover[s & (s - 1)] | reach[low];
      table[s] += w * std::popcount(cover[s]);
    }
  }
  return table;
}

RobustOpt brute_force_robust_opt(const DynGraph& g, const std::vector<Theta>& thetas,
                                 ModelKind model, std::size_t k) {
  const auto nodes = g.sorted_nodes();
  if (nodes.size() > 12 || k > 3 || g.num_edges() > 16) {
    throw SizeError("brute_force_robust_opt: instance beyond n <= 12, k <= 3, m <= 16");
  }
  const std::size_t n = nodes.size();
  const std::size_t kk = std::min(k, n);
  std::vector<std::vector<double>> tables;
  for (const auto& theta : thetas) {
    tables.push_back(exact_spread_table(g, ThetaProbability(g, model, theta)));
  }
  RobustOpt best;
  best.value = -1.0;
  std::vector<std::size_t> idx(kk);
  for (std::size_t i = 0; i < kk; ++i) idx[i] = i;
  // Lexicographic walk over kk-combinations of positions.
  while (true) {
    std::size_t mask = 0;
    for (std::size_t i : idx) mask |= std::size_t{1} << i;
    double value = std::numeric_limits<double>::infinity();
    for (const auto& t : tables) value = std::min(value, t[mask]);
    if (tables.empty()) value = 0.0;
    if (value > best.value) {
      best.value = value;
      best.set.clear();
      for (std::size_t i : idx) best.set.push_back(nodes[i]);
    }
    std::size_t i = kk;
    while (i > 0 && idx[i - 1] == n - kk + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < kk; ++j) idx[j] = idx[j - 1] + 1;
  }
  if (best.value < 0) best.value = 0.0;
  return best;
}

}  // namespace rime
