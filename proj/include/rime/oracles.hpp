#pragma once

// Spread oracles: Monte-Carlo IC cascades, exact enumeration over live-edge
// subsets, and brute-force robust optimum for tiny instances.

#include <cstddef>
#include <span>
#include <vector>

#include "rime/netcore.hpp"
#include "rime/rng.hpp"
#include "rime/rrsampler.hpp"

namespace rime {

struct SpreadEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

SpreadEstimate monte_carlo_spread(const DynGraph& g, const EdgeProbFn& prob,
                                  std::span<const NodeId> S, std::size_t runs, Rng& rng);
SpreadEstimate monte_carlo_spread(const DynGraph& g, const Theta& theta, ModelKind model,
                                  std::span<const NodeId> S, std::size_t runs, Rng& rng);

// Requires m <= 20.
double exact_spread(const DynGraph& g, const EdgeProbFn& prob, std::span<const NodeId> S);

double min_spread(const DynGraph& g, const std::vector<Theta>& thetas, ModelKind model,
                  std::span<const NodeId> S, std::size_t runs, Rng& rng);

struct RobustOpt {
  std::vector<NodeId> set;
  double value = 0.0;
};

// Maximizes min_i exact spread over all k-subsets. Requires n <= 12, k <= 3,
// m <= 16. Ties go to the lexicographically smallest subset.
RobustOpt brute_force_robust_opt(const DynGraph& g, const std::vector<Theta>& thetas,
                                 ModelKind model, std::size_t k);

// Exact spread of every subset of the (at most 12) live nodes, indexed by a
// bitmask over sorted_nodes(). Shared by the brute-force routines.
std::vector<double> exact_spread_table(const DynGraph& g, const EdgeProbFn& prob);

}  // namespace rime
