#pragma once

// From-scratch comparison methods: BASE (one RR set per node per theta),
// HIRO-style (fresh random roots per MWU iteration) and LUGreedy (greedy under
// the lower and upper probability bounds).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rime/netcore.hpp"
#include "rime/rng.hpp"
#include "rime/rrsampler.hpp"
#include "rime/seeder.hpp"

namespace rime {

enum class BaselineKind { kBase, kHiro, kLuGreedy };

std::string to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(const std::string& name);

struct BaselineConfig {
  std::size_t k = 10;
  std::size_t T = 10;
  double eta = -1.0;           // negative: sqrt(8 ln l / T)
  std::size_t root_count = 0;  // HIRO; 0 means max(1, n / 10)
  std::size_t eval_runs = 10000;
  ModelKind model = ModelKind::kLogistic;
  HyperparamSpace space;  // LUGreedy only
};

// A static RR-set collection for one probability vector.
struct RRCollection {
  std::vector<std::vector<NodeId>> sets;
  std::vector<std::vector<std::uint32_t>> by_node;  // node id -> set indices
  double scale = 0.0;                               // multiplies covered counts

  void add(std::vector<NodeId> members);
  std::size_t covered(std::span<const NodeId> S) const;
};

RRCollection rr_per_node(const DynGraph& g, const EdgeProbFn& prob, Rng& rng);
RRCollection rr_random_roots(const DynGraph& g, const EdgeProbFn& prob, std::size_t roots,
                             Rng& rng);

// Standard greedy on sum_i w[i] * scale_i * covered_i(S): k picks over live
// nodes, lazily evaluated, ties to the smaller id.
std::vector<NodeId> greedy_max_coverage(const DynGraph& g,
                                        std::span<const RRCollection* const> colls,
                                        std::span<const double> weights, std::size_t k);

struct BaselineResult {
  std::vector<NodeId> seeds;  // union of candidates (LUGreedy: the chosen set)
  std::vector<std::vector<NodeId>> candidates;
};

BaselineResult run_base(const DynGraph& g, const std::vector<Theta>& thetas,
                        const BaselineConfig& cfg, Rng& rng);
BaselineResult run_hiro(const DynGraph& g, const std::vector<Theta>& thetas,
                        const BaselineConfig& cfg, Rng& rng);

struct LuCandidates {
  std::vector<NodeId> lower;
  std::vector<NodeId> upper;
};
LuCandidates lugreedy_candidates(const DynGraph& g, const BaselineConfig& cfg, Rng& rng);
BaselineResult run_lugreedy(const DynGraph& g, const BaselineConfig& cfg, Rng& rng);

BaselineResult run_baseline(BaselineKind kind, const DynGraph& g, const std::vector<Theta>& thetas,
                            const BaselineConfig& cfg, Rng& rng);

struct BaselineStep {
  std::size_t step = 0;
  std::uint64_t cum_ns = 0;
  std::vector<NodeId> seeds;
};

// Row 0 is the run on g0; row j follows the j-th update.
std::vector<BaselineStep> rerun_after_each_update(BaselineKind kind, const std::vector<Update>& stream,
                                                  DynGraph g0, const std::vector<Theta>& thetas,
                                                  const BaselineConfig& cfg, Rng& rng);

}  // namespace rime
