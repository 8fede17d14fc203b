#pragma once

// The dynamic robust IM engine: restart / rebuild, the four update handlers
// with their restart triggers, and run statistics.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rime/coverage.hpp"
#include "rime/netcore.hpp"
#include "rime/seeder.hpp"

namespace rime {

enum class EngineMode { kIncremental, kFullyDynamic };

std::string to_string(EngineMode mode);
EngineMode parse_engine_mode(const std::string& name);

struct RimeConfig {
  std::size_t k = 10;
  double eps1 = 0.2;
  double eps2 = 0.1;
  double delta1 = 0.1;
  double delta2 = 0.1;
  double B = 1.0;
  std::size_t d = 6;
  std::vector<double> center;  // empty means the origin
  ModelKind model = ModelKind::kLogistic;
  std::size_t l = 20;
  std::size_t T = 10;
  EngineMode mode = EngineMode::kIncremental;
  std::optional<double> R_override = 32.0;
  std::uint64_t seed = 1;
  bool track_gamma = true;

  // Throws ConfigError on the first invalid field.
  void validate() const;
  HyperparamSpace space() const;
  HyperparamModel hyper_model() const { return {model, d}; }
};

struct DeltaR {
  double log_n0_over_delta = 0.0;
  double R = 0.0;  // the value in force (override if set)
  double R_theory = 0.0;
};

DeltaR compute_delta_and_R(const RimeConfig& cfg, std::size_t n0, std::size_t T, std::size_t k);

// Natural logs of the sufficient l from the convergence theorem, and the
// plain T floor 2 ln l / eps2^2.
double log_theory_l_bound(std::size_t d, double B, std::size_t m, std::size_t n, double eps2,
                          double delta2);
double theory_T_bound(std::size_t l, double eps2);

// The l hyperparameters an engine with this config samples.
std::vector<Theta> config_thetas(const RimeConfig& cfg);

enum class RestartReason {
  kInitial,
  kNodesDoubled,
  kEdgesDoubled,
  kNodesHalved,
  kEdgesHalved,
  kScanBudget,
  kManual
};

std::string to_string(RestartReason reason);

struct RestartRecord {
  std::size_t step = 0;  // updates processed when it fired
  RestartReason reason = RestartReason::kInitial;
  std::size_t n0 = 0;
  std::size_t m0 = 0;
};

struct RunStats {
  std::size_t restarts = 0;  // including the initial build
  std::size_t phases = 0;    // c_p: size-triggered restarts
  std::size_t stages = 0;    // c_r: scan-budget restarts over the run
  std::size_t stages_this_phase = 0;
  std::size_t updates = 0;
  std::size_t node_inserts = 0;
  std::size_t edge_inserts = 0;
  std::size_t node_removals = 0;
  std::size_t edge_removals = 0;
  std::size_t bipartite_events = 0;
  std::size_t find_seeds_calls = 0;
  std::uint64_t est_edges_scanned_total = 0;
  std::vector<std::uint64_t> update_ns;
  std::vector<RestartRecord> restart_log;
};

class RimeEngine {
 public:
  // Samples the l hyperparameters and runs the initial restart.
  RimeEngine(RimeConfig cfg, DynGraph initial);
  // Pairs hold probability functors bound to graph_, so the engine stays put.
  RimeEngine(const RimeEngine&) = delete;
  RimeEngine& operator=(const RimeEngine&) = delete;

  const RimeConfig& config() const { return cfg_; }
  const DynGraph& graph() const { return graph_; }
  const std::vector<Theta>& thetas() const { return thetas_; }
  const std::vector<CoveragePair>& pairs() const { return pairs_; }
  const Seeder& seeder() const { return seeder_; }
  const RunStats& stats() const { return stats_; }
  double R() const { return dr_.R; }
  double log_n0_over_delta() const { return dr_.log_n0_over_delta; }
  // 16 R m0.
  double scan_budget() const;

  void process_update(const Update& u);
  void insert_node(NodeId v, FeatureVector features);
  void insert_edge(NodeId u, NodeId v);
  void remove_node(NodeId v);
  void remove_edge(NodeId u, NodeId v);
  void restart(RestartReason reason = RestartReason::kManual);

  // Solution for the current step, with per-theta values of the union.
  const SeedSolution& current_solution() const;
  // Union members that are no longer live (node removals do not repair).
  std::vector<NodeId> stale_seeds() const;

  // Graph, RR sets, coverage mirrors, seeder view and thread certificates.
  std::string audit() const;

 private:
  struct Event {
    NodeId node;
    NodeId root;
    std::uint32_t pair;
    HandleId handle;
  };
  void require_fully_dynamic(const char* what) const;
  void replay(std::vector<Event>& events, FindMode mode);
  void invalidate() { values_fresh_ = false; }
  bool scan_exhausted(const CoveragePair& p) const;

  RimeConfig cfg_;
  DynGraph graph_;
  std::vector<Theta> thetas_;
  std::vector<CoveragePair> pairs_;
  Seeder seeder_;
  RunStats stats_;
  DeltaR dr_;
  mutable bool values_fresh_ = false;
  mutable SeedSolution solution_cache_;
};

}  // namespace rime
