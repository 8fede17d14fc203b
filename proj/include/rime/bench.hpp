#pragma once

// Synthetic instances, update streams and the benchmark driver that replays a
// stream through RIME or a from-scratch baseline.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rime/baselines.hpp"
#include "rime/engine.hpp"
#include "rime/netcore.hpp"
#include "rime/rng.hpp"

namespace rime {

// n0 nodes with uniform [-1, 1] features and m0 distinct non-loop arcs.
DynGraph gen_synthetic(std::size_t n0, std::size_t m0, std::size_t feat_dim, Rng& rng);

enum class StreamSetting { kIncremental, kFullyDynamic };

std::string to_string(StreamSetting s);
StreamSetting parse_stream_setting(const std::string& name);

struct StreamSpec {
  std::size_t count = 0;
  StreamSetting setting = StreamSetting::kIncremental;
  // Weights for +n, +e, -n, -e. Empty-weight kinds are never drawn.
  std::array<double, 4> mix{0.5, 0.5, 0.0, 0.0};

  static StreamSpec defaults(StreamSetting setting, std::size_t count);
  void validate() const;
};

// Every update is valid against the graph as evolved by the earlier ones.
// Kinds that are impossible at a step (nothing to remove, graph complete) are
// dropped from that step's draw.
std::vector<Update> gen_stream(const DynGraph& g, const StreamSpec& spec, Rng& rng);

struct TraceRow {
  std::size_t step = 0;
  std::uint64_t cum_ns = 0;
  std::optional<double> min_spread;
  std::size_t restarts = 0;
};

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);
void write_gamma_csv(std::ostream& os, const std::vector<GammaEvent>& events);

struct ExperimentConfig {
  std::string algo = "rime";  // rime, base, hiro or lugreedy
  RimeConfig rime;
  std::size_t root_count = 0;  // HIRO
  std::size_t eval_runs = 10000;
  std::size_t stride = 50;  // 0 disables intermediate evaluation
  bool evaluate = true;     // the final row is evaluated when set
};

struct ExperimentResult {
  std::vector<TraceRow> trace;
  std::vector<NodeId> final_seeds;
  std::optional<double> final_min_spread;
  std::size_t restarts = 0;
  std::uint64_t total_ns = 0;
  std::optional<RunStats> stats;  // RIME only
  std::vector<GammaEvent> gamma;
  std::vector<Theta> thetas;
};

// Baselines inherit k, T, model and the hyperparameter space from cfg.rime.
BaselineConfig baseline_config(const ExperimentConfig& cfg);

// Evaluation time is excluded from cum_ns. Row 0 covers the initial build.
ExperimentResult run_experiment(const DynGraph& g0, const std::vector<Update>& stream,
                                const ExperimentConfig& cfg);

std::string summary_json(const ExperimentResult& r, const ExperimentConfig& cfg);

}  // namespace rime
