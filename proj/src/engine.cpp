#include "rime/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rime/errors.hpp"

namespace rime {

namespace {

constexpr std::uint64_t kThetaStream = 0x7468657461ull;

std::uint64_t pair_stream(std::size_t index, std::uint64_t copy) {
  return (static_cast<std::uint64_t>(index) << 8) | copy;
}

}  // namespace

std::string to_string(EngineMode mode) {
  return mode == EngineMode::kIncremental ? "incremental" : "fully_dynamic";
}

EngineMode parse_engine_mode(const std::string& name) {
  if (name == "incremental") return EngineMode::kIncremental;
  if (name == "fully_dynamic" || name == "fully-dynamic") return EngineMode::kFullyDynamic;
  throw ConfigError("unknown mode '" + name + "'");
}

std::string to_string(RestartReason reason) {
  switch (reason) {
    case RestartReason::kInitial:
      return "initial";
    case RestartReason::kNodesDoubled:
      return "nodes_doubled";
    case RestartReason::kEdgesDoubled:
      return "edges_doubled";
    case RestartReason::kNodesHalved:
      return "nodes_halved";
    case RestartReason::kEdgesHalved:
      return "edges_halved";
    case RestartReason::kScanBudget:
      return "scan_budget";
    case RestartReason::kManual:
      return "manual";
  }
  return "unknown";
}

void RimeConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(eps1 > 0 && eps1 < 1)) throw ConfigError("eps1 must lie in (0, 1)");
  if (!(eps2 > 0 && eps2 < 1)) throw ConfigError("eps2 must lie in (0, 1)");
  if (!(delta1 > 0 && delta1 < 1)) throw ConfigError("delta1 must lie in (0, 1)");
  if (!(delta2 > 0 && delta2 < 1)) throw ConfigError("delta2 must lie in (0, 1)");
  if (!(B >= 0)) throw ConfigError("B must be non-negative");
  if (d == 0 || d % 2 != 0) throw ConfigError("d must be a positive even integer");
  if (!center.empty() && center.size() != d) throw ConfigError("center must have length d");
  if (l < 1) throw ConfigError("l must be at least 1");
  if (T < 1) throw ConfigError("T must be at least 1");
  if (R_override && !(*R_override > 0)) throw ConfigError("R_override must be positive");
}

HyperparamSpace RimeConfig::space() const {
  HyperparamSpace s;
  s.center = center.empty() ? std::vector<double>(d, 0.0) : center;
  s.radius = B;
  return s;
}

DeltaR compute_delta_and_R(const RimeConfig& cfg, std::size_t n0, std::size_t T, std::size_t k) {
  if (!(cfg.delta1 > 0)) throw ConfigError("delta1 must be positive");
  if (n0 < 1) throw PreconditionError("compute_delta_and_R: n0 must be at least 1");
  if (k < 1) throw ConfigError("k must be at least 1");
  const double n = static_cast<double>(n0);
  const double kk = static_cast<double>(k);
  DeltaR out;
  out.log_n0_over_delta = (12.0 * n * n / (kk * kk * kk)) *
                          (std::log(16.0) + static_cast<double>(T) * kk * std::log(2.0 * n) -
                           std::log(cfg.delta1));
  out.R_theory = kk / (cfg.eps1 * cfg.eps1) * out.log_n0_over_delta;
  out.R = cfg.R_override ? *cfg.R_override : out.R_theory;
  return out;
}

double log_theory_l_bound(std::size_t d, double B, std::size_t m, std::size_t n, double eps2,
                          double delta2) {
  const double base = 2.0 * B * static_cast<double>(d) * static_cast<double>(m) *
                      static_cast<double>(n) / eps2;
  return std::log(static_cast<double>(d)) + static_cast<double>(d) * std::log(base) +
         std::log(std::log(base / delta2));
}

double theory_T_bound(std::size_t l, double eps2) {
  return 2.0 * std::log(static_cast<double>(l)) / (eps2 * eps2);
}

std::vector<Theta> config_thetas(const RimeConfig& cfg) {
  Rng theta_rng(Rng::derive(cfg.seed, kThetaStream));
  return sample_hyperparameters(cfg.space(), cfg.l, theta_rng);
}

RimeEngine::RimeEngine(RimeConfig cfg, DynGraph initial)
    : cfg_(std::move(cfg)),
      graph_(std::move(initial)),
      seeder_(SeederConfig{cfg_.k, cfg_.eps1, cfg_.T, -1.0, cfg_.track_gamma}) {
  cfg_.validate();
  if (graph_.edge_dim() != cfg_.d) {
    throw DimensionError("graph edge features have length " + std::to_string(graph_.edge_dim()) +
                         ", config d = " + std::to_string(cfg_.d));
  }
  thetas_ = config_thetas(cfg_);
  restart(RestartReason::kInitial);
}

double RimeEngine::scan_budget() const {
  return 16.0 * dr_.R * static_cast<double>(graph_.m0());
}

bool RimeEngine::scan_exhausted(const CoveragePair& p) const {
  return static_cast<double>(p.est_edges_scanned_this_stage) >= scan_budget();
}

void RimeEngine::restart(RestartReason reason) {
  graph_.mark_snapshot();
  const std::size_t n0 = graph_.num_nodes();
  const std::size_t m0 = graph_.num_edges();
  dr_ = compute_delta_and_R(cfg_, std::max<std::size_t>(n0, 1), cfg_.T, cfg_.k);

  ++stats_.restarts;
  if (reason == RestartReason::kScanBudget) {
    ++stats_.stages;
    ++stats_.stages_this_phase;
  } else if (reason != RestartReason::kInitial && reason != RestartReason::kManual) {
    ++stats_.phases;
    stats_.stages_this_phase = 0;
  }
  stats_.restart_log.push_back({stats_.updates, reason, n0, m0});

  pairs_.clear();
  pairs_.reserve(cfg_.l);
  RRSampler sampler;
  std::vector<double> scales;
  for (std::size_t i = 0; i < cfg_.l; ++i) {
    EdgeProbFn prob = ThetaProbability(graph_, cfg_.model, thetas_[i]);
    RateEstimate rate;
    if (n0 > 0) {
      Rng rate_rng(Rng::derive(cfg_.seed, pair_stream(i, 0)));
      rate = estimate_generation_rate(graph_, prob, dr_.R, m0, rate_rng, &sampler);
    }
    pairs_.push_back(build_coverage_pair(graph_, i, thetas_[i], std::move(prob), rate,
                                         Rng(Rng::derive(cfg_.seed, pair_stream(i, 1))),
                                         Rng(Rng::derive(cfg_.seed, pair_stream(i, 2))),
                                         &sampler));
    scales.push_back(pairs_.back().scale());
  }

  seeder_.reset(std::move(scales), n0);
  for (NodeId v : graph_.sorted_nodes()) seeder_.add_left(v);
  std::vector<Event> events;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& cv = pairs_[i].cv;
    for (HandleId h = 0; h < cv.handle_slots(); ++h) {
      const auto& rr = cv.rr(h);
      for (NodeId u : rr.members()) {
        events.push_back({u, rr.root(), static_cast<std::uint32_t>(i), h});
      }
    }
  }
  replay(events, FindMode::kInsert);
  invalidate();
}

void RimeEngine::replay(std::vector<Event>& events, FindMode mode) {
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.node != b.node) return a.node < b.node;
    if (a.root != b.root) return a.root < b.root;
    if (a.pair != b.pair) return a.pair < b.pair;
    return a.handle < b.handle;
  });
  stats_.bipartite_events += events.size();
  for (std::size_t lo = 0; lo < events.size();) {
    std::size_t hi = lo;
    while (hi < events.size() && events[hi].node == events[lo].node &&
           events[hi].root == events[lo].root) {
      const auto& e = events[hi];
      if (mode == FindMode::kInsert) {
        seeder_.add_membership(e.pair, e.node, e.handle);
      } else {
        seeder_.remove_membership(e.pair, e.node, e.handle);
      }
      ++hi;
    }
    seeder_.search(events[lo].node, mode, graph_.num_nodes());
    ++stats_.find_seeds_calls;
    lo = hi;
  }
}

void RimeEngine::require_fully_dynamic(const char* what) const {
  if (cfg_.mode != EngineMode::kFullyDynamic) {
    throw ModeError(std::string(what) + " requires fully_dynamic mode");
  }
}

void RimeEngine::insert_node(NodeId v, FeatureVector features) {
  graph_.add_node(v, std::move(features));
  ++stats_.node_inserts;
  invalidate();
  if (graph_.num_nodes() >= 2 * graph_.n0()) {
    restart(RestartReason::kNodesDoubled);
    return;
  }
  seeder_.add_left(v);
  for (auto& pair : pairs_) {
    const auto delta = on_insert_node(pair, v);
    for (const auto& m : delta.added) {
      seeder_.add_membership(pair.index, m.node, m.handle);
      ++stats_.bipartite_events;
    }
  }
}

void RimeEngine::insert_edge(NodeId u, NodeId v) {
  graph_.add_edge(u, v);
  ++stats_.edge_inserts;
  invalidate();
  if (graph_.num_edges() >= 2 * graph_.m0()) {
    restart(RestartReason::kEdgesDoubled);
    return;
  }
  const Edge e{u, v};
  for (auto& pair : pairs_) {
    stats_.est_edges_scanned_total += est_insert_edge(pair, graph_, e);
    if (scan_exhausted(pair)) {
      restart(RestartReason::kScanBudget);
      return;
    }
  }
  std::vector<Event> events;
  for (auto& pair : pairs_) {
    const auto delta = cv_insert_edge(pair, graph_, e);
    for (const auto& m : delta.added) {
      events.push_back({m.node, pair.cv.rr(m.handle).root(),
                        static_cast<std::uint32_t>(pair.index), m.handle});
    }
  }
  replay(events, FindMode::kInsert);
}

void RimeEngine::remove_node(NodeId v) {
  require_fully_dynamic("remove_node");
  graph_.validate(RemoveNode{v});
  const auto out = graph_.out_neighbors(v);
  const std::vector<NodeId> former_out(out.begin(), out.end());
  graph_.remove_node(v);
  ++stats_.node_removals;
  invalidate();
  if (2 * graph_.num_nodes() <= graph_.n0()) {
    restart(RestartReason::kNodesHalved);
    return;
  }
  for (auto& pair : pairs_) {
    const auto delta = on_remove_node(pair, v, former_out);
    for (const auto& m : delta.removed) {
      seeder_.remove_membership(pair.index, m.node, m.handle);
      ++stats_.bipartite_events;
    }
  }
  seeder_.remove_left(v);
}

void RimeEngine::remove_edge(NodeId u, NodeId v) {
  require_fully_dynamic("remove_edge");
  graph_.remove_edge(u, v);
  ++stats_.edge_removals;
  invalidate();
  if (2 * graph_.num_edges() <= graph_.m0()) {
    restart(RestartReason::kEdgesHalved);
    return;
  }
  const Edge e{u, v};
  for (auto& pair : pairs_) {
    stats_.est_edges_scanned_total += est_remove_edge(pair, e);
    if (scan_exhausted(pair)) {
      restart(RestartReason::kScanBudget);
      return;
    }
  }
  std::vector<Event> events;
  for (auto& pair : pairs_) {
    const auto delta = cv_remove_edge(pair, e);
    for (const auto& m : delta.removed) {
      events.push_back({m.node, pair.cv.rr(m.handle).root(),
                        static_cast<std::uint32_t>(pair.index), m.handle});
    }
  }
  replay(events, FindMode::kRemove);
}

void RimeEngine::process_update(const Update& update) {
  if (is_removal(update)) require_fully_dynamic("removal update");
  graph_.validate(update);
  const auto start = std::chrono::steady_clock::now();
  std::visit(
      [&](const auto& up) {
        using T = std::decay_t<decltype(up)>;
        if constexpr (std::is_same_v<T, InsertNode>) {
          insert_node(up.id, up.features);
        } else if constexpr (std::is_same_v<T, InsertEdge>) {
          insert_edge(up.src, up.dst);
        } else if constexpr (std::is_same_v<T, RemoveNode>) {
          remove_node(up.id);
        } else {
          remove_edge(up.src, up.dst);
        }
      },
      update);
  ++stats_.updates;
  const auto stop = std::chrono::steady_clock::now();
  stats_.update_ns.push_back(static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count()));
}

const SeedSolution& RimeEngine::current_solution() const {
  if (!values_fresh_ || solution_cache_.union_set != seeder_.solution().union_set ||
      solution_cache_.candidates != seeder_.solution().candidates) {
    solution_cache_ = seeder_.solution();
    solution_cache_.per_theta_values = seeder_.evaluate(solution_cache_.union_set);
    values_fresh_ = true;
  }
  return solution_cache_;
}

std::vector<NodeId> RimeEngine::stale_seeds() const {
  std::vector<NodeId> out;
  for (NodeId v : seeder_.solution().union_set) {
    if (!graph_.has_node(v)) out.push_back(v);
  }
  return out;
}

std::string RimeEngine::audit() const {
  if (pairs_.size() != cfg_.l) return "pair count differs from l";
  for (const auto& pair : pairs_) {
    const std::string tag = "pair " + std::to_string(pair.index) + " ";
    if (auto msg = pair.est.audit(&graph_); !msg.empty()) return tag + "est: " + msg;
    if (auto msg = pair.cv.audit(&graph_); !msg.empty()) return tag + "cv: " + msg;
    if (auto msg = seeder_.audit_view(pair.index, pair.cv); !msg.empty()) return msg;
  }
  for (NodeId v = 0; v < graph_.id_capacity(); ++v) {
    if (graph_.has_node(v) != seeder_.has_left(v)) {
      return "seeder left side disagrees with graph at " + std::to_string(v);
    }
  }
  if (auto msg = seeder_.audit(); !msg.empty()) return "seeder: " + msg;
  return {};
}

}  // namespace rime
