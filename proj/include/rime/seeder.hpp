#pragma once

// Robust seed finding: multiplicative weights over the l coverage estimators,
// each iteration solved by threshold-greedy threads (one per guess
// (1 + eps1)^i of the optimum). The seeder keeps its own event-fed view of the
// cv memberships so coverage becomes visible exactly as events are replayed.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rime/coverage.hpp"
#include "rime/netcore.hpp"

namespace rime {

enum class FindMode { kInsert, kRemove };

struct SeederConfig {
  std::size_t k = 10;
  double eps1 = 0.2;
  std::size_t T = 10;
  // Negative means sqrt(8 ln l / T).
  double eta = -1.0;
  bool track_gamma = true;
};

double default_eta(std::size_t l, std::size_t T);

// Number of greedy threads for a graph with n nodes: ceil(ln n / eps1) + 1.
std::size_t thread_count(std::size_t n, double eps1);

// Per seed position x (1-based), the per-estimator values of the prefix
// S_{1:x} when x was inserted, and when x + 1 was inserted (or restamped).
struct ValueRecord {
  std::vector<double> before;
  std::vector<double> after;
  std::vector<double> weights;  // objective weights of the accepting test
  bool forced = false;     // the unconditional re-add after a removal
  bool restamped = false;  // prefix changed by a removal; no certificate
};

struct GreedyThread {
  std::size_t index = 0;
  double target = 1.0;
  std::vector<NodeId> seeds;  // insertion order
  std::vector<ValueRecord> history;

  std::vector<char> in_seed;                        // by node id
  std::vector<std::vector<std::uint32_t>> cover;    // [pair][handle] seeds inside
  std::vector<std::size_t> covered;                 // [pair] handles with cover > 0
  std::vector<std::int32_t> gain;                   // [node * l + pair] uncovered handles
};

struct SeedSolution {
  std::vector<std::vector<NodeId>> candidates;  // S^(1..T)
  std::vector<NodeId> union_set;                // S_tc, ascending
  std::vector<double> per_theta_values;         // f_cv,i(S_tc), filled on read
  std::vector<std::vector<double>> candidate_values;  // f_cv,i(S^(j)) at selection
};

struct GammaTrace {
  std::size_t k = 1;
  // terms[x - 1] = F_{t_x}(S_{1:x}) - F_{t_{x+1}}(S_{1:x}).
  std::vector<double> terms;
};

enum class GammaForm { kIncremental, kFullyDynamic };

double gamma_of_trace(const GammaTrace& trace, double opt, GammaForm form);

struct GammaEvent {
  std::size_t event = 0;
  double incremental = 0.0;
  double fully_dynamic = 0.0;
};

// w[i] proportional to exp(-eta * cumulative_loss[i]).
std::vector<double> mwu_weights(std::span<const double> cumulative_loss, double eta);
void mwu_weights(std::span<const double> cumulative_loss, double eta, std::vector<double>& out);
// history[tau][i] holds the normalized loss of estimator i at iteration tau.
std::vector<double> mwu_weights(const std::vector<std::vector<double>>& history, double eta);

// F(S) = sum_i w[i] f_cv(pair_i, S), evaluated straight from the pairs.
class WeightedObjective {
 public:
  WeightedObjective(std::vector<double> weights, std::vector<const CoveragePair*> pairs);
  double operator()(std::span<const NodeId> S) const;
  std::size_t size() const { return weights_.size(); }

 private:
  std::vector<double> weights_;
  std::vector<const CoveragePair*> pairs_;
};

class Seeder {
 public:
  explicit Seeder(SeederConfig cfg = {});

  const SeederConfig& config() const { return cfg_; }

  // Fresh state for l estimators with scales n0 / K_i; thread count is
  // derived from n.
  void reset(std::vector<double> scales, std::size_t n);

  std::size_t num_pairs() const { return scales_.size(); }
  std::size_t num_threads() const { return threads_.size(); }
  const GreedyThread& thread(std::size_t t) const { return threads_[t]; }
  std::span<const double> scales() const { return scales_; }

  // Coverage bookkeeping; these never run a greedy step.
  void add_left(NodeId v);
  void remove_left(NodeId v);
  bool has_left(NodeId v) const { return v < left_.size() && left_[v]; }
  void add_membership(std::size_t pair, NodeId v, HandleId h);
  void remove_membership(std::size_t pair, NodeId v, HandleId h);
  // Handles of `pair` that currently list v.
  std::span<const HandleId> handles_of(std::size_t pair, NodeId v) const;
  std::span<const NodeId> members_of(std::size_t pair, HandleId h) const;

  // One greedy pass over all threads on persistent state; returns the index
  // of the thread with the largest weighted value (ties to the lower index).
  std::size_t greedy_insert(std::span<const double> weights, NodeId entry);
  std::size_t greedy_remove(std::span<const double> weights, NodeId removed);

  // T MWU iterations on top of the current state, then the uniform-weight
  // pass is kept as the new persistent state. n_live is the current node
  // count used to normalize losses.
  const SeedSolution& find_seeds(NodeId entry, FindMode mode, std::size_t n_live);
  // find_seeds without assembling the union; solution() builds it on demand.
  void search(NodeId entry, FindMode mode, std::size_t n_live);

  const SeedSolution& solution() const;
  void set_solution(SeedSolution s);
  std::size_t find_seeds_calls() const { return find_calls_; }

  // Per-estimator values f_cv,i(S) from the seeder's view.
  std::vector<double> evaluate(std::span<const NodeId> S) const;
  std::vector<double> thread_values(std::size_t t) const;
  double thread_value(std::size_t t, std::span<const double> weights) const;

  GammaTrace gamma_trace(std::size_t t, std::span<const double> weights) const;
  const std::vector<GammaEvent>& gamma_log() const { return gamma_log_; }

  // Counter consistency against the view, |S| <= k and replay of the
  // threshold certificates stored in each thread's history.
  std::string audit() const;
  // Same view check against a coverage graph's cv contents.
  std::string audit_view(std::size_t pair, const CoverageGraph& cv) const;

 private:
  struct JournalOp {
    std::uint32_t thread;
    bool added;
    NodeId node;
    std::uint32_t pos;
  };

  void ensure_node(NodeId v);
  void ensure_handle(std::size_t pair, HandleId h);
  void apply_add(GreedyThread& th, NodeId v);
  void apply_remove(GreedyThread& th, NodeId v);
  void add_seed(std::size_t t, NodeId v, bool forced);
  void remove_seed(std::size_t t, NodeId v);
  void touch_history(std::size_t t);
  void restamp(std::size_t t, std::size_t from);
  void rollback();
  std::vector<double> prefix_values(std::span<const NodeId> prefix) const;
  double weighted_gain(const GreedyThread& th, NodeId v) const;
  double weighted_value(const GreedyThread& th) const;
  bool argmax(const GreedyThread& th, NodeId* best, double* best_gain) const;
  void threshold_loop(std::size_t t, NodeId cand, bool have_cand);
  std::size_t best_thread(std::span<const double> weights) const;
  void set_weights(std::span<const double> weights);
  // Weight-free bounds taken once per find_seeds call. Every MWU iteration
  // starts from the same rolled-back state, so they hold for all of them.
  void prepare_bounds(NodeId entry, FindMode mode);
  void mark_changed(std::size_t t);

  SeederConfig cfg_;
  std::vector<double> scales_;
  std::vector<double> w_;
  std::vector<double> ws_;  // weights times scales for the current pass
  std::vector<GreedyThread> threads_;
  std::vector<char> left_;
  std::vector<std::vector<std::vector<NodeId>>> members_;    // [pair][handle]
  std::vector<std::vector<std::vector<HandleId>>> handles_;  // [pair][node]
  std::size_t node_cap_ = 0;

  bool journaling_ = false;
  std::vector<JournalOp> journal_;
  std::vector<std::pair<std::size_t, std::vector<ValueRecord>>> saved_history_;
  std::vector<char> history_saved_;
  bool bounds_active_ = false;
  std::vector<std::vector<double>> vcache_;  // [thread] values at prepare time
  std::vector<double> vmax_, vmin_;
  std::vector<char> skip_;     // threshold test cannot pass under any weights
  std::vector<char> changed_;  // modified since prepare / last rollback
  mutable std::vector<std::vector<std::uint32_t>> stamp_;
  mutable std::uint32_t epoch_ = 0;

  mutable SeedSolution solution_;
  mutable bool union_stale_ = false;
  std::vector<double> cum_, w_buf_;
  // Coverage or seed changes bump the version. A call that changed nothing
  // is repeated verbatim when the state and n_live are the same and no
  // threshold test can pass.
  std::uint64_t version_ = 0;
  std::uint64_t last_version_ = ~0ull;
  std::size_t last_n_live_ = 0;
  bool last_clean_ = false;
  std::size_t find_calls_ = 0;
  std::vector<GammaEvent> gamma_log_;
};

}  // namespace rime
