#include "rime/seeder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rime/errors.hpp"

namespace rime {

double default_eta(std::size_t l, std::size_t T) {
  if (l <= 1 || T == 0) return 0.0;
  return std::sqrt(8.0 * std::log(static_cast<double>(l)) / static_cast<double>(T));
}

std::size_t thread_count(std::size_t n, double eps1) {
  if (!(eps1 > 0)) throw ConfigError("thread_count: eps1 must be positive");
  if (n <= 1) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n)) / eps1)) + 1;
}

double gamma_of_trace(const GammaTrace& trace, double opt, GammaForm form) {
  if (!(opt > 0)) throw PreconditionError("gamma_of_trace: OPT must be positive");
  if (trace.k == 0) throw PreconditionError("gamma_of_trace: k must be positive");
  const std::size_t size = trace.terms.size();
  if (size == 0) return 0.0;
  if (size > trace.k) throw PreconditionError("gamma_of_trace: more terms than k");
  const double keep = 1.0 - 1.0 / static_cast<double>(trace.k);
  double best = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t x = 1; x <= size; ++x) {
    const double term =
        trace.terms[x - 1] / opt * std::pow(keep, static_cast<double>(trace.k - x));
    best = std::max(best, term);
    sum += term;
  }
  return form == GammaForm::kIncremental ? best : sum;
}

void mwu_weights(std::span<const double> cumulative_loss, double eta, std::vector<double>& w) {
  const std::size_t l = cumulative_loss.size();
  w.assign(l, 1.0 / static_cast<double>(std::max<std::size_t>(l, 1)));
  if (l == 0 || eta == 0.0) return;
  const double lo = *std::min_element(cumulative_loss.begin(), cumulative_loss.end());
  double total = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    w[i] = std::exp(-eta * (cumulative_loss[i] - lo));
    total += w[i];
  }
  for (double& x : w) x /= total;
}

std::vector<double> mwu_weights(std::span<const double> cumulative_loss, double eta) {
  std::vector<double> w;
  mwu_weights(cumulative_loss, eta, w);
  return w;
}

std::vector<double> mwu_weights(const std::vector<std::vector<double>>& history, double eta) {
  if (history.empty()) return {};
  std::vector<double> cum(history.front().size(), 0.0);
  for (const auto& row : history) {
    if (row.size() != cum.size()) throw DimensionError("mwu_weights: ragged history");
    for (std::size_t i = 0; i < row.size(); ++i) cum[i] += row[i];
  }
  return mwu_weights(cum, eta);
}

WeightedObjective::WeightedObjective(std::vector<double> weights,
                                     std::vector<const CoveragePair*> pairs)
    : weights_(std::move(weights)), pairs_(std::move(pairs)) {
  if (weights_.size() != pairs_.size()) {
    throw DimensionError("weighted objective: one weight per pair required");
  }
}

double WeightedObjective::operator()(std::span<const NodeId> S) const {
  double total = 0.0;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (weights_[i] != 0.0) total += weights_[i] * f_cv(*pairs_[i], S);
  }
  return total;
}

Seeder::Seeder(SeederConfig cfg) : cfg_(cfg) {
  if (cfg_.k == 0) throw ConfigError("seeder: k must be at least 1");
  if (!(cfg_.eps1 > 0 && cfg_.eps1 < 1)) throw ConfigError("seeder: eps1 must lie in (0, 1)");
  if (cfg_.T == 0) throw ConfigError("seeder: T must be at least 1");
}

void Seeder::reset(std::vector<double> scales, std::size_t n) {
  scales_ = std::move(scales);
  const std::size_t l = scales_.size();
  ws_.assign(l, 0.0);
  threads_.clear();
  const std::size_t count = thread_count(n, cfg_.eps1);
  threads_.resize(count);
  for (std::size_t t = 0; t < count; ++t) {
    auto& th = threads_[t];
    th.index = t;
    th.target = std::pow(1.0 + cfg_.eps1, static_cast<double>(t));
    th.cover.assign(l, {});
    th.covered.assign(l, 0);
  }
  left_.clear();
  members_.assign(l, {});
  handles_.assign(l, {});
  stamp_.assign(l, {});
  node_cap_ = 0;
  journal_.clear();
  saved_history_.clear();
  history_saved_.assign(count, 0);
  journaling_ = false;
  solution_ = {};
  union_stale_ = false;
  last_version_ = ~0ull;
  last_clean_ = false;
}

void Seeder::ensure_node(NodeId v) {
  if (v < node_cap_) return;
  const std::size_t cap = std::max<std::size_t>(static_cast<std::size_t>(v) + 1, node_cap_ * 2);
  const std::size_t l = scales_.size();
  left_.resize(cap, 0);
  for (auto& per_pair : handles_) per_pair.resize(cap);
  for (auto& th : threads_) {
    th.in_seed.resize(cap, 0);
    th.gain.resize(cap * l, 0);
  }
  node_cap_ = cap;
}

void Seeder::ensure_handle(std::size_t pair, HandleId h) {
  auto& list = members_[pair];
  if (h < list.size()) return;
  const std::size_t size = std::max<std::size_t>(static_cast<std::size_t>(h) + 1, list.size() * 2);
  list.resize(size);
  for (auto& th : threads_) th.cover[pair].resize(size, 0);
}

void Seeder::add_left(NodeId v) {
  ensure_node(v);
  left_[v] = 1;
}

void Seeder::remove_left(NodeId v) {
  if (v < left_.size()) left_[v] = 0;
}

std::span<const HandleId> Seeder::handles_of(std::size_t pair, NodeId v) const {
  if (v >= node_cap_) return {};
  return handles_[pair][v];
}

std::span<const NodeId> Seeder::members_of(std::size_t pair, HandleId h) const {
  if (h >= members_[pair].size()) return {};
  return members_[pair][h];
}

void Seeder::add_membership(std::size_t pair, NodeId v, HandleId h) {
  ensure_node(v);
  ensure_handle(pair, h);
  auto& mem = members_[pair][h];
  mem.push_back(v);
  handles_[pair][v].push_back(h);
  const std::size_t l = scales_.size();
  for (auto& th : threads_) {
    auto& c = th.cover[pair][h];
    if (th.in_seed[v]) {
      if (c == 0) {
        ++version_;
        ++th.covered[pair];
        for (std::size_t j = 0; j + 1 < mem.size(); ++j) --th.gain[mem[j] * l + pair];
      }
      ++c;
    } else if (c == 0) {
      ++th.gain[static_cast<std::size_t>(v) * l + pair];
    }
  }
}

void Seeder::remove_membership(std::size_t pair, NodeId v, HandleId h) {
  auto& mem = members_[pair][h];
  auto it = std::find(mem.begin(), mem.end(), v);
  if (it == mem.end()) throw ContractError("seeder: removing unknown membership");
  *it = mem.back();
  mem.pop_back();
  auto& hs = handles_[pair][v];
  auto jt = std::find(hs.begin(), hs.end(), h);
  *jt = hs.back();
  hs.pop_back();
  const std::size_t l = scales_.size();
  for (auto& th : threads_) {
    auto& c = th.cover[pair][h];
    if (th.in_seed[v]) {
      if (--c == 0) {
        ++version_;
        --th.covered[pair];
        for (NodeId x : mem) ++th.gain[static_cast<std::size_t>(x) * l + pair];
      }
    } else if (c == 0) {
      --th.gain[static_cast<std::size_t>(v) * l + pair];
    }
  }
}

void Seeder::apply_add(GreedyThread& th, NodeId v) {
  ++version_;
  const std::size_t l = scales_.size();
  th.in_seed[v] = 1;
  for (std::size_t i = 0; i < l; ++i) {
    for (HandleId h : handles_[i][v]) {
      if (th.cover[i][h]++ == 0) {
        ++th.covered[i];
        for (NodeId x : members_[i][h]) --th.gain[static_cast<std::size_t>(x) * l + i];
      }
    }
  }
}

void Seeder::apply_remove(GreedyThread& th, NodeId v) {
  ++version_;
  const std::size_t l = scales_.size();
  th.in_seed[v] = 0;
  for (std::size_t i = 0; i < l; ++i) {
    for (HandleId h : handles_[i][v]) {
      if (--th.cover[i][h] == 0) {
        --th.covered[i];
        for (NodeId x : members_[i][h]) ++th.gain[static_cast<std::size_t>(x) * l + i];
      }
    }
  }
}

void Seeder::touch_history(std::size_t t) {
  if (!journaling_ || history_saved_[t]) return;
  history_saved_[t] = 1;
  saved_history_.emplace_back(t, threads_[t].history);
}

void Seeder::mark_changed(std::size_t t) {
  if (bounds_active_) changed_[t] = 1;
}

void Seeder::add_seed(std::size_t t, NodeId v, bool forced) {
  touch_history(t);
  mark_changed(t);
  auto& th = threads_[t];
  if (!th.history.empty()) th.history.back().after = thread_values(t);
  apply_add(th, v);
  th.seeds.push_back(v);
  ValueRecord rec;
  rec.before = thread_values(t);
  rec.after = rec.before;
  rec.forced = forced;
  if (!forced) rec.weights = w_;
  th.history.push_back(std::move(rec));
  if (journaling_) {
    journal_.push_back({static_cast<std::uint32_t>(t), true, v,
                        static_cast<std::uint32_t>(th.seeds.size() - 1)});
  }
}

void Seeder::remove_seed(std::size_t t, NodeId v) {
  touch_history(t);
  mark_changed(t);
  auto& th = threads_[t];
  auto it = std::find(th.seeds.begin(), th.seeds.end(), v);
  const auto pos = static_cast<std::size_t>(it - th.seeds.begin());
  apply_remove(th, v);
  th.seeds.erase(it);
  th.history.erase(th.history.begin() + static_cast<std::ptrdiff_t>(pos));
  restamp(t, pos);
  if (journaling_) {
    journal_.push_back({static_cast<std::uint32_t>(t), false, v, static_cast<std::uint32_t>(pos)});
  }
}

void Seeder::restamp(std::size_t t, std::size_t from) {
  auto& th = threads_[t];
  if (th.seeds.empty()) return;
  const std::size_t l = scales_.size();
  if (++epoch_ == 0) {
    for (auto& s : stamp_) std::fill(s.begin(), s.end(), 0);
    epoch_ = 1;
  }
  std::vector<std::size_t> count(l, 0);
  for (std::size_t i = 0; i < l; ++i) {
    if (stamp_[i].size() < members_[i].size()) stamp_[i].resize(members_[i].size(), 0);
  }
  const std::size_t first = from == 0 ? 0 : from - 1;
  for (std::size_t s = 0; s < th.seeds.size(); ++s) {
    const NodeId v = th.seeds[s];
    for (std::size_t i = 0; i < l; ++i) {
      for (HandleId h : handles_[i][v]) {
        if (stamp_[i][h] != epoch_) {
          stamp_[i][h] = epoch_;
          ++count[i];
        }
      }
    }
    if (s < first) continue;
    std::vector<double> vals(l);
    for (std::size_t i = 0; i < l; ++i) vals[i] = scales_[i] * static_cast<double>(count[i]);
    auto& rec = th.history[s];
    rec.after = vals;
    if (s >= from) {
      rec.before = std::move(vals);
      rec.restamped = true;
    }
  }
}

void Seeder::rollback() {
  for (auto it = journal_.rbegin(); it != journal_.rend(); ++it) {
    auto& th = threads_[it->thread];
    if (it->added) {
      th.seeds.pop_back();
      apply_remove(th, it->node);
    } else {
      apply_add(th, it->node);
      th.seeds.insert(th.seeds.begin() + it->pos, it->node);
    }
  }
  for (auto& [t, hist] : saved_history_) {
    threads_[t].history = std::move(hist);
    history_saved_[t] = 0;
  }
  journal_.clear();
  saved_history_.clear();
  std::fill(changed_.begin(), changed_.end(), 0);
}

std::vector<double> Seeder::prefix_values(std::span<const NodeId> prefix) const {
  const std::size_t l = scales_.size();
  if (++epoch_ == 0) {
    for (auto& s : stamp_) std::fill(s.begin(), s.end(), 0);
    epoch_ = 1;
  }
  std::vector<double> out(l, 0.0);
  for (std::size_t i = 0; i < l; ++i) {
    if (stamp_[i].size() < members_[i].size()) stamp_[i].resize(members_[i].size(), 0);
    std::size_t count = 0;
    for (NodeId v : prefix) {
      if (v >= node_cap_) continue;
      for (HandleId h : handles_[i][v]) {
        if (stamp_[i][h] != epoch_) {
          stamp_[i][h] = epoch_;
          ++count;
        }
      }
    }
    out[i] = scales_[i] * static_cast<double>(count);
  }
  return out;
}

std::vector<double> Seeder::evaluate(std::span<const NodeId> S) const { return prefix_values(S); }

std::vector<double> Seeder::thread_values(std::size_t t) const {
  const auto& th = threads_[t];
  std::vector<double> out(scales_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = scales_[i] * static_cast<double>(th.covered[i]);
  }
  return out;
}

double Seeder::thread_value(std::size_t t, std::span<const double> weights) const {
  const auto& th = threads_[t];
  double total = 0.0;
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    total += weights[i] * (scales_[i] * static_cast<double>(th.covered[i]));
  }
  return total;
}

void Seeder::set_weights(std::span<const double> weights) {
  if (weights.size() != scales_.size()) throw DimensionError("seeder: one weight per pair");
  w_.assign(weights.begin(), weights.end());
  for (std::size_t i = 0; i < ws_.size(); ++i) ws_[i] = weights[i] * scales_[i];
}

double Seeder::weighted_gain(const GreedyThread& th, NodeId v) const {
  const std::size_t l = scales_.size();
  const std::int32_t* g = th.gain.data() + static_cast<std::size_t>(v) * l;
  double total = 0.0;
  for (std::size_t i = 0; i < l; ++i) total += ws_[i] * g[i];
  return total;
}

double Seeder::weighted_value(const GreedyThread& th) const {
  double total = 0.0;
  for (std::size_t i = 0; i < ws_.size(); ++i) total += ws_[i] * static_cast<double>(th.covered[i]);
  return total;
}

bool Seeder::argmax(const GreedyThread& th, NodeId* best, double* best_gain) const {
  bool found = false;
  double top = 0.0;
  NodeId arg = 0;
  for (NodeId v = 0; v < node_cap_; ++v) {
    if (!left_[v] || th.in_seed[v]) continue;
    const double g = weighted_gain(th, v);
    if (!found || g > top) {
      found = true;
      top = g;
      arg = v;
    }
  }
  *best = arg;
  *best_gain = top;
  return found;
}

void Seeder::threshold_loop(std::size_t t, NodeId cand, bool have_cand) {
  auto& th = threads_[t];
  const auto k = static_cast<double>(cfg_.k);
  if (th.seeds.size() >= cfg_.k) return;
  double F = weighted_value(th);
  bool valid = false;
  double g = 0.0;
  if (have_cand) {
    valid = has_left(cand) && !th.in_seed[cand];
    if (valid) g = weighted_gain(th, cand);
  } else {
    if (!argmax(th, &cand, &g)) return;
    valid = true;
  }
  while (th.seeds.size() < cfg_.k && g >= (th.target - F) / k) {
    if (valid) {
      add_seed(t, cand, false);
      F = weighted_value(th);
      if (th.seeds.size() >= cfg_.k) break;
    }
    if (!argmax(th, &cand, &g)) break;
    valid = true;
  }
}

std::size_t Seeder::best_thread(std::span<const double> weights) const {
  // A thread whose largest per-pair value is below some thread's smallest
  // cannot win under weights on the simplex.
  double floor = -std::numeric_limits<double>::infinity();
  if (bounds_active_) {
    for (std::size_t t = 0; t < threads_.size(); ++t) {
      if (changed_[t]) continue;
      floor = std::max(floor, vmin_[t]);
    }
    floor -= 1e-9 * std::max(1.0, std::abs(floor));
  }
  std::size_t best = 0;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < threads_.size(); ++t) {
    if (bounds_active_ && !changed_[t] && vmax_[t] < floor) continue;
    double v = 0.0;
    if (bounds_active_ && !changed_[t]) {
      const auto& vc = vcache_[t];
      for (std::size_t i = 0; i < vc.size(); ++i) v += weights[i] * vc[i];
    } else {
      v = thread_value(t, weights);
    }
    if (v > top) {
      top = v;
      best = t;
    }
  }
  return best;
}

std::size_t Seeder::greedy_insert(std::span<const double> weights, NodeId entry) {
  set_weights(weights);
  for (std::size_t t = 0; t < threads_.size(); ++t) {
    if (bounds_active_ && skip_[t] && !changed_[t]) continue;
    threshold_loop(t, entry, true);
  }
  return best_thread(weights);
}

std::size_t Seeder::greedy_remove(std::span<const double> weights, NodeId removed) {
  set_weights(weights);
  for (std::size_t t = 0; t < threads_.size(); ++t) {
    auto& th = threads_[t];
    if (removed < node_cap_ && th.in_seed[removed]) {
      remove_seed(t, removed);
      NodeId best = 0;
      double g = 0.0;
      if (th.seeds.size() < cfg_.k && argmax(th, &best, &g)) add_seed(t, best, true);
    }
    threshold_loop(t, 0, false);
  }
  return best_thread(weights);
}

void Seeder::prepare_bounds(NodeId entry, FindMode mode) {
  const std::size_t count = threads_.size();
  const std::size_t l = scales_.size();
  vcache_.resize(count);
  vmax_.assign(count, 0.0);
  vmin_.assign(count, 0.0);
  skip_.assign(count, 0);
  changed_.assign(count, 0);
  const double k = static_cast<double>(cfg_.k);
  for (std::size_t t = 0; t < count; ++t) {
    const auto& th = threads_[t];
    auto& vc = vcache_[t];
    vc.resize(l);
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < l; ++i) {
      vc[i] = scales_[i] * static_cast<double>(th.covered[i]);
      hi = std::max(hi, vc[i]);
      lo = std::min(lo, vc[i]);
    }
    vmax_[t] = hi;
    vmin_[t] = lo;
    if (mode != FindMode::kInsert) continue;
    if (th.seeds.size() >= cfg_.k) {
      skip_[t] = 1;
      continue;
    }
    // F_w <= hi and gain_w <= max_i scale_i * gain_i for any simplex weights.
    double gain_hi = 0.0;
    if (has_left(entry) && !th.in_seed[entry]) {
      const std::int32_t* g = th.gain.data() + static_cast<std::size_t>(entry) * l;
      for (std::size_t i = 0; i < l; ++i) gain_hi = std::max(gain_hi, scales_[i] * g[i]);
    }
    const double need = (th.target - hi) / k;
    skip_[t] = gain_hi < need - 1e-9 * std::max(1.0, th.target) ? 1 : 0;
  }
  bounds_active_ = true;
}

GammaTrace Seeder::gamma_trace(std::size_t t, std::span<const double> weights) const {
  const auto& th = threads_[t];
  GammaTrace trace;
  trace.k = cfg_.k;
  const auto now = thread_values(t);
  for (std::size_t x = 0; x < th.seeds.size(); ++x) {
    const auto& rec = th.history[x];
    const auto& after = (x + 1 < th.seeds.size()) ? rec.after : now;
    double term = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) term += weights[i] * (rec.before[i] - after[i]);
    trace.terms.push_back(term);
  }
  return trace;
}

const SeedSolution& Seeder::find_seeds(NodeId entry, FindMode mode, std::size_t n_live) {
  search(entry, mode, n_live);
  return solution();
}

const SeedSolution& Seeder::solution() const {
  if (union_stale_) {
    auto& u = solution_.union_set;
    u.clear();
    for (const auto& c : solution_.candidates) u.insert(u.end(), c.begin(), c.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    union_stale_ = false;
  }
  return solution_;
}

void Seeder::set_solution(SeedSolution s) {
  solution_ = std::move(s);
  union_stale_ = false;
  last_version_ = ~0ull;
}

void Seeder::search(NodeId entry, FindMode mode, std::size_t n_live) {
  ++find_calls_;
  const std::size_t l = scales_.size();
  if (l == 0 || threads_.empty()) {
    solution_ = {};
    union_stale_ = false;
    return;
  }
  const double eta = cfg_.eta < 0 ? default_eta(l, cfg_.T) : cfg_.eta;
  const double norm = static_cast<double>(std::max<std::size_t>(n_live, 1));
  prepare_bounds(entry, mode);
  if (!cfg_.track_gamma && mode == FindMode::kInsert && last_clean_ &&
      version_ == last_version_ && n_live == last_n_live_ &&
      std::all_of(skip_.begin(), skip_.end(), [](char c) { return c != 0; })) {
    bounds_active_ = false;
    return;
  }
  const std::uint64_t start_version = version_;
  cum_.assign(l, 0.0);
  SeedSolution& sol = solution_;
  sol.candidates.resize(cfg_.T);
  sol.candidate_values.resize(cfg_.T);
  sol.per_theta_values.clear();
  GammaEvent ge{find_calls_ - 1, -std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  bool have_gamma = false;
  bool first_changed = false;
  bool any_changed = false;
  auto run = [&](std::span<const double> w) {
    return mode == FindMode::kInsert ? greedy_insert(w, entry) : greedy_remove(w, entry);
  };
  for (std::size_t j = 0; j < cfg_.T; ++j) {
    mwu_weights(cum_, eta, w_buf_);
    const auto& w = w_buf_;
    journaling_ = cfg_.T > 1;
    const std::size_t best = run(w);
    any_changed = any_changed || (journaling_ ? !journal_.empty() : version_ != start_version);
    if (j == 0) first_changed = !journal_.empty();
    sol.candidates[j].assign(threads_[best].seeds.begin(), threads_[best].seeds.end());
    auto& vals = sol.candidate_values[j];
    vals.resize(l);
    const auto& th = threads_[best];
    for (std::size_t i = 0; i < l; ++i) vals[i] = scales_[i] * static_cast<double>(th.covered[i]);
    if (cfg_.track_gamma) {
      const double opt = thread_value(best, w);
      if (opt > 0) {
        const auto trace = gamma_trace(best, w);
        ge.incremental = std::max(ge.incremental, gamma_of_trace(trace, opt, GammaForm::kIncremental));
        ge.fully_dynamic =
            std::max(ge.fully_dynamic, gamma_of_trace(trace, opt, GammaForm::kFullyDynamic));
        have_gamma = true;
      }
    }
    for (std::size_t i = 0; i < l; ++i) cum_[i] += vals[i] / norm;
    if (journaling_) rollback();
    journaling_ = false;
  }
  if (cfg_.T > 1 && first_changed) {
    const std::vector<double> uniform(l, 1.0 / static_cast<double>(l));
    run(uniform);
  }
  bounds_active_ = false;
  union_stale_ = true;
  if (have_gamma) gamma_log_.push_back(ge);
  last_clean_ = !any_changed && !first_changed;
  last_version_ = version_;
  last_n_live_ = n_live;
}

std::string Seeder::audit() const {
  const std::size_t l = scales_.size();
  for (const auto& th : threads_) {
    const std::string tag = "thread " + std::to_string(th.index) + ": ";
    if (th.seeds.size() > cfg_.k) return tag + "more than k seeds";
    if (th.history.size() != th.seeds.size()) return tag + "history length mismatch";
    std::vector<NodeId> sorted = th.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      return tag + "duplicate seed";
    }
    for (NodeId v = 0; v < node_cap_; ++v) {
      if (static_cast<bool>(th.in_seed[v]) != std::binary_search(sorted.begin(), sorted.end(), v)) {
        return tag + "seed flag mismatch at " + std::to_string(v);
      }
    }
    for (std::size_t i = 0; i < l; ++i) {
      std::vector<std::uint32_t> cover(members_[i].size(), 0);
      for (NodeId s : th.seeds) {
        for (HandleId h : handles_of(i, s)) ++cover[h];
      }
      std::size_t covered = 0;
      for (std::size_t h = 0; h < cover.size(); ++h) {
        if (cover[h] != th.cover[i][h]) return tag + "cover count mismatch";
        if (cover[h] > 0) ++covered;
      }
      if (covered != th.covered[i]) return tag + "covered count mismatch";
      for (NodeId v = 0; v < node_cap_; ++v) {
        std::int32_t g = 0;
        for (HandleId h : handles_[i][v]) {
          if (cover[h] == 0) ++g;
        }
        if (g != th.gain[static_cast<std::size_t>(v) * l + i]) {
          return tag + "gain mismatch at node " + std::to_string(v);
        }
      }
    }
    // Replay the threshold test of every seed accepted by the loop.
    std::vector<double> prev(l, 0.0);
    for (std::size_t x = 0; x < th.history.size(); ++x) {
      const auto& rec = th.history[x];
      if (!rec.forced && !rec.restamped) {
        double gain = 0.0, base = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < l; ++i) {
          gain += rec.weights[i] * (rec.before[i] - prev[i]);
          base += rec.weights[i] * prev[i];
          scale += rec.weights[i] * rec.before[i];
        }
        const double threshold = (th.target - base) / static_cast<double>(cfg_.k);
        if (gain < threshold - 1e-9 * std::max(1.0, scale)) {
          return tag + "seed " + std::to_string(x) + " fails its threshold certificate";
        }
      }
      prev = rec.after;
    }
  }
  return {};
}

std::string Seeder::audit_view(std::size_t pair, const CoverageGraph& cv) const {
  const auto& mem = members_[pair];
  const std::size_t slots = std::max(mem.size(), cv.handle_slots());
  for (HandleId h = 0; h < slots; ++h) {
    std::vector<NodeId> mine;
    if (h < mem.size()) mine = mem[h];
    std::sort(mine.begin(), mine.end());
    std::vector<NodeId> theirs;
    if (cv.alive(h)) {
      const auto m = cv.rr(h).members();
      theirs.assign(m.begin(), m.end());
    }
    if (mine != theirs) {
      return "pair " + std::to_string(pair) + " handle " + std::to_string(h) + " view differs";
    }
  }
  return {};
}

}  // namespace rime
