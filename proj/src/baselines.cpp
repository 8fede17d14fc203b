#include "rime/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <queue>

#include "rime/errors.hpp"
#include "rime/oracles.hpp"

namespace rime {

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kBase: return "base";
    case BaselineKind::kHiro: return "hiro";
    case BaselineKind::kLuGreedy: return "lugreedy";
  }
  return "?";
}

BaselineKind parse_baseline_kind(const std::string& name) {
  if (name == "base") return BaselineKind::kBase;
  if (name == "hiro") return BaselineKind::kHiro;
  if (name == "lugreedy") return BaselineKind::kLuGreedy;
  throw ConfigError("unknown baseline: " + name);
}

void RRCollection::add(std::vector<NodeId> members) {
  const auto idx = static_cast<std::uint32_t>(sets.size());
  for (NodeId v : members) {
    if (v >= by_node.size()) by_node.resize(v + 1);
    by_node[v].push_back(idx);
  }
  sets.push_back(std::move(members));
}

std::size_t RRCollection::covered(std::span<const NodeId> S) const {
  std::vector<char> hit(sets.size(), 0);
  std::size_t count = 0;
  for (NodeId v : S) {
    if (v >= by_node.size()) continue;
    for (auto h : by_node[v]) {
      if (!hit[h]) {
        hit[h] = 1;
        ++count;
      }
    }
  }
  return count;
}

namespace {

std::vector<NodeId> members_of(const RRSet& rr) {
  auto m = rr.members();
  return {m.begin(), m.end()};
}

}  // namespace

RRCollection rr_per_node(const DynGraph& g, const EdgeProbFn& prob, Rng& rng) {
  RRCollection out;
  RRSampler sampler;
  for (NodeId v : g.sorted_nodes()) out.add(members_of(sampler.sample(g, prob, v, rng)));
  out.scale = 1.0;
  return out;
}

RRCollection rr_random_roots(const DynGraph& g, const EdgeProbFn& prob, std::size_t roots,
                             Rng& rng) {
  if (roots == 0) throw ConfigError("rr_random_roots: root count must be positive");
  RRCollection out;
  const auto nodes = g.node_list();
  if (nodes.empty()) return out;
  RRSampler sampler;
  for (std::size_t r = 0; r < roots; ++r) {
    const NodeId root = nodes[rng.below(nodes.size())];
    out.add(members_of(sampler.sample(g, prob, root, rng)));
  }
  out.scale = static_cast<double>(nodes.size()) / static_cast<double>(roots);
  return out;
}

std::vector<NodeId> greedy_max_coverage(const DynGraph& g,
                                        std::span<const RRCollection* const> colls,
                                        std::span<const double> weights, std::size_t k) {
  if (colls.size() != weights.size()) throw DimensionError("greedy_max_coverage: weights size");
  std::vector<double> ws(colls.size());
  for (std::size_t i = 0; i < colls.size(); ++i) ws[i] = weights[i] * colls[i]->scale;
  std::vector<std::vector<char>> hit(colls.size());
  for (std::size_t i = 0; i < colls.size(); ++i) hit[i].assign(colls[i]->sets.size(), 0);

  auto gain_of = [&](NodeId v) {
    double gsum = 0.0;
    for (std::size_t i = 0; i < colls.size(); ++i) {
      const auto& bn = colls[i]->by_node;
      if (v >= bn.size()) continue;
      std::size_t c = 0;
      for (auto h : bn[v]) c += hit[i][h] ? 0 : 1;
      gsum += ws[i] * static_cast<double>(c);
    }
    return gsum;
  };

  struct Entry {
    double gain;
    NodeId node;
    std::size_t round;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.node > b.node;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> pq(worse);
  for (NodeId v : g.sorted_nodes()) pq.push({gain_of(v), v, 0});

  std::vector<NodeId> seeds;
  const std::size_t picks = std::min(k, g.num_nodes());
  while (seeds.size() < picks && !pq.empty()) {
    Entry top = pq.top();
    pq.pop();
    if (top.round == seeds.size()) {
      seeds.push_back(top.node);
      for (std::size_t i = 0; i < colls.size(); ++i) {
        const auto& bn = colls[i]->by_node;
        if (top.node >= bn.size()) continue;
        for (auto h : bn[top.node]) hit[i][h] = 1;
      }
    } else {
      pq.push({gain_of(top.node), top.node, seeds.size()});
    }
  }
  return seeds;
}

namespace {

using CollectionFactory = std::function<RRCollection(std::size_t theta_index, Rng&)>;

// T MWU iterations; fresh collections per iteration when resample is set.
BaselineResult mwu_over_collections(const DynGraph& g, std::size_t l, const BaselineConfig& cfg,
                                    Rng& rng, bool resample, const CollectionFactory& make) {
  if (g.num_nodes() == 0) throw PreconditionError("baseline: empty graph");
  if (l == 0) throw ConfigError("baseline: no hyperparameters");
  if (cfg.T == 0) throw ConfigError("baseline: T must be positive");
  const double eta = cfg.eta < 0 ? default_eta(l, cfg.T) : cfg.eta;
  const auto n = static_cast<double>(g.num_nodes());

  std::vector<RRCollection> colls(l);
  auto rebuild = [&] {
    for (std::size_t i = 0; i < l; ++i) colls[i] = make(i, rng);
  };
  rebuild();
  std::vector<const RRCollection*> ptrs(l);
  for (std::size_t i = 0; i < l; ++i) ptrs[i] = &colls[i];

  BaselineResult out;
  std::vector<double> cum(l, 0.0);
  for (std::size_t j = 0; j < cfg.T; ++j) {
    if (resample && j > 0) rebuild();
    const auto w = mwu_weights(cum, eta);
    auto S = greedy_max_coverage(g, ptrs, w, cfg.k);
    for (std::size_t i = 0; i < l; ++i) {
      cum[i] += colls[i].scale * static_cast<double>(colls[i].covered(S)) / n;
    }
    out.candidates.push_back(std::move(S));
  }
  for (const auto& c : out.candidates) out.seeds.insert(out.seeds.end(), c.begin(), c.end());
  std::sort(out.seeds.begin(), out.seeds.end());
  out.seeds.erase(std::unique(out.seeds.begin(), out.seeds.end()), out.seeds.end());
  return out;
}

}  // namespace

BaselineResult run_base(const DynGraph& g, const std::vector<Theta>& thetas,
                        const BaselineConfig& cfg, Rng& rng) {
  return mwu_over_collections(g, thetas.size(), cfg, rng, false, [&](std::size_t i, Rng& r) {
    return rr_per_node(g, ThetaProbability(g, cfg.model, thetas[i]), r);
  });
}

BaselineResult run_hiro(const DynGraph& g, const std::vector<Theta>& thetas,
                        const BaselineConfig& cfg, Rng& rng) {
  const std::size_t roots =
      cfg.root_count > 0 ? cfg.root_count : std::max<std::size_t>(1, g.num_nodes() / 10);
  return mwu_over_collections(g, thetas.size(), cfg, rng, true, [&](std::size_t i, Rng& r) {
    return rr_random_roots(g, ThetaProbability(g, cfg.model, thetas[i]), roots, r);
  });
}

LuCandidates lugreedy_candidates(const DynGraph& g, const BaselineConfig& cfg, Rng& rng) {
  if (g.num_nodes() == 0) throw PreconditionError("lugreedy: empty graph");
  const HyperparamModel model{cfg.model, g.edge_dim()};
  LuCandidates out;
  const double one = 1.0;
  for (auto side : {BoundProbability::Side::kLower, BoundProbability::Side::kUpper}) {
    const auto coll = rr_per_node(g, BoundProbability(g, model, cfg.space, side), rng);
    const RRCollection* ptr = &coll;
    auto S = greedy_max_coverage(g, std::span(&ptr, 1), std::span(&one, 1), cfg.k);
    (side == BoundProbability::Side::kLower ? out.lower : out.upper) = std::move(S);
  }
  return out;
}

BaselineResult run_lugreedy(const DynGraph& g, const BaselineConfig& cfg, Rng& rng) {
  auto cands = lugreedy_candidates(g, cfg, rng);
  const HyperparamModel model{cfg.model, g.edge_dim()};
  const BoundProbability lo(g, model, cfg.space, BoundProbability::Side::kLower);
  const double v_lo = monte_carlo_spread(g, lo, cands.lower, cfg.eval_runs, rng).mean;
  const double v_hi = monte_carlo_spread(g, lo, cands.upper, cfg.eval_runs, rng).mean;
  BaselineResult out;
  out.seeds = v_hi > v_lo ? cands.upper : cands.lower;
  out.candidates = {std::move(cands.lower), std::move(cands.upper)};
  return out;
}

BaselineResult run_baseline(BaselineKind kind, const DynGraph& g, const std::vector<Theta>& thetas,
                            const BaselineConfig& cfg, Rng& rng) {
  switch (kind) {
    case BaselineKind::kBase: return run_base(g, thetas, cfg, rng);
    case BaselineKind::kHiro: return run_hiro(g, thetas, cfg, rng);
    case BaselineKind::kLuGreedy: return run_lugreedy(g, cfg, rng);
  }
  throw ConfigError("unknown baseline kind");
}

std::vector<BaselineStep> rerun_after_each_update(BaselineKind kind, const std::vector<Update>& stream,
                                                  DynGraph g0, const std::vector<Theta>& thetas,
                                                  const BaselineConfig& cfg, Rng& rng) {
  using Clock = std::chrono::steady_clock;
  std::vector<BaselineStep> rows;
  rows.reserve(stream.size() + 1);
  std::uint64_t cum = 0;
  for (std::size_t step = 0; step <= stream.size(); ++step) {
    const auto t0 = Clock::now();
    if (step > 0) apply_update(g0, stream[step - 1]);
    BaselineStep row;
    row.step = step;
    if (g0.num_nodes() > 0) row.seeds = run_baseline(kind, g0, thetas, cfg, rng).seeds;
    cum += static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
    row.cum_ns = cum;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rime
