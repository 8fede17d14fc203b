#include "rime/coverage.hpp"

#include <algorithm>
#include <cmath>

#include "rime/errors.hpp"

namespace rime {

void CoverageGraph::clear() {
  handles_.clear();
  containing_.clear();
  rooted_.clear();
  left_.clear();
  left_count_ = 0;
  live_handles_ = 0;
  num_memberships_ = 0;
}

void CoverageGraph::ensure_node(NodeId v) {
  if (v >= containing_.size()) {
    const std::size_t size = static_cast<std::size_t>(v) + 1;
    containing_.resize(size);
    rooted_.resize(size);
    left_.resize(size, 0);
  }
}

void CoverageGraph::link_member(NodeId v, HandleId h) {
  ensure_node(v);
  containing_[v].push_back(h);
  ++num_memberships_;
}

void CoverageGraph::unlink_member(NodeId v, HandleId h) {
  auto& list = containing_[v];
  auto it = std::find(list.begin(), list.end(), h);
  if (it == list.end()) throw ContractError("coverage: membership mirror out of sync");
  *it = list.back();
  list.pop_back();
  --num_memberships_;
}

HandleId CoverageGraph::add_handle(RRSet r) {
  const auto h = static_cast<HandleId>(handles_.size());
  for (NodeId v : r.members()) link_member(v, h);
  ensure_node(r.root());
  rooted_[r.root()].push_back(h);
  handles_.push_back({std::move(r), true});
  ++live_handles_;
  return h;
}

void CoverageGraph::drop_handle(HandleId h, std::vector<Membership>* removed) {
  if (!alive(h)) throw ContractError("drop_handle: handle not alive");
  auto& slot = handles_[h];
  for (NodeId v : slot.rr.members()) {
    unlink_member(v, h);
    if (removed != nullptr) removed->push_back({v, h});
  }
  auto& roots = rooted_[slot.rr.root()];
  roots.erase(std::find(roots.begin(), roots.end(), h));
  slot.alive = false;
  slot.rr = RRSet(slot.rr.root());
  --live_handles_;
}

std::span<const HandleId> CoverageGraph::containing(NodeId v) const {
  if (v >= containing_.size()) return {};
  return containing_[v];
}

std::span<const HandleId> CoverageGraph::rooted_at(NodeId v) const {
  if (v >= rooted_.size()) return {};
  return rooted_[v];
}

void CoverageGraph::add_left(NodeId v) {
  ensure_node(v);
  if (!left_[v]) {
    left_[v] = 1;
    ++left_count_;
  }
}

void CoverageGraph::remove_left(NodeId v) {
  if (has_left(v)) {
    left_[v] = 0;
    --left_count_;
  }
}

std::size_t CoverageGraph::covered_by(std::span<const NodeId> S) const {
  std::vector<char> hit(handles_.size(), 0);
  std::size_t count = 0;
  for (NodeId v : S) {
    for (HandleId h : containing(v)) {
      if (!hit[h]) {
        hit[h] = 1;
        ++count;
      }
    }
  }
  return count;
}

namespace {

std::vector<HandleId> sorted_copy(std::span<const HandleId> hs) {
  std::vector<HandleId> out(hs.begin(), hs.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

CoverageDelta CoverageGraph::insert_edge(const DynGraph& g, Edge e, const EdgeProbFn& prob,
                                         Rng& rng) {
  CoverageDelta delta;
  for (HandleId h : sorted_copy(containing(e.dst))) {
    RRSet& r = handles_[h].rr;
    if (r.contains(e.src)) {
      // Both ends already members: decide the edge so the stored live
      // structure stays complete for later reductions.
      if (r.outcome(e.src, e.dst) == RRSet::Outcome::kUndecided) {
        record_edge_outcome(r, e, prob, rng);
        ++delta.edges_scanned;
      }
      continue;
    }
    if (r.outcome(e.src, e.dst) != RRSet::Outcome::kUndecided) continue;
    auto res = augment_rr_set(r, g, e, prob, rng);
    delta.edges_scanned += res.edges_newly_checked;
    for (NodeId x : res.added) {
      link_member(x, h);
      delta.added.push_back({x, h});
    }
  }
  return delta;
}

CoverageDelta CoverageGraph::remove_edge(Edge e) {
  CoverageDelta delta;
  for (HandleId h : sorted_copy(containing(e.dst))) {
    RRSet& r = handles_[h].rr;
    switch (r.outcome(e.src, e.dst)) {
      case RRSet::Outcome::kUndecided:
        break;
      case RRSet::Outcome::kDead:
        forget_edge(r, e);
        break;
      case RRSet::Outcome::kLive: {
        auto res = reduce_rr_set(r, e);
        delta.edges_scanned += res.edges_scanned;
        for (NodeId x : res.removed) {
          unlink_member(x, h);
          delta.removed.push_back({x, h});
        }
        break;
      }
    }
  }
  return delta;
}

CoverageDelta CoverageGraph::remove_node(NodeId v, std::span<const NodeId> former_out) {
  CoverageDelta delta;
  for (HandleId h : sorted_copy(rooted_at(v))) drop_handle(h, &delta.removed);
  for (HandleId h : sorted_copy(containing(v))) {
    auto res = remove_node_from_rr_set(handles_[h].rr, v);
    delta.edges_scanned += res.edges_scanned;
    for (NodeId x : res.removed) {
      unlink_member(x, h);
      delta.removed.push_back({x, h});
    }
  }
  // Dead outcomes of v's out-edges live in handles holding the targets.
  for (NodeId b : former_out) {
    for (HandleId h : containing(b)) forget_edge(handles_[h].rr, {v, b});
  }
  remove_left(v);
  std::sort(delta.removed.begin(), delta.removed.end(),
            [](const Membership& a, const Membership& b) {
              return a.handle != b.handle ? a.handle < b.handle : a.node < b.node;
            });
  return delta;
}

std::string CoverageGraph::audit(const DynGraph* g) const {
  std::size_t memberships = 0;
  std::size_t live = 0;
  for (HandleId h = 0; h < handles_.size(); ++h) {
    const auto& slot = handles_[h];
    if (!slot.alive) continue;
    ++live;
    if (auto msg = slot.rr.audit(g); !msg.empty()) {
      return "handle " + std::to_string(h) + ": " + msg;
    }
    const auto& roots = rooted_[slot.rr.root()];
    if (std::find(roots.begin(), roots.end(), h) == roots.end()) {
      return "handle " + std::to_string(h) + " missing from root index";
    }
    for (NodeId v : slot.rr.members()) {
      const auto& list = containing_[v];
      if (std::count(list.begin(), list.end(), h) != 1) {
        return "membership (" + std::to_string(v) + "," + std::to_string(h) + ") not mirrored";
      }
      ++memberships;
    }
  }
  if (live != live_handles_) return "live handle counter out of sync";
  if (memberships != num_memberships_) return "membership count out of sync";
  for (NodeId v = 0; v < containing_.size(); ++v) {
    for (HandleId h : containing_[v]) {
      if (!alive(h) || !handles_[h].rr.contains(v)) return "stale membership entry";
    }
    for (HandleId h : rooted_[v]) {
      if (!alive(h) || handles_[h].rr.root() != v) return "stale root entry";
    }
    if (g != nullptr && (g->has_node(v) != has_left(v))) {
      return "left side disagrees with graph at node " + std::to_string(v);
    }
  }
  if (g != nullptr && left_count_ != g->num_nodes()) return "left count disagrees with graph";
  return {};
}

double CoveragePair::scale() const {
  if (rate.sets_sampled == 0) return 0.0;
  return static_cast<double>(rate.n0) / static_cast<double>(rate.sets_sampled);
}

std::size_t draw_handle_count(double p, Rng& rng) {
  if (!(p >= 0)) throw PreconditionError("draw_handle_count: negative rate");
  const double whole = std::floor(p);
  auto count = static_cast<std::size_t>(whole);
  if (rng.bernoulli(p - whole)) ++count;
  return count;
}

CoveragePair build_coverage_pair(const DynGraph& g, std::size_t index, Theta theta,
                                 EdgeProbFn prob, const RateEstimate& rate, Rng est_rng,
                                 Rng cv_rng, RRSampler* sampler) {
  RRSampler local;
  RRSampler& s = sampler != nullptr ? *sampler : local;
  CoveragePair pair{index,  std::move(theta), std::move(prob), rate, {}, {}, 0,
                    est_rng, cv_rng};
  for (NodeId v : g.sorted_nodes()) {
    pair.est.add_left(v);
    pair.cv.add_left(v);
    for (std::size_t c = draw_handle_count(rate.rate, pair.est_rng); c > 0; --c) {
      pair.est.add_handle(s.sample(g, pair.prob, v, pair.est_rng));
    }
    for (std::size_t c = draw_handle_count(rate.rate, pair.cv_rng); c > 0; --c) {
      pair.cv.add_handle(s.sample(g, pair.prob, v, pair.cv_rng));
    }
  }
  return pair;
}

double f_cv(const CoveragePair& pair, std::span<const NodeId> S) {
  if (pair.rate.sets_sampled == 0) return 0.0;
  return pair.scale() * static_cast<double>(pair.cv.covered_by(S));
}

CoverageDelta on_insert_node(CoveragePair& pair, NodeId v) {
  CoverageDelta delta;
  pair.est.add_left(v);
  pair.cv.add_left(v);
  for (std::size_t c = draw_handle_count(pair.rate.rate, pair.est_rng); c > 0; --c) {
    pair.est.add_handle(RRSet(v));
  }
  for (std::size_t c = draw_handle_count(pair.rate.rate, pair.cv_rng); c > 0; --c) {
    delta.added.push_back({v, pair.cv.add_handle(RRSet(v))});
  }
  return delta;
}

std::size_t est_insert_edge(CoveragePair& pair, const DynGraph& g, Edge e) {
  const std::size_t scanned = pair.est.insert_edge(g, e, pair.prob, pair.est_rng).edges_scanned;
  pair.est_edges_scanned_this_stage += scanned;
  return scanned;
}

CoverageDelta cv_insert_edge(CoveragePair& pair, const DynGraph& g, Edge e) {
  return pair.cv.insert_edge(g, e, pair.prob, pair.cv_rng);
}

CoverageDelta on_insert_edge(CoveragePair& pair, const DynGraph& g, Edge e) {
  const std::size_t scanned = est_insert_edge(pair, g, e);
  CoverageDelta delta = cv_insert_edge(pair, g, e);
  delta.edges_scanned = scanned;
  return delta;
}

std::size_t est_remove_edge(CoveragePair& pair, Edge e) {
  const std::size_t scanned = pair.est.remove_edge(e).edges_scanned;
  pair.est_edges_scanned_this_stage += scanned;
  return scanned;
}

CoverageDelta cv_remove_edge(CoveragePair& pair, Edge e) { return pair.cv.remove_edge(e); }

CoverageDelta on_remove_edge(CoveragePair& pair, Edge e) {
  const std::size_t scanned = est_remove_edge(pair, e);
  CoverageDelta delta = cv_remove_edge(pair, e);
  delta.edges_scanned = scanned;
  return delta;
}

CoverageDelta on_remove_node(CoveragePair& pair, NodeId v, std::span<const NodeId> former_out) {
  pair.est.remove_node(v, former_out);
  return pair.cv.remove_node(v, former_out);
}

}  // namespace rime
