#include "rime/rrsampler.hpp"

#include <algorithm>
#include <cmath>

#include "rime/errors.hpp"

namespace rime {

namespace {

constexpr std::uint64_t edge_key(NodeId src, NodeId dst) {
  return (static_cast<std::uint64_t>(dst) << 32) | src;
}
constexpr NodeId key_src(std::uint64_t key) { return static_cast<NodeId>(key & 0xffffffffu); }
constexpr NodeId key_dst(std::uint64_t key) { return static_cast<NodeId>(key >> 32); }

}  // namespace

// Mutation helpers shared by the free functions below.
struct RRSetEditor {
  using Record = RRSet::Record;

  static std::vector<Record>::iterator find(RRSet& r, std::uint64_t key) {
    auto it = std::lower_bound(r.records_.begin(), r.records_.end(), key,
                               [](const Record& rec, std::uint64_t k) { return rec.key < k; });
    return (it != r.records_.end() && it->key == key) ? it : r.records_.end();
  }

  static void insert_record(RRSet& r, std::uint64_t key, bool live) {
    auto it = std::lower_bound(r.records_.begin(), r.records_.end(), key,
                               [](const Record& rec, std::uint64_t k) { return rec.key < k; });
    r.records_.insert(it, Record{key, live});
    if (live) ++r.num_live_;
  }

  static void insert_member(RRSet& r, NodeId v) {
    r.members_.insert(std::lower_bound(r.members_.begin(), r.members_.end(), v), v);
  }

  // Keeps only members reverse-reachable from the root over live records and
  // drops every record whose target left. Returns the dropped members and the
  // number of live records traversed.
  static ReduceResult prune_unreachable(RRSet& r) {
    ReduceResult out;
    const std::size_t n = r.members_.size();
    std::vector<char> reached(n, 0);
    std::vector<std::size_t> queue;
    auto index_of = [&](NodeId v) -> std::size_t {
      auto it = std::lower_bound(r.members_.begin(), r.members_.end(), v);
      return (it != r.members_.end() && *it == v) ? static_cast<std::size_t>(it - r.members_.begin())
                                                  : n;
    };
    const std::size_t root_idx = index_of(r.root_);
    reached[root_idx] = 1;
    queue.push_back(root_idx);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId b = r.members_[queue[head]];
      auto it = std::lower_bound(r.records_.begin(), r.records_.end(), edge_key(0, b),
                                 [](const Record& rec, std::uint64_t k) { return rec.key < k; });
      for (; it != r.records_.end() && key_dst(it->key) == b; ++it) {
        if (!it->live) continue;
        ++out.edges_scanned;
        const std::size_t a = index_of(key_src(it->key));
        if (a < n && !reached[a]) {
          reached[a] = 1;
          queue.push_back(a);
        }
      }
    }
    if (queue.size() == n) return out;
    std::vector<NodeId> kept;
    kept.reserve(queue.size());
    for (std::size_t i = 0; i < n; ++i) {
      (reached[i] ? kept : out.removed).push_back(r.members_[i]);
    }
    r.members_ = std::move(kept);
    std::erase_if(r.records_, [&](const Record& rec) {
      const bool drop = !std::binary_search(r.members_.begin(), r.members_.end(), key_dst(rec.key));
      if (drop && rec.live) --r.num_live_;
      return drop;
    });
    return out;
  }
};

RRSet::RRSet(NodeId root) : root_(root), members_{root} {}

bool RRSet::contains(NodeId v) const {
  return std::binary_search(members_.begin(), members_.end(), v);
}

RRSet::Outcome RRSet::outcome(NodeId src, NodeId dst) const {
  const std::uint64_t key = edge_key(src, dst);
  auto it = std::lower_bound(records_.begin(), records_.end(), key,
                             [](const Record& rec, std::uint64_t k) { return rec.key < k; });
  if (it == records_.end() || it->key != key) return Outcome::kUndecided;
  return it->live ? Outcome::kLive : Outcome::kDead;
}

std::vector<Edge> RRSet::live_edges() const {
  std::vector<Edge> out;
  for (const auto& rec : records_) {
    if (rec.live) out.push_back({key_src(rec.key), key_dst(rec.key)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Edge> RRSet::dead_edges() const {
  std::vector<Edge> out;
  for (const auto& rec : records_) {
    if (!rec.live) out.push_back({key_src(rec.key), key_dst(rec.key)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string RRSet::audit(const DynGraph* g) const {
  if (!contains(root_)) return "root not a member";
  if (!std::is_sorted(members_.begin(), members_.end()) ||
      std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    return "members not strictly sorted";
  }
  std::size_t live = 0;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (i > 0 && records_[i - 1].key >= records_[i].key) return "records not strictly sorted";
    const NodeId dst = key_dst(records_[i].key);
    if (!contains(dst)) return "record targets non-member " + std::to_string(dst);
    if (records_[i].live) {
      ++live;
      if (!contains(key_src(records_[i].key))) return "live edge source is not a member";
    }
  }
  if (live != num_live_) return "live counter out of sync";

  // Every member must reach the root through live edges.
  RRSet copy = *this;
  if (!RRSetEditor::prune_unreachable(copy).removed.empty()) {
    return "member not live-reachable from root";
  }

  if (g != nullptr) {
    for (NodeId v : members_) {
      if (!g->has_node(v)) return "member " + std::to_string(v) + " not live in graph";
      for (NodeId w : g->in_neighbors(v)) {
        if (outcome(w, v) == Outcome::kUndecided) {
          return "in-edge (" + std::to_string(w) + "," + std::to_string(v) + ") undecided";
        }
      }
    }
    for (const auto& rec : records_) {
      if (rec.live && !g->has_edge(key_src(rec.key), key_dst(rec.key))) {
        return "live edge absent from graph";
      }
    }
  }
  return {};
}

void RRSampler::begin(std::size_t capacity) {
  if (stamp_.size() < capacity) stamp_.resize(capacity, 0);
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  queue_.clear();
}

bool RRSampler::visit(NodeId v) {
  if (stamp_[v] == epoch_) return false;
  stamp_[v] = epoch_;
  return true;
}

RRSet RRSampler::sample(const DynGraph& g, const EdgeProbFn& prob, NodeId root, Rng& rng) {
  begin(g.id_capacity());
  RRSet r(root);
  r.members_.clear();
  visit(root);
  queue_.push_back(root);
  for (std::size_t head = 0; head < queue_.size(); ++head) {
    const NodeId v = queue_[head];
    for (NodeId w : g.in_neighbors(v)) {
      const bool live = rng.bernoulli(prob(w, v));
      r.records_.push_back({edge_key(w, v), live});
      if (live) {
        ++r.num_live_;
        if (visit(w)) queue_.push_back(w);
      }
    }
  }
  r.members_.assign(queue_.begin(), queue_.end());
  std::sort(r.members_.begin(), r.members_.end());
  std::sort(r.records_.begin(), r.records_.end(),
            [](const RRSet::Record& a, const RRSet::Record& b) { return a.key < b.key; });
  return r;
}

std::size_t RRSampler::sample_edges_checked(const DynGraph& g, const EdgeProbFn& prob,
                                            NodeId root, Rng& rng) {
  begin(g.id_capacity());
  visit(root);
  queue_.push_back(root);
  std::size_t checked = 0;
  for (std::size_t head = 0; head < queue_.size(); ++head) {
    const NodeId v = queue_[head];
    for (NodeId w : g.in_neighbors(v)) {
      ++checked;
      if (rng.bernoulli(prob(w, v)) && visit(w)) queue_.push_back(w);
    }
  }
  return checked;
}

RRSet sample_rr_set(const DynGraph& g, const EdgeProbFn& prob, NodeId root, Rng& rng) {
  if (!g.has_node(root)) throw PreconditionError("sample_rr_set: root not live");
  RRSampler sampler;
  return sampler.sample(g, prob, root, rng);
}

RateEstimate estimate_generation_rate(const DynGraph& g, const EdgeProbFn& prob, double R,
                                      std::size_t m0, Rng& rng, RRSampler* sampler) {
  if (!(R > 0)) throw ConfigError("estimate_generation_rate: R must be positive");
  RateEstimate est;
  est.n0 = g.num_nodes();
  if (est.n0 == 0) return est;
  RRSampler local;
  RRSampler& s = sampler != nullptr ? *sampler : local;
  const auto nodes = g.node_list();
  if (m0 == 0) {
    // No edges to budget against: a fixed number of sets.
    est.sets_sampled = static_cast<std::size_t>(std::ceil(R));
  } else {
    const double budget = R * static_cast<double>(m0);
    double total = 0.0;
    while (total < budget) {
      const NodeId root = nodes[rng.below(nodes.size())];
      total += static_cast<double>(std::max<std::size_t>(1, s.sample_edges_checked(g, prob, root, rng)));
      ++est.sets_sampled;
    }
  }
  est.rate = static_cast<double>(est.sets_sampled) / static_cast<double>(est.n0);
  return est;
}

AugmentResult augment_rr_set(RRSet& r, const DynGraph& g, Edge e, const EdgeProbFn& prob,
                             Rng& rng) {
  if (!g.has_edge(e.src, e.dst)) throw ContractError("augment_rr_set: edge not in graph");
  if (!r.contains(e.dst) || r.contains(e.src)) {
    throw ContractError("augment_rr_set: requires dst in set and src outside");
  }
  if (r.outcome(e.src, e.dst) != RRSet::Outcome::kUndecided) {
    throw ContractError("augment_rr_set: edge already decided");
  }
  AugmentResult out;
  const bool live = rng.bernoulli(prob(e.src, e.dst));
  out.edges_newly_checked = 1;
  RRSetEditor::insert_record(r, edge_key(e.src, e.dst), live);
  if (!live) return out;

  // New members have no records yet, so all of their in-edges are fresh.
  std::vector<RRSet::Record> fresh;
  std::vector<NodeId> queue{e.src};
  RRSetEditor::insert_member(r, e.src);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    for (NodeId w : g.in_neighbors(v)) {
      const bool l = rng.bernoulli(prob(w, v));
      ++out.edges_newly_checked;
      fresh.push_back({edge_key(w, v), l});
      if (l && !r.contains(w)) {
        RRSetEditor::insert_member(r, w);
        queue.push_back(w);
      }
    }
  }
  for (const auto& rec : fresh) {
    if (rec.live) ++r.num_live_;
  }
  auto& recs = r.records_;
  const auto mid = static_cast<std::ptrdiff_t>(recs.size());
  recs.insert(recs.end(), fresh.begin(), fresh.end());
  auto by_key = [](const RRSet::Record& a, const RRSet::Record& b) { return a.key < b.key; };
  std::sort(recs.begin() + mid, recs.end(), by_key);
  std::inplace_merge(recs.begin(), recs.begin() + mid, recs.end(), by_key);
  out.added = std::move(queue);
  std::sort(out.added.begin(), out.added.end());
  return out;
}

bool record_edge_outcome(RRSet& r, Edge e, const EdgeProbFn& prob, Rng& rng) {
  if (!r.contains(e.src) || !r.contains(e.dst)) {
    throw ContractError("record_edge_outcome: both endpoints must be members");
  }
  if (r.outcome(e.src, e.dst) != RRSet::Outcome::kUndecided) {
    throw ContractError("record_edge_outcome: edge already decided");
  }
  const bool live = rng.bernoulli(prob(e.src, e.dst));
  RRSetEditor::insert_record(r, edge_key(e.src, e.dst), live);
  return live;
}

bool forget_edge(RRSet& r, Edge e) {
  auto it = RRSetEditor::find(r, edge_key(e.src, e.dst));
  if (it == r.records_.end()) return false;
  if (it->live) {
    --r.num_live_;
    r.records_.erase(it);
    RRSetEditor::prune_unreachable(r);
    return true;
  }
  r.records_.erase(it);
  return true;
}

ReduceResult reduce_rr_set(RRSet& r, Edge e) {
  auto it = RRSetEditor::find(r, edge_key(e.src, e.dst));
  if (it == r.records_.end() || !it->live) {
    throw ContractError("reduce_rr_set: edge is not live in this set");
  }
  r.records_.erase(it);
  --r.num_live_;
  return RRSetEditor::prune_unreachable(r);
}

ReduceResult remove_node_from_rr_set(RRSet& r, NodeId x) {
  if (x == r.root()) throw ContractError("remove_node_from_rr_set: cannot remove the root");
  if (!r.contains(x)) return {};
  std::erase_if(r.records_, [&](const RRSet::Record& rec) {
    const bool drop = key_src(rec.key) == x || key_dst(rec.key) == x;
    if (drop && rec.live) --r.num_live_;
    return drop;
  });
  return RRSetEditor::prune_unreachable(r);
}

}  // namespace rime
