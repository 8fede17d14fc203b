#pragma once

// Reverse-reachable (RR) sets that keep the outcome of every edge they
// examined, so they can be augmented on edge insertion and reduced on edge or
// node removal without re-flipping decided edges.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rime/netcore.hpp"
#include "rime/rng.hpp"

namespace rime {

using EdgeProbFn = std::function<double(NodeId, NodeId)>;

struct AugmentResult {
  std::vector<NodeId> added;  // ascending
  std::size_t edges_newly_checked = 0;
};

struct ReduceResult {
  std::vector<NodeId> removed;  // ascending
  std::size_t edges_scanned = 0;
};

class RRSet {
 public:
  enum class Outcome { kUndecided, kLive, kDead };

  explicit RRSet(NodeId root = 0);

  NodeId root() const { return root_; }
  // Sorted ascending; always contains the root.
  std::span<const NodeId> members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool contains(NodeId v) const;

  std::size_t edges_checked() const { return records_.size(); }
  std::size_t num_live() const { return num_live_; }
  std::size_t num_dead() const { return records_.size() - num_live_; }
  Outcome outcome(NodeId src, NodeId dst) const;
  std::vector<Edge> live_edges() const;
  std::vector<Edge> dead_edges() const;

  // Empty when every structural invariant holds, otherwise a description of
  // the first violation. With a graph, also checks that each member's current
  // in-edges have all been decided and that live edges exist in the graph.
  std::string audit(const DynGraph* g = nullptr) const;

 private:
  friend class RRSampler;
  friend struct RRSetEditor;
  friend AugmentResult augment_rr_set(RRSet&, const DynGraph&, Edge, const EdgeProbFn&, Rng&);
  friend bool forget_edge(RRSet&, Edge);
  friend ReduceResult reduce_rr_set(RRSet&, Edge);
  friend ReduceResult remove_node_from_rr_set(RRSet&, NodeId);

  struct Record {
    std::uint64_t key;  // dst << 32 | src, so records group by target
    bool live;
  };

  NodeId root_;
  std::vector<NodeId> members_;
  std::vector<Record> records_;  // sorted by key
  std::size_t num_live_ = 0;
};

struct RateEstimate {
  std::size_t sets_sampled = 0;  // K_i
  double rate = 0.0;             // p_i = K_i / n0
  std::size_t n0 = 0;
};

// Reverse BFS sampler with a reusable visit-stamp workspace. Exploration is
// FIFO in discovery order with in-neighbors taken by ascending id.
class RRSampler {
 public:
  RRSet sample(const DynGraph& g, const EdgeProbFn& prob, NodeId root, Rng& rng);
  // Number of edges one sample examines; the set itself is not kept.
  std::size_t sample_edges_checked(const DynGraph& g, const EdgeProbFn& prob, NodeId root,
                                   Rng& rng);

 private:
  bool visit(NodeId v);
  void begin(std::size_t capacity);

  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<NodeId> queue_;
};

RRSet sample_rr_set(const DynGraph& g, const EdgeProbFn& prob, NodeId root, Rng& rng);

RateEstimate estimate_generation_rate(const DynGraph& g, const EdgeProbFn& prob, double R,
                                      std::size_t m0, Rng& rng, RRSampler* sampler = nullptr);

// Requires (u,v) in g, v a member, u not a member and (u,v) undecided.
AugmentResult augment_rr_set(RRSet& r, const DynGraph& g, Edge e, const EdgeProbFn& prob,
                             Rng& rng);

// Decides a new edge whose endpoints are both members already. Membership is
// unchanged; the outcome is stored so later reductions see the full live
// structure. Returns true when the edge came up live.
bool record_edge_outcome(RRSet& r, Edge e, const EdgeProbFn& prob, Rng& rng);

// Drops the stored outcome of e; returns false if e was undecided.
bool forget_edge(RRSet& r, Edge e);

// Requires e to be live in r.
ReduceResult reduce_rr_set(RRSet& r, Edge e);

// x must not be the root. No-op when x is not a member.
ReduceResult remove_node_from_rr_set(RRSet& r, NodeId x);

}  // namespace rime
