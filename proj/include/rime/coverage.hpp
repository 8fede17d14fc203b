#pragma once

// Bipartite coverage graphs: left side is every live node, right side is a
// collection of RR sets ("handles"). One CoveragePair per sampled theta holds
// an estimation copy (scan accounting only) and a coverage copy (seeding).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rime/netcore.hpp"
#include "rime/rng.hpp"
#include "rime/rrsampler.hpp"

namespace rime {

using HandleId = std::uint32_t;

struct Membership {
  NodeId node = 0;
  HandleId handle = 0;
  auto operator<=>(const Membership&) const = default;
};

struct CoverageDelta {
  std::vector<Membership> added;    // ascending handle, then node
  std::vector<Membership> removed;  // ascending handle, then node
  std::size_t edges_scanned = 0;
};

class CoverageGraph {
 public:
  void clear();

  // Attaches an RR set as a new right handle and materializes its memberships.
  HandleId add_handle(RRSet r);
  // Tombstones h; its memberships are appended to removed if given.
  void drop_handle(HandleId h, std::vector<Membership>* removed = nullptr);

  std::size_t handle_slots() const { return handles_.size(); }
  std::size_t live_handles() const { return live_handles_; }
  bool alive(HandleId h) const { return h < handles_.size() && handles_[h].alive; }
  const RRSet& rr(HandleId h) const { return handles_[h].rr; }
  // Handles listing v as a member / as root; unspecified order.
  std::span<const HandleId> containing(NodeId v) const;
  std::span<const HandleId> rooted_at(NodeId v) const;
  std::size_t num_memberships() const { return num_memberships_; }

  bool has_left(NodeId v) const { return v < left_.size() && left_[v]; }
  std::size_t left_count() const { return left_count_; }
  void add_left(NodeId v);
  void remove_left(NodeId v);

  // Handles covered by S (at least one member in S).
  std::size_t covered_by(std::span<const NodeId> S) const;

  // Incremental hooks. insert_edge must run after the edge is in g;
  // remove_node takes v's out-neighbours from before its removal.
  CoverageDelta insert_edge(const DynGraph& g, Edge e, const EdgeProbFn& prob, Rng& rng);
  CoverageDelta remove_edge(Edge e);
  CoverageDelta remove_node(NodeId v, std::span<const NodeId> former_out);

  // Empty when the membership mirror and every RR set audit are consistent.
  std::string audit(const DynGraph* g = nullptr) const;

 private:
  struct Slot {
    RRSet rr;
    bool alive = false;
  };
  void ensure_node(NodeId v);
  void link_member(NodeId v, HandleId h);
  void unlink_member(NodeId v, HandleId h);

  std::vector<Slot> handles_;
  std::vector<std::vector<HandleId>> containing_;
  std::vector<std::vector<HandleId>> rooted_;
  std::vector<char> left_;
  std::size_t left_count_ = 0;
  std::size_t live_handles_ = 0;
  std::size_t num_memberships_ = 0;
};

struct CoveragePair {
  std::size_t index = 0;
  Theta theta;
  EdgeProbFn prob;
  RateEstimate rate;
  CoverageGraph est;
  CoverageGraph cv;
  std::size_t est_edges_scanned_this_stage = 0;
  Rng est_rng;
  Rng cv_rng;

  // n0 / K_i, the factor turning a covered-handle count into a spread.
  double scale() const;
};

// Number of RR sets to root at one node under the fractional rule:
// floor(p) for sure plus one more with probability p - floor(p).
std::size_t draw_handle_count(double p, Rng& rng);

CoveragePair build_coverage_pair(const DynGraph& g, std::size_t index, Theta theta,
                                 EdgeProbFn prob, const RateEstimate& rate, Rng est_rng,
                                 Rng cv_rng, RRSampler* sampler = nullptr);

double f_cv(const CoveragePair& pair, std::span<const NodeId> S);

// Pair-level hooks. Returned deltas describe the cv copy; each call adds its
// est scan work to est_edges_scanned_this_stage.
CoverageDelta on_insert_node(CoveragePair& pair, NodeId v);
std::size_t est_insert_edge(CoveragePair& pair, const DynGraph& g, Edge e);
CoverageDelta cv_insert_edge(CoveragePair& pair, const DynGraph& g, Edge e);
CoverageDelta on_insert_edge(CoveragePair& pair, const DynGraph& g, Edge e);
std::size_t est_remove_edge(CoveragePair& pair, Edge e);
CoverageDelta cv_remove_edge(CoveragePair& pair, Edge e);
CoverageDelta on_remove_edge(CoveragePair& pair, Edge e);
CoverageDelta on_remove_node(CoveragePair& pair, NodeId v, std::span<const NodeId> former_out);

}  // namespace rime
