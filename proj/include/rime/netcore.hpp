#pragma once

// Directed dynamic diffusion graph with node features, and the
// hyperparametric edge-probability models evaluated on it.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rime/rng.hpp"

namespace rime {

using NodeId = std::uint32_t;
using FeatureVector = std::vector<double>;
using Theta = std::vector<double>;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  auto operator<=>(const Edge&) const = default;
};

enum class ModelKind { kLinear, kLogistic, kProbit };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct HyperparamModel {
  ModelKind kind = ModelKind::kLogistic;
  std::size_t dimension = 6;  // d; node features have d / 2 entries
};

// Axis-aligned cube center +- radius in every coordinate.
struct HyperparamSpace {
  std::vector<double> center;
  double radius = 1.0;
};

// H as a function of the inner product theta^T x_e. Nondecreasing for all
// supported kinds; output in [0, 1].
double link(ModelKind kind, double inner);

FeatureVector edge_feature(std::span<const double> fu, std::span<const double> fv);

double edge_probability(const HyperparamModel& model, std::span<const double> theta,
                        std::span<const double> xe);

// Extreme probabilities over the cube: (H(lo_inner), H(hi_inner)).
std::pair<double, double> prob_bounds(const HyperparamModel& model, const HyperparamSpace& space,
                                      std::span<const double> xe);

std::vector<Theta> sample_hyperparameters(const HyperparamSpace& space, std::size_t l, Rng& rng);

struct InsertNode {
  NodeId id = 0;
  FeatureVector features;
};
struct InsertEdge {
  NodeId src = 0;
  NodeId dst = 0;
};
struct RemoveNode {
  NodeId id = 0;
};
struct RemoveEdge {
  NodeId src = 0;
  NodeId dst = 0;
};
using Update = std::variant<InsertNode, InsertEdge, RemoveNode, RemoveEdge>;

bool is_removal(const Update& u);

class DynGraph {
 public:
  // feature_dim is the per-node length d / 2.
  explicit DynGraph(std::size_t feature_dim = 3);

  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t edge_dim() const { return 2 * feature_dim_; }
  std::size_t num_nodes() const { return live_nodes_.size(); }
  std::size_t num_edges() const { return num_edges_; }
  // One past the largest id ever used; node-indexed arrays are sized by this.
  std::size_t id_capacity() const { return nodes_.size(); }

  // Counts at the last snapshot (engine restart).
  std::size_t n0() const { return n0_; }
  std::size_t m0() const { return m0_; }
  void mark_snapshot() {
    n0_ = num_nodes();
    m0_ = num_edges();
  }

  bool has_node(NodeId v) const { return v < nodes_.size() && nodes_[v].alive; }
  bool was_used(NodeId v) const { return v < nodes_.size() && nodes_[v].used; }
  bool has_edge(NodeId u, NodeId v) const;

  std::span<const double> features(NodeId v) const;
  // Sorted ascending.
  std::span<const NodeId> in_neighbors(NodeId v) const { return nodes_[v].in; }
  std::span<const NodeId> out_neighbors(NodeId v) const { return nodes_[v].out; }

  // Live nodes in unspecified but deterministic order (random access for
  // uniform sampling).
  std::span<const NodeId> node_list() const { return live_nodes_; }
  // Live nodes ascending.
  std::vector<NodeId> sorted_nodes() const;
  // All edges ascending by (src, dst).
  std::vector<Edge> edges() const;

  FeatureVector edge_feature(NodeId u, NodeId v) const;

  void add_node(NodeId v, FeatureVector features);
  void add_edge(NodeId u, NodeId v);
  // Removes v and all incident edges; returns the number of edges removed.
  std::size_t remove_node(NodeId v);
  void remove_edge(NodeId u, NodeId v);

  // Throws PreconditionError / DimensionError without mutating if the update
  // is not applicable.
  void validate(const Update& u) const;

 private:
  struct NodeRecord {
    bool alive = false;
    bool used = false;
    std::size_t slot = 0;  // position in live_nodes_
    std::vector<NodeId> in;
    std::vector<NodeId> out;
  };

  std::size_t feature_dim_;
  std::vector<NodeRecord> nodes_;
  std::vector<double> features_;  // id-major, feature_dim_ per id
  std::vector<NodeId> live_nodes_;
  std::size_t num_edges_ = 0;
  std::size_t n0_ = 0;
  std::size_t m0_ = 0;
};

void apply_update(DynGraph& g, const Update& u);

// Edge probability under a fixed theta, evaluated without materializing x_e.
class ThetaProbability {
 public:
  ThetaProbability(const DynGraph& g, ModelKind kind, Theta theta);

  double operator()(NodeId u, NodeId v) const;
  const Theta& theta() const { return theta_; }
  ModelKind kind() const { return kind_; }

 private:
  const DynGraph* graph_;
  ModelKind kind_;
  Theta theta_;
};

// Lower or upper probability bound over the cube, per edge.
class BoundProbability {
 public:
  enum class Side { kLower, kUpper };
  BoundProbability(const DynGraph& g, HyperparamModel model, HyperparamSpace space, Side side);

  double operator()(NodeId u, NodeId v) const;

 private:
  const DynGraph* graph_;
  HyperparamModel model_;
  HyperparamSpace space_;
  Side side_;
};

}  // namespace rime
