#include "rime/netcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rime/errors.hpp"

namespace rime {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double abs_sum(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += std::abs(x);
  return s;
}

void insert_sorted(std::vector<NodeId>& list, NodeId v) {
  list.insert(std::lower_bound(list.begin(), list.end(), v), v);
}

void erase_sorted(std::vector<NodeId>& list, NodeId v) {
  auto it = std::lower_bound(list.begin(), list.end(), v);
  if (it != list.end() && *it == v) list.erase(it);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear:
      return "linear";
    case ModelKind::kLogistic:
      return "logistic";
    case ModelKind::kProbit:
      return "probit";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear") return ModelKind::kLinear;
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "probit") return ModelKind::kProbit;
  throw ConfigError("unknown model kind '" + name + "'");
}

double link(ModelKind kind, double inner) {
  switch (kind) {
    case ModelKind::kLinear:
      return std::clamp(inner, 0.0, 1.0);
    case ModelKind::kLogistic:
      if (inner >= 0) return 1.0 / (1.0 + std::exp(-inner));
      {
        const double e = std::exp(inner);
        return e / (1.0 + e);
      }
    case ModelKind::kProbit:
      return 0.5 * std::erfc(-inner / std::numbers::sqrt2);
  }
  return 0.0;
}

FeatureVector edge_feature(std::span<const double> fu, std::span<const double> fv) {
  if (fu.size() != fv.size()) {
    throw DimensionError("edge_feature: endpoint feature lengths differ (" +
                         std::to_string(fu.size()) + " vs " + std::to_string(fv.size()) + ")");
  }
  FeatureVector xe(fu.begin(), fu.end());
  xe.insert(xe.end(), fv.begin(), fv.end());
  return xe;
}

double edge_probability(const HyperparamModel& model, std::span<const double> theta,
                        std::span<const double> xe) {
  if (theta.size() != model.dimension || xe.size() != model.dimension) {
    throw DimensionError("edge_probability: expected length " + std::to_string(model.dimension));
  }
  return link(model.kind, dot(theta, xe));
}

std::pair<double, double> prob_bounds(const HyperparamModel& model, const HyperparamSpace& space,
                                      std::span<const double> xe) {
  if (xe.size() != model.dimension || space.center.size() != model.dimension) {
    throw DimensionError("prob_bounds: expected length " + std::to_string(model.dimension));
  }
  const double mid = dot(space.center, xe);
  const double half = space.radius * abs_sum(xe);
  return {link(model.kind, mid - half), link(model.kind, mid + half)};
}

std::vector<Theta> sample_hyperparameters(const HyperparamSpace& space, std::size_t l, Rng& rng) {
  std::vector<Theta> out;
  out.reserve(l);
  for (std::size_t i = 0; i < l; ++i) {
    Theta theta(space.center.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
      theta[j] = rng.uniform(space.center[j] - space.radius, space.center[j] + space.radius);
    }
    out.push_back(std::move(theta));
  }
  return out;
}

bool is_removal(const Update& u) {
  return std::holds_alternative<RemoveNode>(u) || std::holds_alternative<RemoveEdge>(u);
}

DynGraph::DynGraph(std::size_t feature_dim) : feature_dim_(feature_dim) {}

bool DynGraph::has_edge(NodeId u, NodeId v) const {
  if (!has_node(u) || !has_node(v)) return false;
  const auto& out = nodes_[u].out;
  return std::binary_search(out.begin(), out.end(), v);
}

std::span<const double> DynGraph::features(NodeId v) const {
  return {features_.data() + static_cast<std::size_t>(v) * feature_dim_, feature_dim_};
}

std::vector<NodeId> DynGraph::sorted_nodes() const {
  std::vector<NodeId> out(live_nodes_.begin(), live_nodes_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Edge> DynGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (NodeId u = 0; u < nodes_.size(); ++u) {
    if (!nodes_[u].alive) continue;
    for (NodeId v : nodes_[u].out) out.push_back({u, v});
  }
  return out;
}

FeatureVector DynGraph::edge_feature(NodeId u, NodeId v) const {
  return rime::edge_feature(features(u), features(v));
}

void DynGraph::validate(const Update& update) const {
  std::visit(
      [&](const auto& up) {
        using T = std::decay_t<decltype(up)>;
        if constexpr (std::is_same_v<T, InsertNode>) {
          if (was_used(up.id)) {
            throw PreconditionError("insert node: id " + std::to_string(up.id) + " already used");
          }
          if (up.features.size() != feature_dim_) {
            throw DimensionError("insert node: expected " + std::to_string(feature_dim_) +
                                 " features, got " + std::to_string(up.features.size()));
          }
          for (double f : up.features) {
            if (!(f >= -1.0 && f <= 1.0)) {
              throw PreconditionError("insert node: feature outside [-1, 1]");
            }
          }
        } else if constexpr (std::is_same_v<T, InsertEdge>) {
          if (!has_node(up.src) || !has_node(up.dst)) {
            throw PreconditionError("insert edge: endpoint not live");
          }
          if (up.src == up.dst) throw PreconditionError("insert edge: self-loop");
          if (has_edge(up.src, up.dst)) throw PreconditionError("insert edge: duplicate edge");
        } else if constexpr (std::is_same_v<T, RemoveNode>) {
          if (!has_node(up.id)) {
            throw PreconditionError("remove node: " + std::to_string(up.id) + " not live");
          }
        } else {
          if (!has_edge(up.src, up.dst)) throw PreconditionError("remove edge: edge absent");
        }
      },
      update);
}

void DynGraph::add_node(NodeId v, FeatureVector features) {
  validate(InsertNode{v, features});
  if (v >= nodes_.size()) {
    nodes_.resize(static_cast<std::size_t>(v) + 1);
    features_.resize(nodes_.size() * feature_dim_, 0.0);
  }
  auto& rec = nodes_[v];
  rec.alive = true;
  rec.used = true;
  rec.slot = live_nodes_.size();
  live_nodes_.push_back(v);
  std::copy(features.begin(), features.end(),
            features_.begin() + static_cast<std::ptrdiff_t>(v * feature_dim_));
}

void DynGraph::add_edge(NodeId u, NodeId v) {
  validate(InsertEdge{u, v});
  insert_sorted(nodes_[u].out, v);
  insert_sorted(nodes_[v].in, u);
  ++num_edges_;
}

void DynGraph::remove_edge(NodeId u, NodeId v) {
  validate(RemoveEdge{u, v});
  erase_sorted(nodes_[u].out, v);
  erase_sorted(nodes_[v].in, u);
  --num_edges_;
}

std::size_t DynGraph::remove_node(NodeId v) {
  validate(RemoveNode{v});
  auto& rec = nodes_[v];
  std::size_t removed = 0;
  for (NodeId w : rec.out) {
    erase_sorted(nodes_[w].in, v);
    ++removed;
  }
  for (NodeId w : rec.in) {
    erase_sorted(nodes_[w].out, v);
    ++removed;
  }
  rec.out.clear();
  rec.in.clear();
  num_edges_ -= removed;
  rec.alive = false;
  const NodeId last = live_nodes_.back();
  live_nodes_[rec.slot] = last;
  nodes_[last].slot = rec.slot;
  live_nodes_.pop_back();
  return removed;
}

void apply_update(DynGraph& g, const Update& update) {
  std::visit(
      [&](const auto& up) {
        using T = std::decay_t<decltype(up)>;
        if constexpr (std::is_same_v<T, InsertNode>) {
          g.add_node(up.id, up.features);
        } else if constexpr (std::is_same_v<T, InsertEdge>) {
          g.add_edge(up.src, up.dst);
        } else if constexpr (std::is_same_v<T, RemoveNode>) {
          g.remove_node(up.id);
        } else {
          g.remove_edge(up.src, up.dst);
        }
      },
      update);
}

ThetaProbability::ThetaProbability(const DynGraph& g, ModelKind kind, Theta theta)
    : graph_(&g), kind_(kind), theta_(std::move(theta)) {
  if (theta_.size() != g.edge_dim()) {
    throw DimensionError("theta length " + std::to_string(theta_.size()) +
                         " does not match edge dimension " + std::to_string(g.edge_dim()));
  }
}

double ThetaProbability::operator()(NodeId u, NodeId v) const {
  const std::size_t half = graph_->feature_dim();
  const std::span<const double> t(theta_);
  return link(kind_, dot(t.first(half), graph_->features(u)) +
                         dot(t.subspan(half), graph_->features(v)));
}

BoundProbability::BoundProbability(const DynGraph& g, HyperparamModel model, HyperparamSpace space,
                                   Side side)
    : graph_(&g), model_(model), space_(std::move(space)), side_(side) {
  if (space_.center.size() != g.edge_dim() || model_.dimension != g.edge_dim()) {
    throw DimensionError("bound probability: dimension mismatch with graph");
  }
}

double BoundProbability::operator()(NodeId u, NodeId v) const {
  const std::size_t half = graph_->feature_dim();
  const std::span<const double> c(space_.center);
  const auto fu = graph_->features(u);
  const auto fv = graph_->features(v);
  const double mid = dot(c.first(half), fu) + dot(c.subspan(half), fv);
  const double spread = space_.radius * (abs_sum(fu) + abs_sum(fv));
  return link(model_.kind, side_ == Side::kLower ? mid - spread : mid + spread);
}

}  // namespace rime
