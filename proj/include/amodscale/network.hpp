#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace amodscale {

using NodeId = std::int64_t;
using EdgeId = std::int64_t;
using EpochSeconds = std::int64_t;

struct NodeRecord {
  NodeId id = 0;
  double lon = 0.0;
  double lat = 0.0;
};

struct EdgeRecord {
  EdgeId id = 0;
  NodeId from_node = 0;
  NodeId to_node = 0;
  double length_m = 0.0;
  double freeflow_speed_mps = 0.0;
  double freeflow_time_s = 0.0;  // length_m / freeflow_speed_mps
};

/// Immutable directed road graph.
///
/// Nodes and edges keep their external ids; internally each has a dense
/// index (position in nodes() / edges()). Outgoing edge lists are sorted by
/// edge id so every traversal is reproducible.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  /// Validates referential integrity and edge domains, fills freeflow_time_s.
  RoadNetwork(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges);

  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  const std::vector<EdgeRecord>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  std::optional<std::size_t> find_node(NodeId id) const;
  std::optional<std::size_t> find_edge(EdgeId id) const;
  /// Throws ReferenceError on unknown id.
  std::size_t node_index(NodeId id) const;
  std::size_t edge_index(EdgeId id) const;

  const NodeRecord& node(NodeId id) const { return nodes_[node_index(id)]; }
  const EdgeRecord& edge(EdgeId id) const { return edges_[edge_index(id)]; }

  /// Dense edge indices leaving the node with dense index `node_idx`.
  std::span<const std::size_t> out_edges(std::size_t node_idx) const;
  std::size_t from_index(std::size_t edge_idx) const { return edge_from_[edge_idx]; }
  std::size_t to_index(std::size_t edge_idx) const { return edge_to_[edge_idx]; }

 private:
  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
  std::unordered_map<NodeId, std::size_t> node_lookup_;
  std::unordered_map<EdgeId, std::size_t> edge_lookup_;
  std::vector<std::size_t> edge_from_;
  std::vector<std::size_t> edge_to_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<std::size_t> adjacency_;
};

/// Reads `node_id,lon,lat` and `edge_id,from_node,to_node,length_m,freeflow_speed_mps`.
RoadNetwork load_network(const std::filesystem::path& nodes_path,
                         const std::filesystem::path& edges_path);

/// Upper bound on an edge's factor: t_max / t_flow with t_max = length / min_speed.
double factor_cap(const EdgeRecord& edge, double min_speed_mps);

/// Per-edge multiplicative factors on free-flow time for one period.
class TravelTimeLayer {
 public:
  TravelTimeLayer() = default;
  /// `factors` is aligned with net.edges(). Throws DomainError if a factor is
  /// below 1 or pushes an edge below `min_speed_mps`.
  TravelTimeLayer(const RoadNetwork& net, EpochSeconds period_start,
                  std::vector<double> factors, double min_speed_mps);

  static TravelTimeLayer identity(const RoadNetwork& net, EpochSeconds period_start);

  EpochSeconds period_start() const { return period_start_; }
  const std::vector<double>& factors() const { return factors_; }
  double factor_at(std::size_t edge_idx) const { return factors_[edge_idx]; }

 private:
  EpochSeconds period_start_ = 0;
  std::vector<double> factors_;
};

/// Time-dependent sequence of layers with a fixed period length.
class TravelTimeProfile {
 public:
  TravelTimeProfile() = default;
  /// Layers are sorted by period_start; they must be spaced exactly
  /// `period_length_s` apart (no gaps).
  TravelTimeProfile(std::vector<TravelTimeLayer> layers, EpochSeconds period_length_s);

  bool empty() const { return layers_.empty(); }
  const std::vector<TravelTimeLayer>& layers() const { return layers_; }
  EpochSeconds period_length() const { return period_length_; }
  EpochSeconds start() const;
  EpochSeconds end() const;  // exclusive
  bool covers(double from_s, double to_s) const;

  /// Layer in force at time t. Before the first period the first layer is
  /// used, after the last period the last one.
  const TravelTimeLayer& layer_at(double t) const;

 private:
  std::vector<TravelTimeLayer> layers_;
  EpochSeconds period_length_ = 0;
};

/// Selects what shortest paths minimize.
class EdgeWeight {
 public:
  static EdgeWeight distance() { return EdgeWeight(Kind::kDistance, nullptr); }
  static EdgeWeight freeflow_time() { return EdgeWeight(Kind::kTime, nullptr); }
  static EdgeWeight scaled_time(const TravelTimeLayer& layer) {
    return EdgeWeight(Kind::kTime, &layer);
  }

  double operator()(const RoadNetwork& net, std::size_t edge_idx) const;
  std::vector<double> materialize(const RoadNetwork& net) const;

 private:
  enum class Kind { kDistance, kTime };
  EdgeWeight(Kind kind, const TravelTimeLayer* layer) : kind_(kind), layer_(layer) {}

  Kind kind_;
  const TravelTimeLayer* layer_;
};

struct Path {
  std::vector<EdgeId> edges;
  double weight = 0.0;
};

/// One-to-all Dijkstra result.
///
/// Equal-weight candidates are resolved by the smaller predecessor node id,
/// then by the smaller edge id for parallel edges.
class ShortestPathTree {
 public:
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  /// Weights are per dense edge index and must be positive. Settling stops
  /// once the frontier exceeds `limit`.
  ShortestPathTree(const RoadNetwork& net, std::size_t origin_idx,
                   std::span<const double> weights, double limit = kUnbounded);

  std::size_t origin() const { return origin_; }
  bool reachable(std::size_t node_idx) const;
  double distance(std::size_t node_idx) const { return dist_[node_idx]; }
  /// Edge ids from origin to `node_idx`; empty if unreachable or origin.
  std::vector<EdgeId> path_to(std::size_t node_idx) const;

 private:
  const RoadNetwork* net_;
  std::size_t origin_;
  std::vector<double> dist_;
  std::vector<std::size_t> pred_edge_;
  std::vector<bool> settled_;
};

/// Minimal-weight path, or nullopt when dest is unreachable.
std::optional<Path> shortest_path(const RoadNetwork& net, NodeId origin, NodeId dest,
                                  const EdgeWeight& weight);

/// Sum of factor * t_flow over the path; layer == nullptr means free flow.
double path_travel_time(const RoadNetwork& net, std::span<const EdgeId> path,
                        const TravelTimeLayer* layer = nullptr);

double path_distance(const RoadNetwork& net, std::span<const EdgeId> path);

/// Throws ContractError if consecutive edges do not chain.
void check_path_continuity(const RoadNetwork& net, std::span<const EdgeId> path);

}  // namespace amodscale
