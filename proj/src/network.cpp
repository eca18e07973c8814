#include "amodscale/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "amodscale/errors.hpp"
#include "csv.hpp"

namespace amodscale {

namespace {

constexpr std::size_t kNoEdge = std::numeric_limits<std::size_t>::max();

std::string edge_label(const EdgeRecord& e) { return "edge " + std::to_string(e.id); }

}  // namespace

RoadNetwork::RoadNetwork(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  node_lookup_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!std::isfinite(n.lon) || !std::isfinite(n.lat)) {
      throw DomainError("node " + std::to_string(n.id) + ": non-finite coordinates");
    }
    if (!node_lookup_.emplace(n.id, i).second) {
      throw DomainError("duplicate node id " + std::to_string(n.id));
    }
  }

  edge_lookup_.reserve(edges_.size());
  edge_from_.resize(edges_.size());
  edge_to_.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    auto& e = edges_[i];
    if (!(e.length_m > 0.0) || !std::isfinite(e.length_m)) {
      throw DomainError(edge_label(e) + ": length_m must be positive");
    }
    if (!(e.freeflow_speed_mps > 0.0) || !std::isfinite(e.freeflow_speed_mps)) {
      throw DomainError(edge_label(e) + ": freeflow_speed_mps must be positive");
    }
    if (e.from_node == e.to_node) throw DomainError(edge_label(e) + ": self loop");
    const auto from = find_node(e.from_node);
    const auto to = find_node(e.to_node);
    if (!from || !to) {
      throw ReferenceError(edge_label(e) + " references missing node " +
                           std::to_string(from ? e.to_node : e.from_node));
    }
    if (!edge_lookup_.emplace(e.id, i).second) {
      throw DomainError("duplicate edge id " + std::to_string(e.id));
    }
    e.freeflow_time_s = e.length_m / e.freeflow_speed_mps;
    edge_from_[i] = *from;
    edge_to_[i] = *to;
  }

  // CSR adjacency, each list sorted by edge id.
  adjacency_offsets_.assign(nodes_.size() + 1, 0);
  for (std::size_t i = 0; i < edges_.size(); ++i) ++adjacency_offsets_[edge_from_[i] + 1];
  std::partial_sum(adjacency_offsets_.begin(), adjacency_offsets_.end(), adjacency_offsets_.begin());
  adjacency_.resize(edges_.size());
  std::vector<std::size_t> fill(adjacency_offsets_.begin(), adjacency_offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) adjacency_[fill[edge_from_[i]]++] = i;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(adjacency_offsets_[n]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(adjacency_offsets_[n + 1]),
              [this](std::size_t a, std::size_t b) { return edges_[a].id < edges_[b].id; });
  }
}

std::optional<std::size_t> RoadNetwork::find_node(NodeId id) const {
  const auto it = node_lookup_.find(id);
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> RoadNetwork::find_edge(EdgeId id) const {
  const auto it = edge_lookup_.find(id);
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t RoadNetwork::node_index(NodeId id) const {
  if (auto idx = find_node(id)) return *idx;
  throw ReferenceError("unknown node id " + std::to_string(id));
}

std::size_t RoadNetwork::edge_index(EdgeId id) const {
  if (auto idx = find_edge(id)) return *idx;
  throw ReferenceError("unknown edge id " + std::to_string(id));
}

std::span<const std::size_t> RoadNetwork::out_edges(std::size_t node_idx) const {
  return std::span<const std::size_t>(adjacency_.data() + adjacency_offsets_[node_idx],
                                      adjacency_offsets_[node_idx + 1] - adjacency_offsets_[node_idx]);
}

RoadNetwork load_network(const std::filesystem::path& nodes_path,
                         const std::filesystem::path& edges_path) {
  std::vector<NodeRecord> nodes;
  {
    csv::Reader reader(nodes_path, {"node_id", "lon", "lat"});
    std::vector<std::string_view> f;
    while (reader.next(f)) {
      if (f.size() < 3) throw ParseError(reader.where() + ": expected 3 fields");
      const auto id = csv::to_int(f[0]);
      const auto lon = csv::to_double(f[1]);
      const auto lat = csv::to_double(f[2]);
      if (!id || !lon || !lat) throw ParseError(reader.where() + ": malformed node row");
      nodes.push_back({*id, *lon, *lat});
    }
  }
  std::vector<EdgeRecord> edges;
  {
    csv::Reader reader(edges_path,
                       {"edge_id", "from_node", "to_node", "length_m", "freeflow_speed_mps"});
    std::vector<std::string_view> f;
    while (reader.next(f)) {
      if (f.size() < 5) throw ParseError(reader.where() + ": expected 5 fields");
      const auto id = csv::to_int(f[0]);
      const auto from = csv::to_int(f[1]);
      const auto to = csv::to_int(f[2]);
      const auto len = csv::to_double(f[3]);
      const auto speed = csv::to_double(f[4]);
      if (!id || !from || !to || !len || !speed) {
        throw ParseError(reader.where() + ": malformed edge row");
      }
      edges.push_back({*id, *from, *to, *len, *speed, 0.0});
    }
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

double factor_cap(const EdgeRecord& edge, double min_speed_mps) {
  return (edge.length_m / min_speed_mps) / edge.freeflow_time_s;
}

TravelTimeLayer::TravelTimeLayer(const RoadNetwork& net, EpochSeconds period_start,
                                 std::vector<double> factors, double min_speed_mps)
    : period_start_(period_start), factors_(std::move(factors)) {
  if (factors_.size() != net.edge_count()) {
    throw DomainError("layer has " + std::to_string(factors_.size()) + " factors for " +
                      std::to_string(net.edge_count()) + " edges");
  }
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto& e = net.edges()[i];
    const double x = factors_[i];
    if (!(x >= 1.0) || !std::isfinite(x)) {
      throw DomainError(edge_label(e) + ": factor " + std::to_string(x) + " < 1");
    }
    const double cap = factor_cap(e, min_speed_mps);
    if (x > cap * (1.0 + 1e-12)) {
      throw DomainError(edge_label(e) + ": factor " + std::to_string(x) +
                        " drops speed below the configured minimum");
    }
  }
}

TravelTimeLayer TravelTimeLayer::identity(const RoadNetwork& net, EpochSeconds period_start) {
  TravelTimeLayer layer;
  layer.period_start_ = period_start;
  layer.factors_.assign(net.edge_count(), 1.0);
  return layer;
}

TravelTimeProfile::TravelTimeProfile(std::vector<TravelTimeLayer> layers,
                                     EpochSeconds period_length_s)
    : layers_(std::move(layers)), period_length_(period_length_s) {
  if (period_length_ <= 0) throw DomainError("profile period length must be positive");
  std::sort(layers_.begin(), layers_.end(), [](const auto& a, const auto& b) {
    return a.period_start() < b.period_start();
  });
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    const auto expected = layers_[i - 1].period_start() + period_length_;
    if (layers_[i].period_start() != expected) {
      throw DomainError("profile gap: no layer for period starting at " + std::to_string(expected));
    }
  }
}

EpochSeconds TravelTimeProfile::start() const {
  return layers_.empty() ? 0 : layers_.front().period_start();
}

EpochSeconds TravelTimeProfile::end() const {
  return layers_.empty() ? 0 : layers_.back().period_start() + period_length_;
}

bool TravelTimeProfile::covers(double from_s, double to_s) const {
  if (layers_.empty()) return false;
  return static_cast<double>(start()) <= from_s && to_s <= static_cast<double>(end());
}

const TravelTimeLayer& TravelTimeProfile::layer_at(double t) const {
  if (layers_.empty()) throw ContractError("layer_at on empty profile");
  const double offset = (t - static_cast<double>(start())) / static_cast<double>(period_length_);
  if (offset < 0.0) return layers_.front();
  const auto k = static_cast<std::size_t>(std::floor(offset));
  return layers_[std::min(k, layers_.size() - 1)];
}

double EdgeWeight::operator()(const RoadNetwork& net, std::size_t edge_idx) const {
  const auto& e = net.edges()[edge_idx];
  if (kind_ == Kind::kDistance) return e.length_m;
  return layer_ ? layer_->factor_at(edge_idx) * e.freeflow_time_s : e.freeflow_time_s;
}

std::vector<double> EdgeWeight::materialize(const RoadNetwork& net) const {
  std::vector<double> w(net.edge_count());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = (*this)(net, i);
  return w;
}

ShortestPathTree::ShortestPathTree(const RoadNetwork& net, std::size_t origin_idx,
                                   std::span<const double> weights, double limit)
    : net_(&net),
      origin_(origin_idx),
      dist_(net.node_count(), std::numeric_limits<double>::infinity()),
      pred_edge_(net.node_count(), kNoEdge),
      settled_(net.node_count(), false) {
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  dist_[origin_idx] = 0.0;
  frontier.emplace(0.0, origin_idx);
  const auto& edges = net.edges();
  const auto& nodes = net.nodes();

  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (settled_[u] || d > dist_[u]) continue;
    if (d > limit) break;
    settled_[u] = true;
    for (const std::size_t ei : net.out_edges(u)) {
      const std::size_t v = net.to_index(ei);
      if (settled_[v]) continue;
      const double nd = d + weights[ei];
      if (nd < dist_[v]) {
        dist_[v] = nd;
        pred_edge_[v] = ei;
        frontier.emplace(nd, v);
      } else if (nd == dist_[v] && pred_edge_[v] != kNoEdge) {
        // Weights are positive, so every equal-weight predecessor is settled
        // before v and passes through here.
        const auto cur = pred_edge_[v];
        const NodeId cur_pred = nodes[net.from_index(cur)].id;
        const NodeId cand_pred = nodes[u].id;
        if (cand_pred < cur_pred || (cand_pred == cur_pred && edges[ei].id < edges[cur].id)) {
          pred_edge_[v] = ei;
        }
      }
    }
  }
  // Tentative labels beyond the limit are not final.
  for (std::size_t n = 0; n < dist_.size(); ++n) {
    if (!settled_[n]) {
      dist_[n] = std::numeric_limits<double>::infinity();
      pred_edge_[n] = kNoEdge;
    }
  }
}

bool ShortestPathTree::reachable(std::size_t node_idx) const { return settled_[node_idx]; }

std::vector<EdgeId> ShortestPathTree::path_to(std::size_t node_idx) const {
  std::vector<EdgeId> path;
  if (!settled_[node_idx]) return path;
  std::size_t v = node_idx;
  while (v != origin_) {
    const std::size_t ei = pred_edge_[v];
    path.push_back(net_->edges()[ei].id);
    v = net_->from_index(ei);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::optional<Path> shortest_path(const RoadNetwork& net, NodeId origin, NodeId dest,
                                  const EdgeWeight& weight) {
  const std::size_t o = net.node_index(origin);
  const std::size_t d = net.node_index(dest);
  if (o == d) return Path{{}, 0.0};
  const auto weights = weight.materialize(net);
  ShortestPathTree tree(net, o, weights);
  if (!tree.reachable(d)) return std::nullopt;
  return Path{tree.path_to(d), tree.distance(d)};
}

void check_path_continuity(const RoadNetwork& net, std::span<const EdgeId> path) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto& prev = net.edge(path[i - 1]);
    const auto& next = net.edge(path[i]);
    if (prev.to_node != next.from_node) {
      throw ContractError("path is discontinuous between edge " + std::to_string(prev.id) +
                          " and edge " + std::to_string(next.id));
    }
  }
}

double path_travel_time(const RoadNetwork& net, std::span<const EdgeId> path,
                        const TravelTimeLayer* layer) {
  check_path_continuity(net, path);
  double total = 0.0;
  for (const EdgeId id : path) {
    const std::size_t i = net.edge_index(id);
    const double factor = layer ? layer->factor_at(i) : 1.0;
    total += factor * net.edges()[i].freeflow_time_s;
  }
  return total;
}

double path_distance(const RoadNetwork& net, std::span<const EdgeId> path) {
  check_path_continuity(net, path);
  double total = 0.0;
  for (const EdgeId id : path) total += net.edge(id).length_m;
  return total;
}

}  // namespace amodscale
