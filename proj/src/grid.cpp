#include "amodscale/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "amodscale/errors.hpp"

namespace amodscale {

GridPartition::GridPartition(double origin_lon, double origin_lat, double ref_lat,
                             double cell_size_m, int n_cols, int n_rows)
    : proj_(origin_lon, origin_lat, ref_lat),
      cell_size_m_(cell_size_m),
      n_cols_(n_cols),
      n_rows_(n_rows) {
  if (!(cell_size_m > 0.0)) throw DomainError("cell size must be positive");
  if (n_cols < 1 || n_rows < 1) throw DomainError("grid needs at least one cell");
}

CellId GridPartition::cell_of(double lon, double lat) const {
  const auto col = static_cast<long long>(std::floor(proj_.x(lon) / cell_size_m_));
  const auto row = static_cast<long long>(std::floor(proj_.y(lat) / cell_size_m_));
  const auto c = std::clamp<long long>(col, 0, n_cols_ - 1);
  const auto r = std::clamp<long long>(row, 0, n_rows_ - 1);
  return static_cast<CellId>(r * n_cols_ + c);
}

std::pair<double, double> GridPartition::cell_center(CellId cell) const {
  const int col = cell % n_cols_;
  const int row = cell / n_cols_;
  return {proj_.lon((col + 0.5) * cell_size_m_), proj_.lat((row + 0.5) * cell_size_m_)};
}

std::vector<std::pair<double, double>> GridPartition::cell_corners(CellId cell) const {
  const int col = cell % n_cols_;
  const int row = cell / n_cols_;
  const double x0 = col * cell_size_m_, x1 = (col + 1) * cell_size_m_;
  const double y0 = row * cell_size_m_, y1 = (row + 1) * cell_size_m_;
  return {{proj_.lon(x0), proj_.lat(y0)},
          {proj_.lon(x1), proj_.lat(y0)},
          {proj_.lon(x1), proj_.lat(y1)},
          {proj_.lon(x0), proj_.lat(y1)}};
}

GridPartition build_grid(const RoadNetwork& net, double cell_size_m) {
  if (!(cell_size_m > 0.0)) throw DomainError("cell size must be positive");
  if (net.node_count() == 0) throw DomainError("cannot build a grid over an empty network");
  double min_lon = std::numeric_limits<double>::infinity(), min_lat = min_lon;
  double max_lon = -min_lon, max_lat = -min_lon;
  for (const auto& n : net.nodes()) {
    min_lon = std::min(min_lon, n.lon);
    max_lon = std::max(max_lon, n.lon);
    min_lat = std::min(min_lat, n.lat);
    max_lat = std::max(max_lat, n.lat);
  }
  const double ref_lat = 0.5 * (min_lat + max_lat);
  const LocalProjection proj(min_lon, min_lat, ref_lat);
  const double width = proj.x(max_lon);
  const double height = proj.y(max_lat);
  const int cols = std::max(1, static_cast<int>(std::ceil(width / cell_size_m)));
  const int rows = std::max(1, static_cast<int>(std::ceil(height / cell_size_m)));
  return GridPartition(min_lon, min_lat, ref_lat, cell_size_m, cols, rows);
}

EdgeZoneIndex classify_edges(const RoadNetwork& net, const GridPartition& grid) {
  EdgeZoneIndex index;
  index.node_cells.reserve(net.node_count());
  for (const auto& n : net.nodes()) index.node_cells.push_back(grid.cell_of(n.lon, n.lat));
  for (std::size_t i = 0; i < net.edge_count(); ++i) {
    const CellId a = index.node_cells[net.from_index(i)];
    const CellId b = index.node_cells[net.to_index(i)];
    const EdgeId id = net.edges()[i].id;
    if (a == b) {
      index.single_zone.emplace(id, a);
    } else {
      index.multi_zone.emplace(id, std::vector<CellId>{std::min(a, b), std::max(a, b)});
    }
  }
  return index;
}

std::vector<CellId> occupied_cells(const EdgeZoneIndex& index) {
  std::vector<CellId> cells = index.node_cells;
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

std::map<CellId, std::size_t> cell_anchor_nodes(const RoadNetwork& net, const GridPartition& grid,
                                                const EdgeZoneIndex& index) {
  std::map<CellId, std::size_t> anchors;
  std::map<CellId, double> best;
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const CellId c = index.node_cells[i];
    const auto [clon, clat] = grid.cell_center(c);
    const auto& n = net.nodes()[i];
    const double d = equirectangular_m(n.lon, n.lat, clon, clat);
    const auto it = best.find(c);
    if (it == best.end() || d < it->second ||
        (d == it->second && n.id < net.nodes()[anchors[c]].id)) {
      best[c] = d;
      anchors[c] = i;
    }
  }
  return anchors;
}

void write_grid_geojson(const std::filesystem::path& path, const GridPartition& grid,
                        const std::map<CellId, double>& values, const char* value_name) {
  nlohmann::json features = nlohmann::json::array();
  for (CellId c = 0; c < grid.cell_count(); ++c) {
    nlohmann::json ring = nlohmann::json::array();
    auto corners = grid.cell_corners(c);
    corners.push_back(corners.front());
    for (const auto& [lon, lat] : corners) ring.push_back({lon, lat});
    nlohmann::json props{{"cell_id", c}};
    if (const auto it = values.find(c); it != values.end()) {
      props[value_name] = it->second;
    } else {
      props[value_name] = nullptr;
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
                        {"properties", props}});
  }
  const nlohmann::json doc{{"type", "FeatureCollection"}, {"features", features}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

}  // namespace amodscale
