#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "amodscale/geo.hpp"
#include "amodscale/network.hpp"

namespace amodscale {

using CellId = int;

/// Regular square cells anchored at the south-west corner of the node
/// bounding box. Cell id = row * n_cols + col.
class GridPartition {
 public:
  GridPartition() = default;
  GridPartition(double origin_lon, double origin_lat, double ref_lat, double cell_size_m,
                int n_cols, int n_rows);

  double origin_lon() const { return proj_.lon0; }
  double origin_lat() const { return proj_.lat0; }
  double cell_size_m() const { return cell_size_m_; }
  int n_cols() const { return n_cols_; }
  int n_rows() const { return n_rows_; }
  int cell_count() const { return n_cols_ * n_rows_; }
  const LocalProjection& projection() const { return proj_; }

  /// Points beyond the box are clamped into the border cells.
  CellId cell_of(double lon, double lat) const;
  std::pair<double, double> cell_center(CellId cell) const;  // (lon, lat)
  /// Corners (lon, lat) counter-clockwise from south-west.
  std::vector<std::pair<double, double>> cell_corners(CellId cell) const;

 private:
  LocalProjection proj_;
  double cell_size_m_ = 0.0;
  int n_cols_ = 0;
  int n_rows_ = 0;
};

GridPartition build_grid(const RoadNetwork& net, double cell_size_m);

/// Edge classification by endpoint cells.
struct EdgeZoneIndex {
  std::map<EdgeId, CellId> single_zone;             // E_z
  std::map<EdgeId, std::vector<CellId>> multi_zone; // E_m, sorted cell sets
  std::vector<CellId> node_cells;                   // per dense node index
};

EdgeZoneIndex classify_edges(const RoadNetwork& net, const GridPartition& grid);

/// Cells containing at least one node, ascending.
std::vector<CellId> occupied_cells(const EdgeZoneIndex& index);

/// Node nearest to each occupied cell's center among the nodes of that cell
/// (ties by node id). Keyed by cell id.
std::map<CellId, std::size_t> cell_anchor_nodes(const RoadNetwork& net, const GridPartition& grid,
                                                const EdgeZoneIndex& index);

/// GeoJSON FeatureCollection of cell polygons with an optional value per cell.
void write_grid_geojson(const std::filesystem::path& path, const GridPartition& grid,
                        const std::map<CellId, double>& values, const char* value_name);

}  // namespace amodscale
