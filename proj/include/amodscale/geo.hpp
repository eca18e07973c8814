#pragma once

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "amodscale/network.hpp"

namespace amodscale {

inline constexpr double kEarthRadiusM = 6371008.8;

/// Equirectangular approximation, adequate at city scale.
double equirectangular_m(double lon1, double lat1, double lon2, double lat2);

/// Local planar projection (meters) around a reference point.
struct LocalProjection {
  double lon0 = 0.0;
  double lat0 = 0.0;
  double cos_ref = 1.0;

  LocalProjection() = default;
  LocalProjection(double lon_origin, double lat_origin, double lat_ref);

  double x(double lon) const;
  double y(double lat) const;
  double lon(double x_m) const;
  double lat(double y_m) const;
};

struct NearestNode {
  std::size_t node_idx = 0;
  double distance_m = 0.0;
};

/// Nearest-node lookup over a bucketed planar index.
class NodeLocator {
 public:
  explicit NodeLocator(const RoadNetwork& net, double bucket_m = 250.0);

  /// Ties go to the smaller node id. Requires a nonempty network.
  NearestNode nearest(double lon, double lat) const;

 private:
  long long key(long long cx, long long cy) const { return cx * 1000003LL + cy; }

  const RoadNetwork* net_;
  LocalProjection proj_;
  double bucket_m_;
  long long min_cx_ = 0, max_cx_ = 0, min_cy_ = 0, max_cy_ = 0;
  std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

}  // namespace amodscale
