#include "amodscale/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "amodscale/errors.hpp"

namespace amodscale {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

double equirectangular_m(double lon1, double lat1, double lon2, double lat2) {
  const double phi_m = 0.5 * (lat1 + lat2) * kDegToRad;
  const double dx = (lon2 - lon1) * kDegToRad * std::cos(phi_m);
  const double dy = (lat2 - lat1) * kDegToRad;
  return kEarthRadiusM * std::sqrt(dx * dx + dy * dy);
}

LocalProjection::LocalProjection(double lon_origin, double lat_origin, double lat_ref)
    : lon0(lon_origin), lat0(lat_origin), cos_ref(std::cos(lat_ref * kDegToRad)) {}

double LocalProjection::x(double lon_deg) const {
  return (lon_deg - lon0) * kDegToRad * cos_ref * kEarthRadiusM;
}
double LocalProjection::y(double lat_deg) const {
  return (lat_deg - lat0) * kDegToRad * kEarthRadiusM;
}
double LocalProjection::lon(double x_m) const {
  return lon0 + x_m / (kDegToRad * cos_ref * kEarthRadiusM);
}
double LocalProjection::lat(double y_m) const { return lat0 + y_m / (kDegToRad * kEarthRadiusM); }

NodeLocator::NodeLocator(const RoadNetwork& net, double bucket_m) : net_(&net), bucket_m_(bucket_m) {
  if (net.node_count() == 0) throw DomainError("cannot index an empty network");
  double min_lon = std::numeric_limits<double>::infinity(), min_lat = min_lon;
  double max_lat = -min_lon;
  for (const auto& n : net.nodes()) {
    min_lon = std::min(min_lon, n.lon);
    min_lat = std::min(min_lat, n.lat);
    max_lat = std::max(max_lat, n.lat);
  }
  proj_ = LocalProjection(min_lon, min_lat, 0.5 * (min_lat + max_lat));
  bool first = true;
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const auto& n = net.nodes()[i];
    const auto cx = static_cast<long long>(std::floor(proj_.x(n.lon) / bucket_m_));
    const auto cy = static_cast<long long>(std::floor(proj_.y(n.lat) / bucket_m_));
    buckets_[key(cx, cy)].push_back(i);
    if (first) {
      min_cx_ = max_cx_ = cx;
      min_cy_ = max_cy_ = cy;
      first = false;
    }
    min_cx_ = std::min(min_cx_, cx);
    max_cx_ = std::max(max_cx_, cx);
    min_cy_ = std::min(min_cy_, cy);
    max_cy_ = std::max(max_cy_, cy);
  }
}

NearestNode NodeLocator::nearest(double lon, double lat) const {
  const double px = proj_.x(lon);
  const double py = proj_.y(lat);
  const auto cx = static_cast<long long>(std::floor(px / bucket_m_));
  const auto cy = static_cast<long long>(std::floor(py / bucket_m_));

  NearestNode best{0, std::numeric_limits<double>::infinity()};
  bool found = false;
  const auto consider = [&](std::size_t idx) {
    const auto& n = net_->nodes()[idx];
    const double d = equirectangular_m(lon, lat, n.lon, n.lat);
    if (!found || d < best.distance_m ||
        (d == best.distance_m && n.id < net_->nodes()[best.node_idx].id)) {
      best = {idx, d};
      found = true;
    }
  };

  if (cx < min_cx_ - 2 || cx > max_cx_ + 2 || cy < min_cy_ - 2 || cy > max_cy_ + 2) {
    for (std::size_t i = 0; i < net_->node_count(); ++i) consider(i);
    return best;
  }

  // Expand square rings until the ring's inner distance exceeds the best hit.
  const long long max_ring =
      std::max({std::abs(cx - min_cx_), std::abs(cx - max_cx_), std::abs(cy - min_cy_),
                std::abs(cy - max_cy_)}) + 1;
  for (long long ring = 0; ring <= max_ring; ++ring) {
    if (found && static_cast<double>(ring - 1) * bucket_m_ > best.distance_m * 1.01 + 1.0) break;
    for (long long dx = -ring; dx <= ring; ++dx) {
      for (long long dy = -ring; dy <= ring; ++dy) {
        if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
        const auto it = buckets_.find(key(cx + dx, cy + dy));
        if (it == buckets_.end()) continue;
        for (const auto idx : it->second) consider(idx);
      }
    }
  }
  return best;
}

}  // namespace amodscale
