#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "amodscale/network.hpp"

namespace amodscale {

inline constexpr double kMphToMps = 0.44704;
inline constexpr double kDefaultMinTripSpeedMps = 1.0 * kMphToMps;
inline constexpr double kDefaultMaxTripSpeedMps = 55.0 * kMphToMps;

struct TripRecord {
  EpochSeconds pickup_time = 0;
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double dest_lon = 0.0;
  double dest_lat = 0.0;
  double duration_s = 0.0;
  double distance_m = 0.0;

  double speed_mps() const { return distance_m / duration_s; }
};

struct ParsedTrips {
  std::vector<TripRecord> trips;
  std::size_t skipped_rows = 0;
};

/// Parses "YYYY-MM-DD[T ]hh:mm[:ss[.fff]]" as local time and converts to UTC
/// epoch seconds: epoch = local - utc_offset_s. Throws ParseError.
EpochSeconds parse_local_datetime(std::string_view text, long long utc_offset_s);

/// "+HH:MM", "-HH:MM", "-4", "5.5" (hours) -> seconds. Throws ParseError.
long long parse_utc_offset(std::string_view text);

/// Reads the trips CSV. An unreadable file throws; malformed rows (bad field,
/// nonpositive duration or distance, non-finite coordinate) are skipped and
/// counted.
ParsedTrips parse_trips(const std::filesystem::path& path, long long utc_offset_s = 0);

/// Keeps trips with min_speed <= distance/duration <= max_speed.
std::vector<TripRecord> filter_trips(std::span<const TripRecord> trips,
                                     double min_speed_mps = kDefaultMinTripSpeedMps,
                                     double max_speed_mps = kDefaultMaxTripSpeedMps);

struct SnappedTrip {
  TripRecord trip;
  NodeId origin_node = 0;
  NodeId dest_node = 0;
  std::vector<EdgeId> sd_path;  // shortest-distance path
  double sd_distance_m = 0.0;
};

struct SnapOptions {
  double max_speed_mps = kDefaultMaxTripSpeedMps;
  std::optional<double> max_snap_m;
};

struct SnapStats {
  std::size_t same_node = 0;
  std::size_t unreachable = 0;
  std::size_t too_fast = 0;
  std::size_t snap_too_far = 0;

  std::size_t dropped() const { return same_node + unreachable + too_fast + snap_too_far; }
};

struct SnapResult {
  std::vector<SnappedTrip> trips;  // input order preserved
  SnapStats stats;
};

/// Nearest-node snapping followed by shortest-distance routing. One Dijkstra
/// per distinct origin node.
SnapResult snap_and_route(const RoadNetwork& net, std::span<const TripRecord> trips,
                          const SnapOptions& options = {});

struct OdTarget {
  NodeId origin_node = 0;
  NodeId dest_node = 0;
  double target_s = 0.0;  // mean duration of the collapsed trips
  std::vector<EdgeId> path;
  std::size_t trip_count = 0;
  double min_duration_s = 0.0;
  double max_duration_s = 0.0;
};

struct TripGroup {
  EpochSeconds period_start = 0;
  EpochSeconds period_length = 0;
  std::vector<OdTarget> targets;      // sorted by (origin_node, dest_node)
  std::vector<EdgeId> union_edges;    // sorted
  std::vector<SnappedTrip> members;   // canonical order

  bool empty() const { return targets.empty(); }
};

/// Half-open [start, end).
struct Horizon {
  EpochSeconds start = 0;
  EpochSeconds end = 0;
};

/// Smallest period-aligned horizon containing every pickup time.
Horizon default_horizon(std::span<const SnappedTrip> trips, EpochSeconds period_length_s);

/// One group per period in the horizon, including empty ones. Trips outside
/// the horizon are ignored.
std::vector<TripGroup> group_by_period(std::span<const SnappedTrip> trips,
                                       EpochSeconds period_length_s, Horizon horizon);

}  // namespace amodscale
