#include "amodscale/tripdata.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "amodscale/errors.hpp"
#include "amodscale/geo.hpp"
#include "csv.hpp"

namespace amodscale {

namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw ParseError("datetime too short: " + std::string(s));
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') throw ParseError("bad datetime: " + std::string(s));
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

bool canonical_less(const SnappedTrip& a, const SnappedTrip& b) {
  return std::tie(a.trip.pickup_time, a.origin_node, a.dest_node, a.trip.duration_s,
                  a.trip.distance_m, a.trip.origin_lon, a.trip.origin_lat, a.trip.dest_lon,
                  a.trip.dest_lat) <
         std::tie(b.trip.pickup_time, b.origin_node, b.dest_node, b.trip.duration_s,
                  b.trip.distance_m, b.trip.origin_lon, b.trip.origin_lat, b.trip.dest_lon,
                  b.trip.dest_lat);
}

EpochSeconds floor_div(EpochSeconds a, EpochSeconds b) {
  EpochSeconds q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

EpochSeconds parse_local_datetime(std::string_view text, long long utc_offset_s) {
  const auto s = csv::trim(text);
  // YYYY-MM-DD?hh:mm[:ss[.fff]]
  if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':') {
    throw ParseError("bad datetime: " + std::string(s));
  }
  const int y = digits(s, 0, 4);
  const unsigned mo = static_cast<unsigned>(digits(s, 5, 2));
  const unsigned d = static_cast<unsigned>(digits(s, 8, 2));
  const int hh = digits(s, 11, 2);
  const int mm = digits(s, 14, 2);
  int ss = 0;
  if (s.size() >= 19) {
    if (s[16] != ':') throw ParseError("bad datetime: " + std::string(s));
    ss = digits(s, 17, 2);
    if (s.size() > 19 && s[19] != '.') throw ParseError("bad datetime: " + std::string(s));
  } else if (s.size() != 16) {
    throw ParseError("bad datetime: " + std::string(s));
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw ParseError("invalid datetime: " + std::string(s));
  }
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  const long long local = static_cast<long long>(days) * 86400LL + hh * 3600LL + mm * 60LL + ss;
  return local - utc_offset_s;
}

long long parse_utc_offset(std::string_view text) {
  auto s = csv::trim(text);
  if (s.empty()) return 0;
  if (const auto colon = s.find(':'); colon != std::string_view::npos) {
    int sign = 1;
    if (s.front() == '+' || s.front() == '-') {
      sign = s.front() == '-' ? -1 : 1;
      s.remove_prefix(1);
    }
    const auto parts = csv::split(s, ':');
    const auto h = csv::to_int(parts[0]);
    const auto m = parts.size() > 1 ? csv::to_int(parts[1]) : std::optional<long long>(0);
    if (parts.size() != 2 || !h || !m || *m >= 60) {
      throw ParseError("bad UTC offset: " + std::string(text));
    }
    return sign * (*h * 3600 + *m * 60);
  }
  const auto hours = csv::to_double(s);
  if (!hours || std::abs(*hours) > 18.0) throw ParseError("bad UTC offset: " + std::string(text));
  return std::llround(*hours * 3600.0);
}

ParsedTrips parse_trips(const std::filesystem::path& path, long long utc_offset_s) {
  csv::Reader reader(path, {"pickup_datetime", "origin_lon", "origin_lat", "dest_lon", "dest_lat",
                            "duration_s", "distance_m"});
  ParsedTrips out;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() < 7) {
      ++out.skipped_rows;
      continue;
    }
    TripRecord t;
    try {
      t.pickup_time = parse_local_datetime(f[0], utc_offset_s);
    } catch (const ParseError&) {
      ++out.skipped_rows;
      continue;
    }
    const auto olon = csv::to_double(f[1]);
    const auto olat = csv::to_double(f[2]);
    const auto dlon = csv::to_double(f[3]);
    const auto dlat = csv::to_double(f[4]);
    const auto dur = csv::to_double(f[5]);
    const auto dist = csv::to_double(f[6]);
    if (!olon || !olat || !dlon || !dlat || !dur || !dist || !(*dur > 0.0) || !(*dist > 0.0)) {
      ++out.skipped_rows;
      continue;
    }
    t.origin_lon = *olon;
    t.origin_lat = *olat;
    t.dest_lon = *dlon;
    t.dest_lat = *dlat;
    t.duration_s = *dur;
    t.distance_m = *dist;
    out.trips.push_back(t);
  }
  return out;
}

std::vector<TripRecord> filter_trips(std::span<const TripRecord> trips, double min_speed_mps,
                                     double max_speed_mps) {
  std::vector<TripRecord> out;
  out.reserve(trips.size());
  for (const auto& t : trips) {
    const double v = t.speed_mps();
    if (v >= min_speed_mps && v <= max_speed_mps) out.push_back(t);
  }
  return out;
}

SnapResult snap_and_route(const RoadNetwork& net, std::span<const TripRecord> trips,
                          const SnapOptions& options) {
  SnapResult result;
  if (trips.empty()) return result;
  const NodeLocator locator(net);

  struct Pending {
    std::size_t trip;
    std::size_t origin;
    std::size_t dest;
  };
  std::vector<std::optional<Pending>> pending(trips.size());
  std::map<std::size_t, std::vector<std::size_t>> by_origin;

  for (std::size_t i = 0; i < trips.size(); ++i) {
    const auto& t = trips[i];
    const auto o = locator.nearest(t.origin_lon, t.origin_lat);
    const auto d = locator.nearest(t.dest_lon, t.dest_lat);
    if (options.max_snap_m && (o.distance_m > *options.max_snap_m || d.distance_m > *options.max_snap_m)) {
      ++result.stats.snap_too_far;
      continue;
    }
    if (o.node_idx == d.node_idx) {
      ++result.stats.same_node;
      continue;
    }
    pending[i] = Pending{i, o.node_idx, d.node_idx};
    by_origin[o.node_idx].push_back(i);
  }

  const auto weights = EdgeWeight::distance().materialize(net);
  std::vector<std::optional<SnappedTrip>> routed(trips.size());
  for (const auto& [origin, members] : by_origin) {
    const ShortestPathTree tree(net, origin, weights);
    for (const std::size_t i : members) {
      const auto& p = *pending[i];
      if (!tree.reachable(p.dest)) {
        ++result.stats.unreachable;
        continue;
      }
      SnappedTrip s;
      s.trip = trips[i];
      s.origin_node = net.nodes()[p.origin].id;
      s.dest_node = net.nodes()[p.dest].id;
      s.sd_path = tree.path_to(p.dest);
      s.sd_distance_m = tree.distance(p.dest);
      if (s.sd_distance_m / s.trip.duration_s > options.max_speed_mps) {
        ++result.stats.too_fast;
        continue;
      }
      routed[i] = std::move(s);
    }
  }
  for (auto& r : routed) {
    if (r) result.trips.push_back(std::move(*r));
  }
  return result;
}

Horizon default_horizon(std::span<const SnappedTrip> trips, EpochSeconds period_length_s) {
  if (period_length_s <= 0) throw DomainError("period length must be positive");
  if (trips.empty()) return {};
  EpochSeconds lo = trips.front().trip.pickup_time, hi = lo;
  for (const auto& t : trips) {
    lo = std::min(lo, t.trip.pickup_time);
    hi = std::max(hi, t.trip.pickup_time);
  }
  const EpochSeconds start = floor_div(lo, period_length_s) * period_length_s;
  const EpochSeconds end = (floor_div(hi, period_length_s) + 1) * period_length_s;
  return {start, end};
}

std::vector<TripGroup> group_by_period(std::span<const SnappedTrip> trips,
                                       EpochSeconds period_length_s, Horizon horizon) {
  if (period_length_s <= 0) throw DomainError("period length must be positive");
  if (horizon.end < horizon.start) throw DomainError("horizon end before start");
  const auto n_periods =
      static_cast<std::size_t>((horizon.end - horizon.start + period_length_s - 1) / period_length_s);

  std::vector<TripGroup> groups(n_periods);
  for (std::size_t k = 0; k < n_periods; ++k) {
    groups[k].period_start = horizon.start + static_cast<EpochSeconds>(k) * period_length_s;
    groups[k].period_length = period_length_s;
  }
  for (const auto& t : trips) {
    const auto pt = t.trip.pickup_time;
    if (pt < horizon.start || pt >= horizon.end) continue;
    const auto k = static_cast<std::size_t>((pt - horizon.start) / period_length_s);
    groups[k].members.push_back(t);
  }

  for (auto& g : groups) {
    std::sort(g.members.begin(), g.members.end(), canonical_less);
    std::map<std::pair<NodeId, NodeId>, std::vector<const SnappedTrip*>> by_od;
    for (const auto& m : g.members) by_od[{m.origin_node, m.dest_node}].push_back(&m);

    std::set<EdgeId> edges;
    for (const auto& [od, list] : by_od) {
      std::vector<double> durations;
      durations.reserve(list.size());
      for (const auto* m : list) durations.push_back(m->trip.duration_s);
      std::sort(durations.begin(), durations.end());
      const double sum = std::accumulate(durations.begin(), durations.end(), 0.0);

      OdTarget target;
      target.origin_node = od.first;
      target.dest_node = od.second;
      target.target_s = std::clamp(sum / static_cast<double>(durations.size()), durations.front(),
                                   durations.back());
      // Snapped node pairs share one deterministic shortest-distance path.
      target.path = list.front()->sd_path;
      target.trip_count = list.size();
      target.min_duration_s = durations.front();
      target.max_duration_s = durations.back();
      edges.insert(target.path.begin(), target.path.end());
      g.targets.push_back(std::move(target));
    }
    g.union_edges.assign(edges.begin(), edges.end());
  }
  return groups;
}

}  // namespace amodscale
