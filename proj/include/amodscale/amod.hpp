#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "amodscale/grid.hpp"
#include "amodscale/network.hpp"
#include "amodscale/tripdata.hpp"

namespace amodscale {

struct SimConfig {
  std::size_t fleet_size = 1;
  double dt_batch_s = 30.0;
  double dt_max_s = 360.0;
  double dt_reposition_s = 1800.0;
  double zeta = 0.5;                        // per served customer
  double fare_per_km = 0.5;                 // f^D
  double cost_per_km = 0.25;                // c^D
  double fixed_cost_per_vehicle_day = 25.0; // c^F
  double n_days = 1.0;
  double cell_size_m = 1000.0;              // repositioning regions
  std::uint64_t seed = 0;
  bool force_serve = false;

  /// Throws DomainError.
  void validate() const;
};

/// `key = value` lines with the SimConfig field names; `#`/`;` comments and
/// `[section]` headers are ignored. Keys not present keep their value from
/// `base`. Throws ParseError on unknown keys or bad values.
SimConfig parse_sim_config(const std::filesystem::path& path, SimConfig base = {});
SimConfig parse_sim_config_text(std::string_view text, SimConfig base = {});

nlohmann::json sim_config_json(const SimConfig& cfg);

enum class RequestStatus { kPending, kAssigned, kServed, kRejected };

std::string_view request_status_name(RequestStatus s);

struct Request {
  std::size_t id = 0;
  double t_r = 0.0;
  std::size_t origin_idx = 0;  // dense node indices
  std::size_t dest_idx = 0;
  double d_od_m = 0.0;         // shortest-distance o -> d
  RequestStatus status = RequestStatus::kPending;
  std::optional<std::size_t> vehicle;
  std::optional<double> pickup_time;
  std::optional<double> dropoff_time;
};

/// One request per trip, ordered by pickup time (input order breaks ties).
std::vector<Request> generate_requests(const RoadNetwork& net, std::span<const SnappedTrip> trips);

enum class LegKind { kReposition, kPickup, kDropoff };

std::string_view leg_kind_name(LegKind k);

struct Leg {
  LegKind kind = LegKind::kPickup;
  std::optional<std::size_t> request;
  std::size_t from_idx = 0;
  std::size_t to_idx = 0;
  double start = 0.0;
  double end = 0.0;
  double distance_m = 0.0;
};

struct Vehicle {
  std::size_t id = 0;
  std::size_t free_node = 0;  // dense node index where the plan ends
  double free_time = 0.0;
  double odometer_m = 0.0;
  std::vector<Leg> legs;
};

/// Routing times come from the profile layer in force at departure, or free
/// flow when no profile is given.
class TravelTimeSource {
 public:
  TravelTimeSource() = default;  // free flow
  explicit TravelTimeSource(const TravelTimeProfile* profile) : profile_(profile) {}

  bool freeflow() const { return profile_ == nullptr; }
  const TravelTimeProfile* profile() const { return profile_; }
  /// nullptr for free flow.
  const TravelTimeLayer* layer_at(double t) const;

 private:
  const TravelTimeProfile* profile_ = nullptr;
};

/// ζ + f^D d_od − c^D (deadhead + d_od), distances in meters, prices per km.
double pair_weight(const SimConfig& cfg, double deadhead_m, double d_od_m);

struct PairCandidate {
  std::size_t request_pos = 0;  // index into the batch
  std::size_t vehicle_pos = 0;  // index into the fleet
  double depart = 0.0;
  double arrival = 0.0;         // at the request origin
  double deadhead_m = 0.0;
  double weight = 0.0;
};

/// Every vehicle-request pair with arrival <= t_r + dt_max. Vehicles leave
/// from (free_node, max(free_time, decision_time)).
std::vector<PairCandidate> feasible_pairs(const RoadNetwork& net, std::span<const Vehicle> fleet,
                                          std::span<const Request> batch, double decision_time,
                                          const SimConfig& cfg, const TravelTimeSource& source);

struct BatchAssignment {
  std::vector<PairCandidate> matched;  // ordered by request_pos
  double total_weight = 0.0;
  std::size_t feasible_pair_count = 0;
};

BatchAssignment batch_assign(const RoadNetwork& net, std::span<const Vehicle> fleet,
                             std::span<const Request> batch, double decision_time,
                             const SimConfig& cfg, const TravelTimeSource& source);

/// Dense node index per vehicle, round-robin over the cells' anchor nodes in
/// a seeded shuffled cell order.
std::vector<std::size_t> initial_positions(const RoadNetwork& net, const GridPartition& grid,
                                           const EdgeZoneIndex& zones, std::size_t fleet_size,
                                           std::uint64_t seed);

struct RepositionMove {
  std::size_t vehicle_pos = 0;
  CellId from_cell = 0;
  CellId to_cell = 0;
  std::size_t target_idx = 0;  // anchor node of to_cell
};

/// Idle vehicles (free_time <= now) are spread toward floor(idle / cells)
/// per occupied cell. Surplus vehicles, in id order, go to the nearest cell
/// that still has a deficit (ties by cell id).
std::vector<RepositionMove> plan_reposition(const RoadNetwork& net, std::span<const Vehicle> fleet,
                                            const EdgeZoneIndex& zones,
                                            const std::map<CellId, std::size_t>& anchors,
                                            double now);

struct SimEvent {
  double time = 0.0;
  std::string entity;
  std::string event;
  std::string detail;  // key=value;key=value
};

struct SimKpis {
  std::size_t requests = 0;
  std::size_t served = 0;
  std::size_t rejected = 0;
  double service_rate = 0.0;
  double revenue = 0.0;
  double cost = 0.0;
  double profit = 0.0;
  double mean_wait_s = 0.0;
  double p50_wait_s = 0.0;
  double p95_wait_s = 0.0;
  double max_wait_s = 0.0;
  double fleet_distance_km = 0.0;
  double deadhead_km = 0.0;
  double reposition_km = 0.0;
  double occupied_km = 0.0;
  std::size_t batches = 0;
  std::size_t feasible_pairs = 0;
  std::size_t reposition_moves = 0;
};

struct SimResult {
  std::vector<Request> requests;
  std::vector<Vehicle> fleet;
  std::vector<SimEvent> events;  // chronological
  SimKpis kpis;
};

/// Batched simulation from the first request time until every request is
/// decided and every committed leg is finished. A profile that does not
/// cover the request times is rejected before the run starts.
SimResult run_simulation(const SimConfig& cfg, std::vector<Request> requests, const RoadNetwork& net,
                         const GridPartition& grid, const TravelTimeSource& source);

/// Profit recomputed from a result's own requests and odometers.
double profit_from_result(const SimConfig& cfg, const SimResult& result);

std::string event_log_csv(std::span<const SimEvent> events);
nlohmann::json kpi_json(const SimKpis& kpis);

}  // namespace amodscale
