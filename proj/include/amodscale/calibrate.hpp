#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amodscale/grid.hpp"
#include "amodscale/network.hpp"
#include "amodscale/tripdata.hpp"

namespace amodscale {

enum class Method { kMfm, kSsm, kAsm };

std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view text);

/// Where an edge's factor came from.
enum class Provenance { kOptimized, kZoneMean, kMultizoneMean, kGlobalMean };

std::string_view provenance_name(Provenance p);

struct CalibConfig {
  EpochSeconds dt_scale_s = 1800;
  double cell_size_m = 1000.0;
  double min_speed_mps = 0.5;  // S_e^min; t_max = length / min_speed
  double solver_tol = 1e-8;
  int solver_max_iter = 200000;
  unsigned threads = 1;

  void validate() const;
};

struct TierCounts {
  std::size_t zone_mean = 0;
  std::size_t multizone_mean = 0;
  std::size_t global_mean = 0;

  std::size_t total() const { return zone_mean + multizone_mean + global_mean; }
};

struct ScalingSolution {
  EpochSeconds period_start = 0;
  EpochSeconds period_length = 0;
  Method method = Method::kMfm;
  std::vector<double> factors;  // aligned with net.edges()
  std::optional<double> f_mean;
  std::optional<double> objective_value;
  std::vector<Provenance> provenance;
  std::size_t trip_count = 0;
  std::size_t target_count = 0;
  std::size_t optimized_edges = 0;  // |E_u| for SSM/ASM
  TierCounts tiers;
  bool degenerate = false;       // E_u empty, all factors 1
  bool carried_forward = false;  // no trips, copied from the previous period
  int solver_iterations = 0;
  double wall_time_s = 0.0;

  double factor(const RoadNetwork& net, EdgeId edge) const;
  TravelTimeLayer layer(const RoadNetwork& net, double min_speed_mps) const;
};

/// Solver failure tagged with the period it occurred in.
class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(EpochSeconds period_start, const std::string& what)
      : std::runtime_error("period " + std::to_string(period_start) + ": " + what),
        period_start_(period_start) {}
  EpochSeconds period_start() const { return period_start_; }

 private:
  EpochSeconds period_start_;
};

struct FallbackResult {
  std::vector<double> factors;
  std::vector<Provenance> provenance;
  TierCounts tiers;
  bool degenerate = false;
};

/// Extends factors optimized over E_u to every edge.
///
///   1. unobserved single-zone edge: mean of optimized single-zone edges of its cell
///   2. unobserved multi-zone edge: mean over optimized single-zone edges of all its cells
///   3. anything left: mean of all optimized factors
///
/// Results are clamped to [1, factor_cap]. With nothing optimized every edge
/// gets 1 and `degenerate` is set.
FallbackResult fallback_fill(const RoadNetwork& net, const EdgeZoneIndex& zones,
                             const std::map<EdgeId, double>& optimized, double min_speed_mps);

/// Mean factor method: f_mean = sum of recorded durations / sum of free-flow
/// shortest-path times over the group's trips; each edge gets f_mean clamped
/// into its box.
ScalingSolution compute_mfm(const TripGroup& group, const RoadNetwork& net, const CalibConfig& cfg);

/// Squared scaling method (box-constrained least squares over E_u + fallback).
ScalingSolution solve_ssm(const TripGroup& group, const RoadNetwork& net, const EdgeZoneIndex& zones,
                          const CalibConfig& cfg);

/// Absolute scaling method (box-constrained L1 over E_u + fallback). Ties are
/// broken toward the smallest sum of factors.
ScalingSolution solve_asm(const TripGroup& group, const RoadNetwork& net, const EdgeZoneIndex& zones,
                          const CalibConfig& cfg);

ScalingSolution solve_period(Method method, const TripGroup& group, const RoadNetwork& net,
                             const EdgeZoneIndex& zones, const CalibConfig& cfg);

/// One solution per group, in period order. Empty periods copy the previous
/// period's solution (all-ones for a leading empty period). Periods run on
/// up to cfg.threads workers.
std::vector<ScalingSolution> calibrate_horizon(std::span<const TripGroup> groups,
                                               const RoadNetwork& net, const EdgeZoneIndex& zones,
                                               const CalibConfig& cfg, Method method);

/// Groups the trips first (default horizon unless given).
std::vector<ScalingSolution> calibrate_horizon(std::span<const SnappedTrip> trips,
                                               const RoadNetwork& net, const GridPartition& grid,
                                               const CalibConfig& cfg, Method method,
                                               std::optional<Horizon> horizon = std::nullopt);

/// Layers of all solutions as a contiguous profile.
TravelTimeProfile make_profile(std::span<const ScalingSolution> solutions, const RoadNetwork& net,
                               const CalibConfig& cfg);

}  // namespace amodscale
