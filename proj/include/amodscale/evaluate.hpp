#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "amodscale/calibrate.hpp"
#include "amodscale/grid.hpp"
#include "amodscale/network.hpp"
#include "amodscale/tripdata.hpp"

namespace amodscale {

/// Errors below this many seconds count as exact.
inline constexpr double kExactErrorS = 1.0;

struct TargetError {
  EpochSeconds period_start = 0;
  NodeId origin_node = 0;
  NodeId dest_node = 0;
  double target_s = 0.0;
  double predicted_s = 0.0;
  double abs_error_s = 0.0;
};

class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(EpochSeconds period_start, const std::string& what)
      : std::runtime_error(what), period_start_(period_start) {}
  EpochSeconds period_start() const { return period_start_; }

 private:
  EpochSeconds period_start_;
};

/// One entry per deduplicated OD target: |t_od - scaled path time|.
/// Throws EvaluationError when a nonempty group has no solution for its period.
std::vector<TargetError> trip_abs_errors(std::span<const TripGroup> groups,
                                         std::span<const ScalingSolution> solutions,
                                         const RoadNetwork& net);

/// Same, but one entry per member trip against its own recorded duration.
std::vector<TargetError> raw_trip_abs_errors(std::span<const TripGroup> groups,
                                             std::span<const ScalingSolution> solutions,
                                             const RoadNetwork& net);

std::vector<double> abs_error_values(std::span<const TargetError> errors);

/// Linear interpolation between order statistics of sorted values, p in [0, 100].
double percentile_sorted(std::span<const double> sorted, double p);

struct PercentileRow {
  std::string label;
  std::size_t count = 0;
  double p5 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p95 = 0.0, max = 0.0;
  double exact_fraction = 0.0;
};

/// Throws DomainError on empty input.
PercentileRow percentile_table(std::span<const double> errors, std::string label = {});

struct Histogram {
  std::vector<double> edges;         // bins [e_i, e_{i+1}), last bin closed
  std::vector<std::size_t> counts;
  std::vector<double> fractions;
  std::size_t overflow_count = 0;    // values outside [e_0, e_last]
  double overflow_fraction = 0.0;
  std::size_t total = 0;
};

/// [0,1 s), [1 s,1 min), [1,2 min), [2,5 min), [5,10 min), [10,80 min].
std::vector<double> default_histogram_edges();

/// Edges must be strictly increasing with at least two entries.
Histogram error_histogram(std::span<const double> errors, std::span<const double> edges);

struct ErrorReport {
  std::string label;
  std::vector<double> abs_errors;
  PercentileRow percentiles;
  Histogram histogram;
  std::optional<PercentileRow> raw_trip_percentiles;
};

ErrorReport make_error_report(const std::string& label, std::span<const TripGroup> groups,
                              std::span<const ScalingSolution> solutions, const RoadNetwork& net,
                              std::span<const double> bin_edges);

struct DistanceDeviation {
  std::size_t trip_count = 0;
  double fraction_within_250m = 0.0;
  double fraction_within_1km = 0.0;
  std::vector<double> deviations_m;  // |sd_distance - recorded distance|
  std::vector<double> speeds_mps;    // sd_distance / duration
  std::optional<PercentileRow> deviation_percentiles;
  std::optional<PercentileRow> speed_percentiles;
};

DistanceDeviation distance_deviation(std::span<const SnappedTrip> trips);

/// Mean factor of single-zone edges per cell.
std::map<CellId, double> cell_mean_factors(const RoadNetwork& net, const EdgeZoneIndex& zones,
                                           const ScalingSolution& solution);

nlohmann::json report_json(std::span<const ErrorReport> reports,
                           const DistanceDeviation* deviation = nullptr);
/// Percentile table in minutes plus the histogram as percentages.
std::string report_markdown(std::span<const ErrorReport> reports);
std::string histogram_csv(std::span<const ErrorReport> reports);
/// Grouped bar chart of histogram percentages.
std::string histogram_svg(std::span<const ErrorReport> reports);

}  // namespace amodscale
