#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "amodscale/calibrate.hpp"
#include "amodscale/network.hpp"

namespace amodscale {

/// Shortest text that round-trips to the same double.
std::string format_double(double value);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// `period_start_epoch_s,edge_id,factor` rows in network edge order.
std::string layer_csv(const RoadNetwork& net, const ScalingSolution& solution);

/// Per-period metadata: method, objective, counts, fallback tiers.
nlohmann::json solution_sidecar(const ScalingSolution& solution);

/// File stem used for one period's outputs, e.g. "layer_1465203600".
std::string layer_stem(EpochSeconds period_start);

/// Writes layer CSV + sidecar JSON per solution into `dir`; returns the paths.
std::vector<std::filesystem::path> write_profile(const std::filesystem::path& dir,
                                                 const RoadNetwork& net,
                                                 std::span<const ScalingSolution> solutions);

/// Reads every layer CSV in `dir` (or a single CSV file). The period length
/// comes from the sidecars when present, else from `period_length_s`.
TravelTimeProfile read_profile(const std::filesystem::path& path, const RoadNetwork& net,
                               double min_speed_mps,
                               std::optional<EpochSeconds> period_length_s = std::nullopt);

}  // namespace amodscale
