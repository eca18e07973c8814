#include "amodscale/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "amodscale/errors.hpp"
#include "csv.hpp"

namespace amodscale {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string layer_csv(const RoadNetwork& net, const ScalingSolution& solution) {
  if (solution.factors.size() != net.edge_count()) throw ContractError("solution/network mismatch");
  std::string out = "period_start_epoch_s,edge_id,factor\n";
  const std::string start = std::to_string(solution.period_start);
  for (std::size_t i = 0; i < net.edge_count(); ++i) {
    out += start;
    out += ',';
    out += std::to_string(net.edges()[i].id);
    out += ',';
    out += format_double(solution.factors[i]);
    out += '\n';
  }
  return out;
}

nlohmann::json solution_sidecar(const ScalingSolution& s) {
  nlohmann::json j;
  j["period_start_epoch_s"] = s.period_start;
  j["period_length_s"] = s.period_length;
  j["method"] = std::string(method_name(s.method));
  j["objective_value"] = s.objective_value ? nlohmann::json(*s.objective_value) : nlohmann::json();
  j["f_mean"] = s.f_mean ? nlohmann::json(*s.f_mean) : nlohmann::json();
  j["trip_count"] = s.trip_count;
  j["target_count"] = s.target_count;
  j["observed_edges"] = s.optimized_edges;
  j["tiers"] = {{"zone_mean", s.tiers.zone_mean},
                {"multizone_mean", s.tiers.multizone_mean},
                {"global_mean", s.tiers.global_mean}};
  j["degenerate"] = s.degenerate;
  j["carried_forward"] = s.carried_forward;
  j["solver_iterations"] = s.solver_iterations;
  return j;
}

std::string layer_stem(EpochSeconds period_start) {
  return "layer_" + std::to_string(period_start);
}

std::vector<std::filesystem::path> write_profile(const std::filesystem::path& dir,
                                                 const RoadNetwork& net,
                                                 std::span<const ScalingSolution> solutions) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& s : solutions) {
    const auto csv_path = dir / (layer_stem(s.period_start) + ".csv");
    const auto json_path = dir / (layer_stem(s.period_start) + ".json");
    write_file_atomic(csv_path, layer_csv(net, s));
    write_file_atomic(json_path, solution_sidecar(s).dump(2) + "\n");
    written.push_back(csv_path);
    written.push_back(json_path);
  }
  return written;
}

TravelTimeProfile read_profile(const std::filesystem::path& path, const RoadNetwork& net,
                               double min_speed_mps, std::optional<EpochSeconds> period_length_s) {
  std::vector<std::filesystem::path> files;
  std::optional<EpochSeconds> sidecar_length;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      const auto& p = entry.path();
      if (p.extension() == ".csv") files.push_back(p);
      if (p.extension() == ".json" && p.stem().string().rfind("layer_", 0) == 0) {
        std::ifstream in(p);
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (!j.is_discarded() && j.contains("period_length_s")) {
          sidecar_length = j["period_length_s"].get<EpochSeconds>();
        }
      }
    }
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::exists(path)) {
    files.push_back(path);
  } else {
    throw ParseError("profile path does not exist: " + path.string());
  }
  if (files.empty()) throw ParseError("no layer CSV files in " + path.string());

  std::map<EpochSeconds, std::vector<double>> factors;
  std::map<EpochSeconds, std::size_t> filled;
  for (const auto& f : files) {
    csv::Reader reader(f, {"period_start_epoch_s", "edge_id", "factor"});
    std::vector<std::string_view> row;
    while (reader.next(row)) {
      if (row.size() < 3) throw ParseError(reader.where() + ": expected 3 fields");
      const auto start = csv::to_int(row[0]);
      const auto edge = csv::to_int(row[1]);
      const auto factor = csv::to_double(row[2]);
      if (!start || !edge || !factor) throw ParseError(reader.where() + ": malformed layer row");
      const auto idx = net.find_edge(*edge);
      if (!idx) throw ReferenceError(reader.where() + ": unknown edge " + std::to_string(*edge));
      auto& vec = factors[*start];
      if (vec.empty()) vec.assign(net.edge_count(), std::numeric_limits<double>::quiet_NaN());
      if (std::isnan(vec[*idx])) ++filled[*start];
      vec[*idx] = *factor;
    }
  }
  std::vector<TravelTimeLayer> layers;
  for (auto& [start, vec] : factors) {
    if (filled[start] != net.edge_count()) {
      throw ReferenceError("layer for period " + std::to_string(start) + " covers " +
                           std::to_string(filled[start]) + " of " +
                           std::to_string(net.edge_count()) + " edges");
    }
    layers.emplace_back(net, start, std::move(vec), min_speed_mps);
  }

  EpochSeconds length = 0;
  if (period_length_s) {
    length = *period_length_s;
  } else if (sidecar_length) {
    length = *sidecar_length;
  } else if (layers.size() >= 2) {
    length = layers[1].period_start() - layers[0].period_start();
  } else {
    length = 1800;
  }
  return TravelTimeProfile(std::move(layers), length);
}

}  // namespace amodscale
