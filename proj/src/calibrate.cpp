#include "amodscale/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include <Eigen/Dense>

#include "amodscale/errors.hpp"
#include "amodscale/solvers.hpp"

namespace amodscale {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kMfm: return "mfm";
    case Method::kSsm: return "ssm";
    case Method::kAsm: return "asm";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view text) {
  if (text == "mfm" || text == "MFM") return Method::kMfm;
  if (text == "ssm" || text == "SSM") return Method::kSsm;
  if (text == "asm" || text == "ASM") return Method::kAsm;
  return std::nullopt;
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kOptimized: return "optimized";
    case Provenance::kZoneMean: return "zone_mean";
    case Provenance::kMultizoneMean: return "multizone_mean";
    case Provenance::kGlobalMean: return "global_mean";
  }
  return "?";
}

void CalibConfig::validate() const {
  if (dt_scale_s <= 0) throw DomainError("dt_scale must be positive");
  if (!(cell_size_m > 0.0)) throw DomainError("cell size must be positive");
  if (!(min_speed_mps > 0.0)) throw DomainError("minimum speed must be positive");
  if (!(solver_tol > 0.0)) throw DomainError("solver tolerance must be positive");
  if (solver_max_iter <= 0) throw DomainError("solver iteration limit must be positive");
  if (threads == 0) throw DomainError("thread count must be positive");
}

double ScalingSolution::factor(const RoadNetwork& net, EdgeId edge) const {
  return factors.at(net.edge_index(edge));
}

TravelTimeLayer ScalingSolution::layer(const RoadNetwork& net, double min_speed_mps) const {
  return TravelTimeLayer(net, period_start, factors, min_speed_mps);
}

namespace {

double clamp_factor(const EdgeRecord& e, double x, double min_speed_mps) {
  return std::clamp(x, 1.0, std::max(1.0, factor_cap(e, min_speed_mps)));
}

double mean(const std::vector<double>& values) {
  double s = 0.0;
  for (const double v : values) s += v;
  return s / static_cast<double>(values.size());
}

ScalingSolution blank_solution(const TripGroup& group, const RoadNetwork& net, Method method) {
  ScalingSolution sol;
  sol.period_start = group.period_start;
  sol.period_length = group.period_length;
  sol.method = method;
  sol.factors.assign(net.edge_count(), 1.0);
  sol.provenance.assign(net.edge_count(), Provenance::kGlobalMean);
  sol.trip_count = group.members.size();
  sol.target_count = group.targets.size();
  return sol;
}

// Observed-edge system in edge-time variables y_e = x_e * t_flow_e:
// rows are OD targets, A[c][e] = 1 if e lies on the path of c.
struct ObservedSystem {
  std::vector<std::size_t> edge_idx;  // column -> dense edge index
  Eigen::MatrixXd A;
  Eigen::VectorXd b, lo, hi;
};

ObservedSystem build_system(const TripGroup& group, const RoadNetwork& net, double min_speed_mps) {
  ObservedSystem sys;
  std::map<std::size_t, Eigen::Index> column;
  for (const EdgeId id : group.union_edges) {
    const std::size_t idx = net.edge_index(id);
    column.emplace(idx, static_cast<Eigen::Index>(sys.edge_idx.size()));
    sys.edge_idx.push_back(idx);
  }
  const auto rows = static_cast<Eigen::Index>(group.targets.size());
  const auto cols = static_cast<Eigen::Index>(sys.edge_idx.size());
  sys.A = Eigen::MatrixXd::Zero(rows, cols);
  sys.b.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& t = group.targets[static_cast<std::size_t>(r)];
    if (t.path.empty()) throw ContractError("target with empty path");
    check_path_continuity(net, t.path);
    for (const EdgeId id : t.path) sys.A(r, column.at(net.edge_index(id))) += 1.0;
    sys.b[r] = t.target_s;
  }
  sys.lo.resize(cols);
  sys.hi.resize(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const auto& e = net.edges()[sys.edge_idx[static_cast<std::size_t>(c)]];
    sys.lo[c] = e.freeflow_time_s;
    sys.hi[c] = std::max(e.freeflow_time_s, e.length_m / min_speed_mps);
  }
  return sys;
}

double target_residual(const OdTarget& t, const RoadNetwork& net, const std::vector<double>& factors) {
  double scaled = 0.0;
  for (const EdgeId id : t.path) {
    const std::size_t i = net.edge_index(id);
    scaled += factors[i] * net.edges()[i].freeflow_time_s;
  }
  return t.target_s - scaled;
}

ScalingSolution finish_optimized(const TripGroup& group, const RoadNetwork& net,
                                 const EdgeZoneIndex& zones, const CalibConfig& cfg, Method method,
                                 const ObservedSystem& sys, const Eigen::VectorXd& y,
                                 int iterations) {
  ScalingSolution sol = blank_solution(group, net, method);
  std::map<EdgeId, double> optimized;
  for (std::size_t c = 0; c < sys.edge_idx.size(); ++c) {
    const auto& e = net.edges()[sys.edge_idx[c]];
    optimized.emplace(e.id, clamp_factor(e, y[static_cast<Eigen::Index>(c)] / e.freeflow_time_s,
                                         cfg.min_speed_mps));
  }
  auto filled = fallback_fill(net, zones, optimized, cfg.min_speed_mps);
  sol.factors = std::move(filled.factors);
  sol.provenance = std::move(filled.provenance);
  sol.tiers = filled.tiers;
  sol.degenerate = filled.degenerate;
  sol.optimized_edges = optimized.size();
  sol.solver_iterations = iterations;

  double objective = 0.0;
  for (const auto& t : group.targets) {
    const double r = target_residual(t, net, sol.factors);
    objective += method == Method::kSsm ? r * r : std::abs(r);
  }
  sol.objective_value = objective;
  return sol;
}

template <typename Solve>
ScalingSolution solve_observed(const TripGroup& group, const RoadNetwork& net,
                               const EdgeZoneIndex& zones, const CalibConfig& cfg, Method method,
                               Solve&& solve) {
  cfg.validate();
  if (group.targets.empty()) throw DomainError("cannot calibrate an empty trip group");
  const auto start = std::chrono::steady_clock::now();
  const ObservedSystem sys = build_system(group, net, cfg.min_speed_mps);
  const solvers::SolverOptions opts{cfg.solver_tol, cfg.solver_max_iter};
  solvers::BoxSolution result;
  try {
    result = solve(sys, opts);
  } catch (const solvers::SolverError& e) {
    throw solvers::SolverError("period " + std::to_string(group.period_start) + ": " + e.what(),
                               e.best());
  }
  auto sol = finish_optimized(group, net, zones, cfg, method, sys, result.x, result.iterations);
  sol.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace

FallbackResult fallback_fill(const RoadNetwork& net, const EdgeZoneIndex& zones,
                             const std::map<EdgeId, double>& optimized, double min_speed_mps) {
  FallbackResult out;
  out.factors.assign(net.edge_count(), 1.0);
  out.provenance.assign(net.edge_count(), Provenance::kGlobalMean);
  if (optimized.empty()) {
    out.degenerate = true;
    out.tiers.global_mean = net.edge_count();
    return out;
  }

  // Optimized single-zone factors per cell, in edge id order.
  std::map<CellId, std::vector<double>> per_cell;
  std::vector<double> all;
  all.reserve(optimized.size());
  for (const auto& [id, x] : optimized) {
    if (x < 1.0) throw DomainError("optimized factor below 1 for edge " + std::to_string(id));
    all.push_back(x);
    if (const auto it = zones.single_zone.find(id); it != zones.single_zone.end()) {
      per_cell[it->second].push_back(x);
    }
  }
  const double global = mean(all);

  for (std::size_t i = 0; i < net.edge_count(); ++i) {
    const auto& e = net.edges()[i];
    if (const auto it = optimized.find(e.id); it != optimized.end()) {
      out.factors[i] = clamp_factor(e, it->second, min_speed_mps);
      out.provenance[i] = Provenance::kOptimized;
      continue;
    }
    double value = global;
    Provenance prov = Provenance::kGlobalMean;
    if (const auto sz = zones.single_zone.find(e.id); sz != zones.single_zone.end()) {
      if (const auto pc = per_cell.find(sz->second); pc != per_cell.end()) {
        value = mean(pc->second);
        prov = Provenance::kZoneMean;
      }
    } else if (const auto mz = zones.multi_zone.find(e.id); mz != zones.multi_zone.end()) {
      std::vector<double> pooled;
      for (const CellId c : mz->second) {
        if (const auto pc = per_cell.find(c); pc != per_cell.end()) {
          pooled.insert(pooled.end(), pc->second.begin(), pc->second.end());
        }
      }
      if (!pooled.empty()) {
        value = mean(pooled);
        prov = Provenance::kMultizoneMean;
      }
    }
    out.factors[i] = clamp_factor(e, value, min_speed_mps);
    out.provenance[i] = prov;
    switch (prov) {
      case Provenance::kZoneMean: ++out.tiers.zone_mean; break;
      case Provenance::kMultizoneMean: ++out.tiers.multizone_mean; break;
      default: ++out.tiers.global_mean; break;
    }
  }
  return out;
}

ScalingSolution compute_mfm(const TripGroup& group, const RoadNetwork& net, const CalibConfig& cfg) {
  cfg.validate();
  if (group.members.empty()) throw DomainError("cannot calibrate an empty trip group");
  const auto start = std::chrono::steady_clock::now();
  double data_total = 0.0;
  double flow_total = 0.0;
  for (const auto& m : group.members) {
    data_total += m.trip.duration_s;
    flow_total += path_travel_time(net, m.sd_path);
  }
  ScalingSolution sol = blank_solution(group, net, Method::kMfm);
  sol.f_mean = data_total / flow_total;
  for (std::size_t i = 0; i < net.edge_count(); ++i) {
    sol.factors[i] = clamp_factor(net.edges()[i], *sol.f_mean, cfg.min_speed_mps);
  }
  sol.tiers.global_mean = net.edge_count();
  sol.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

ScalingSolution solve_ssm(const TripGroup& group, const RoadNetwork& net, const EdgeZoneIndex& zones,
                          const CalibConfig& cfg) {
  return solve_observed(group, net, zones, cfg, Method::kSsm,
                        [](const ObservedSystem& sys, const solvers::SolverOptions& opts) {
                          return solvers::bounded_least_squares(sys.A, sys.b, sys.lo, sys.hi, opts);
                        });
}

ScalingSolution solve_asm(const TripGroup& group, const RoadNetwork& net, const EdgeZoneIndex& zones,
                          const CalibConfig& cfg) {
  return solve_observed(group, net, zones, cfg, Method::kAsm,
                        [](const ObservedSystem& sys, const solvers::SolverOptions& opts) {
                          // sum x_e = sum y_e / t_flow_e
                          const Eigen::VectorXd secondary = sys.lo.cwiseInverse();
                          return solvers::bounded_l1(sys.A, sys.b, sys.lo, sys.hi, secondary, opts);
                        });
}

ScalingSolution solve_period(Method method, const TripGroup& group, const RoadNetwork& net,
                             const EdgeZoneIndex& zones, const CalibConfig& cfg) {
  switch (method) {
    case Method::kMfm: return compute_mfm(group, net, cfg);
    case Method::kSsm: return solve_ssm(group, net, zones, cfg);
    case Method::kAsm: return solve_asm(group, net, zones, cfg);
  }
  throw ContractError("unknown method");
}

std::vector<ScalingSolution> calibrate_horizon(std::span<const TripGroup> groups,
                                               const RoadNetwork& net, const EdgeZoneIndex& zones,
                                               const CalibConfig& cfg, Method method) {
  cfg.validate();
  std::vector<std::optional<ScalingSolution>> solved(groups.size());
  std::vector<std::exception_ptr> errors(groups.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t k = next++; k < groups.size(); k = next++) {
      if (groups[k].empty()) continue;
      try {
        solved[k] = solve_period(method, groups[k], net, zones, cfg);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n_workers =
      std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(groups.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  std::vector<ScalingSolution> out;
  out.reserve(groups.size());
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (errors[k]) {
      try {
        std::rethrow_exception(errors[k]);
      } catch (const CalibrationError&) {
        throw;
      } catch (const std::exception& e) {
        throw CalibrationError(groups[k].period_start, e.what());
      }
    }
    if (solved[k]) {
      out.push_back(std::move(*solved[k]));
      continue;
    }
    ScalingSolution carried = out.empty() ? blank_solution(groups[k], net, method) : out.back();
    carried.period_start = groups[k].period_start;
    carried.period_length = groups[k].period_length;
    carried.trip_count = 0;
    carried.target_count = 0;
    carried.carried_forward = true;
    carried.wall_time_s = 0.0;
    carried.solver_iterations = 0;
    if (out.empty()) {
      carried.tiers = TierCounts{0, 0, net.edge_count()};
      carried.degenerate = method != Method::kMfm;
    }
    out.push_back(std::move(carried));
  }
  return out;
}

std::vector<ScalingSolution> calibrate_horizon(std::span<const SnappedTrip> trips,
                                               const RoadNetwork& net, const GridPartition& grid,
                                               const CalibConfig& cfg, Method method,
                                               std::optional<Horizon> horizon) {
  cfg.validate();
  const Horizon h = horizon ? *horizon : default_horizon(trips, cfg.dt_scale_s);
  const auto groups = group_by_period(trips, cfg.dt_scale_s, h);
  const auto zones = classify_edges(net, grid);
  return calibrate_horizon(groups, net, zones, cfg, method);
}

TravelTimeProfile make_profile(std::span<const ScalingSolution> solutions, const RoadNetwork& net,
                               const CalibConfig& cfg) {
  std::vector<TravelTimeLayer> layers;
  layers.reserve(solutions.size());
  for (const auto& s : solutions) layers.push_back(s.layer(net, cfg.min_speed_mps));
  return TravelTimeProfile(std::move(layers), cfg.dt_scale_s);
}

}  // namespace amodscale
