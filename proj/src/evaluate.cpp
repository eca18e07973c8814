#include "amodscale/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "amodscale/errors.hpp"

namespace amodscale {

namespace {

const ScalingSolution* find_solution(std::span<const ScalingSolution> solutions,
                                     EpochSeconds period_start) {
  for (const auto& s : solutions) {
    if (s.period_start == period_start) return &s;
  }
  return nullptr;
}

double scaled_time(const RoadNetwork& net, std::span<const EdgeId> path,
                   const std::vector<double>& factors) {
  check_path_continuity(net, path);
  double total = 0.0;
  for (const EdgeId id : path) {
    const std::size_t i = net.edge_index(id);
    total += factors[i] * net.edges()[i].freeflow_time_s;
  }
  return total;
}

template <typename PerGroup>
std::vector<TargetError> collect(std::span<const TripGroup> groups,
                                 std::span<const ScalingSolution> solutions, const RoadNetwork& net,
                                 PerGroup&& per_group) {
  std::vector<TargetError> out;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    const auto* sol = find_solution(solutions, g.period_start);
    if (!sol) {
      throw EvaluationError(g.period_start, "no travel-time layer for period " +
                                                std::to_string(g.period_start));
    }
    if (sol->factors.size() != net.edge_count()) {
      throw EvaluationError(g.period_start, "layer does not match the network");
    }
    per_group(g, *sol, out);
  }
  return out;
}

std::string minutes(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", seconds / 60.0);
  return buf;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
  return buf;
}

std::string bin_label(double lo, double hi) {
  const auto fmt = [](double s) {
    char buf[32];
    if (s < 60.0 || std::fmod(s, 60.0) != 0.0) {
      std::snprintf(buf, sizeof(buf), "%gs", s);
    } else {
      std::snprintf(buf, sizeof(buf), "%gmin", s / 60.0);
    }
    return std::string(buf);
  };
  return fmt(lo) + "-" + fmt(hi);
}

nlohmann::json row_json(const PercentileRow& r) {
  return {{"label", r.label}, {"count", r.count}, {"p5", r.p5},   {"p25", r.p25},
          {"p50", r.p50},     {"p75", r.p75},     {"p95", r.p95}, {"max", r.max},
          {"exact_fraction", r.exact_fraction}};
}

}  // namespace

std::vector<TargetError> trip_abs_errors(std::span<const TripGroup> groups,
                                         std::span<const ScalingSolution> solutions,
                                         const RoadNetwork& net) {
  return collect(groups, solutions, net,
                 [&](const TripGroup& g, const ScalingSolution& sol, std::vector<TargetError>& out) {
                   for (const auto& t : g.targets) {
                     const double predicted = scaled_time(net, t.path, sol.factors);
                     out.push_back({g.period_start, t.origin_node, t.dest_node, t.target_s,
                                    predicted, std::abs(t.target_s - predicted)});
                   }
                 });
}

std::vector<TargetError> raw_trip_abs_errors(std::span<const TripGroup> groups,
                                             std::span<const ScalingSolution> solutions,
                                             const RoadNetwork& net) {
  return collect(groups, solutions, net,
                 [&](const TripGroup& g, const ScalingSolution& sol, std::vector<TargetError>& out) {
                   for (const auto& m : g.members) {
                     const double predicted = scaled_time(net, m.sd_path, sol.factors);
                     out.push_back({g.period_start, m.origin_node, m.dest_node, m.trip.duration_s,
                                    predicted, std::abs(m.trip.duration_s - predicted)});
                   }
                 });
}

std::vector<double> abs_error_values(std::span<const TargetError> errors) {
  std::vector<double> v;
  v.reserve(errors.size());
  for (const auto& e : errors) v.push_back(e.abs_error_s);
  return v;
}

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("percentile of an empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  // Clamped to keep monotone in p under rounding.
  return std::clamp(sorted[lo] + frac * (sorted[hi] - sorted[lo]), sorted[lo], sorted[hi]);
}

PercentileRow percentile_table(std::span<const double> errors, std::string label) {
  if (errors.empty()) throw DomainError("percentile table of an empty error list");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  PercentileRow row;
  row.label = std::move(label);
  row.count = sorted.size();
  row.p5 = percentile_sorted(sorted, 5);
  row.p25 = percentile_sorted(sorted, 25);
  row.p50 = percentile_sorted(sorted, 50);
  row.p75 = percentile_sorted(sorted, 75);
  row.p95 = percentile_sorted(sorted, 95);
  row.max = sorted.back();
  const auto exact = std::count_if(sorted.begin(), sorted.end(),
                                   [](double e) { return e < kExactErrorS; });
  row.exact_fraction = static_cast<double>(exact) / static_cast<double>(sorted.size());
  return row;
}

std::vector<double> default_histogram_edges() { return {0.0, 1.0, 60.0, 120.0, 300.0, 600.0, 4800.0}; }

Histogram error_histogram(std::span<const double> errors, std::span<const double> edges) {
  if (edges.size() < 2) throw DomainError("histogram needs at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw DomainError("histogram edges must increase strictly");
  }
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  h.total = errors.size();
  for (const double e : errors) {
    if (!(e >= edges.front()) || e > edges.back()) {
      ++h.overflow_count;
      continue;
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), e);
    auto bin = static_cast<std::size_t>(std::distance(edges.begin(), it)) - 1;
    bin = std::min(bin, h.counts.size() - 1);  // e == last edge
    ++h.counts[bin];
  }
  h.fractions.resize(h.counts.size(), 0.0);
  if (h.total > 0) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      h.fractions[i] = static_cast<double>(h.counts[i]) / static_cast<double>(h.total);
    }
    h.overflow_fraction = static_cast<double>(h.overflow_count) / static_cast<double>(h.total);
  }
  return h;
}

ErrorReport make_error_report(const std::string& label, std::span<const TripGroup> groups,
                              std::span<const ScalingSolution> solutions, const RoadNetwork& net,
                              std::span<const double> bin_edges) {
  ErrorReport report;
  report.label = label;
  report.abs_errors = abs_error_values(trip_abs_errors(groups, solutions, net));
  report.percentiles = percentile_table(report.abs_errors, label);
  report.histogram = error_histogram(report.abs_errors, bin_edges);
  const auto raw = abs_error_values(raw_trip_abs_errors(groups, solutions, net));
  if (!raw.empty()) report.raw_trip_percentiles = percentile_table(raw, label);
  return report;
}

DistanceDeviation distance_deviation(std::span<const SnappedTrip> trips) {
  DistanceDeviation out;
  out.trip_count = trips.size();
  std::size_t within_250 = 0, within_1k = 0;
  for (const auto& t : trips) {
    const double dev = std::abs(t.sd_distance_m - t.trip.distance_m);
    out.deviations_m.push_back(dev);
    out.speeds_mps.push_back(t.sd_distance_m / t.trip.duration_s);
    if (dev <= 250.0) ++within_250;
    if (dev <= 1000.0) ++within_1k;
  }
  if (!trips.empty()) {
    const auto n = static_cast<double>(trips.size());
    out.fraction_within_250m = static_cast<double>(within_250) / n;
    out.fraction_within_1km = static_cast<double>(within_1k) / n;
    out.deviation_percentiles = percentile_table(out.deviations_m, "distance_deviation_m");
    out.speed_percentiles = percentile_table(out.speeds_mps, "sd_speed_mps");
  }
  return out;
}

std::map<CellId, double> cell_mean_factors(const RoadNetwork& net, const EdgeZoneIndex& zones,
                                           const ScalingSolution& solution) {
  std::map<CellId, std::pair<double, std::size_t>> acc;
  for (const auto& [edge, cell] : zones.single_zone) {
    auto& a = acc[cell];
    a.first += solution.factors[net.edge_index(edge)];
    ++a.second;
  }
  std::map<CellId, double> out;
  for (const auto& [cell, a] : acc) out[cell] = a.first / static_cast<double>(a.second);
  return out;
}

nlohmann::json report_json(std::span<const ErrorReport> reports, const DistanceDeviation* deviation) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json bins = nlohmann::json::array();
    for (std::size_t i = 0; i < r.histogram.counts.size(); ++i) {
      bins.push_back({{"lower_s", r.histogram.edges[i]},
                      {"upper_s", r.histogram.edges[i + 1]},
                      {"count", r.histogram.counts[i]},
                      {"fraction", r.histogram.fractions[i]}});
    }
    nlohmann::json m{{"label", r.label},
                     {"percentiles_s", row_json(r.percentiles)},
                     {"exact_fraction", r.percentiles.exact_fraction},
                     {"histogram",
                      {{"bins", bins},
                       {"overflow_count", r.histogram.overflow_count},
                       {"overflow_fraction", r.histogram.overflow_fraction},
                       {"total", r.histogram.total}}}};
    if (r.raw_trip_percentiles) m["raw_trip_percentiles_s"] = row_json(*r.raw_trip_percentiles);
    methods.push_back(std::move(m));
  }
  nlohmann::json doc{{"methods", methods}};
  if (deviation) {
    nlohmann::json d{{"trip_count", deviation->trip_count},
                     {"fraction_within_250m", deviation->fraction_within_250m},
                     {"fraction_within_1km", deviation->fraction_within_1km}};
    if (deviation->deviation_percentiles) d["deviation_m"] = row_json(*deviation->deviation_percentiles);
    if (deviation->speed_percentiles) d["sd_speed_mps"] = row_json(*deviation->speed_percentiles);
    doc["distance_deviation"] = d;
  }
  return doc;
}

std::string report_markdown(std::span<const ErrorReport> reports) {
  std::ostringstream md;
  md << "## Absolute travel-time error percentiles (minutes)\n\n";
  md << "| Method | 5% | 25% | 50% | 75% | 95% | Maximum | Exact (<1 s) |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    const auto& p = r.percentiles;
    md << "| " << r.label << " | " << minutes(p.p5) << " | " << minutes(p.p25) << " | "
       << minutes(p.p50) << " | " << minutes(p.p75) << " | " << minutes(p.p95) << " | "
       << minutes(p.max) << " | " << percent(p.exact_fraction) << "% |\n";
  }
  if (reports.empty()) return md.str();

  md << "\n## Share of trips per absolute-error range (%)\n\n| Method |";
  const auto& edges = reports.front().histogram.edges;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    md << ' ' << (i == 0 && edges[0] == 0.0 && edges[1] == kExactErrorS ? std::string("0")
                                                                        : bin_label(edges[i], edges[i + 1]))
       << " |";
  }
  md << " overflow |\n|---|";
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) md << "---|";
  md << "---|\n";
  for (const auto& r : reports) {
    md << "| " << r.label << " |";
    for (const double f : r.histogram.fractions) md << ' ' << percent(f) << " |";
    md << ' ' << percent(r.histogram.overflow_fraction) << " |\n";
  }
  return md.str();
}

std::string histogram_csv(std::span<const ErrorReport> reports) {
  std::ostringstream out;
  out << "method,lower_s,upper_s,count,fraction\n";
  for (const auto& r : reports) {
    const auto& h = r.histogram;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      out << r.label << ',' << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << ','
          << h.fractions[i] << '\n';
    }
    out << r.label << ",overflow,," << h.overflow_count << ',' << h.overflow_fraction << '\n';
  }
  return out.str();
}

std::string histogram_svg(std::span<const ErrorReport> reports) {
  static constexpr const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"};
  const double width = 720, height = 360, left = 60, bottom = 60, top = 30, right = 140;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  const std::size_t n_bins = reports.empty() ? 0 : reports.front().histogram.counts.size();

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 100; tick += 20) {
    const double y = top + plot_h * (1.0 - tick / 100.0);
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << tick
        << "%</text>\n";
  }
  if (n_bins > 0) {
    const double group_w = plot_w / static_cast<double>(n_bins);
    const double bar_w = group_w * 0.8 / static_cast<double>(reports.size());
    const auto& edges = reports.front().histogram.edges;
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double gx = left + group_w * static_cast<double>(b) + group_w * 0.1;
      for (std::size_t r = 0; r < reports.size(); ++r) {
        const double f = reports[r].histogram.fractions[b];
        const double h = plot_h * f;
        svg << "<rect x=\"" << gx + bar_w * static_cast<double>(r) << "\" y=\"" << top + plot_h - h
            << "\" width=\"" << bar_w << "\" height=\"" << h << "\" fill=\""
            << kColors[r % std::size(kColors)] << "\"/>\n";
      }
      const std::string label = (b == 0 && edges[0] == 0.0 && edges[1] == kExactErrorS)
                                    ? std::string("0")
                                    : bin_label(edges[b], edges[b + 1]);
      svg << "<text x=\"" << gx + group_w * 0.4 << "\" y=\"" << top + plot_h + 16
          << "\" text-anchor=\"middle\">" << label << "</text>\n";
    }
  }
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const double y = top + 14.0 * static_cast<double>(r);
    svg << "<rect x=\"" << width - right + 10 << "\" y=\"" << y << "\" width=\"10\" height=\"10\" fill=\""
        << kColors[r % std::size(kColors)] << "\"/>\n";
    svg << "<text x=\"" << width - right + 26 << "\" y=\"" << y + 9 << "\">" << reports[r].label
        << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 20
      << "\" text-anchor=\"middle\">absolute travel-time error</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace amodscale
