#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "amodscale/amod.hpp"
#include "amodscale/calibrate.hpp"
#include "amodscale/errors.hpp"
#include "amodscale/evaluate.hpp"
#include "amodscale/grid.hpp"
#include "amodscale/network.hpp"
#include "amodscale/tripdata.hpp"

namespace py = pybind11;
using namespace amodscale;
using nlohmann::json;

namespace {

std::vector<SnappedTrip> load_trips(const RoadNetwork& net, const std::string& path,
                                    const std::string& utc_offset) {
  const auto parsed = parse_trips(path, parse_utc_offset(utc_offset));
  const auto kept = filter_trips(parsed.trips);
  auto snapped = snap_and_route(net, kept).trips;
  if (snapped.empty()) throw DomainError("no usable trips after filtering and snapping");
  return snapped;
}

json row_json(const PercentileRow& r) {
  return {{"count", r.count}, {"p5", r.p5},   {"p25", r.p25}, {"p50", r.p50},
          {"p75", r.p75},     {"p95", r.p95}, {"max", r.max}, {"exact_fraction", r.exact_fraction}};
}

std::string calibrate(const RoadNetwork& net, const std::string& trips, const std::string& method,
                      const std::string& utc_offset, EpochSeconds dt_scale, double cell_m, double smin,
                      unsigned threads) {
  const auto m = parse_method(method);
  if (!m) throw DomainError("unknown method '" + method + "'");
  CalibConfig cfg;
  cfg.dt_scale_s = dt_scale;
  cfg.cell_size_m = cell_m;
  cfg.min_speed_mps = smin;
  cfg.threads = threads;
  const auto snapped = load_trips(net, trips, utc_offset);
  std::vector<ScalingSolution> sols;
  {
    py::gil_scoped_release release;
    sols = calibrate_horizon(snapped, net, build_grid(net, cell_m), cfg, *m);
  }
  json edge_ids = json::array();
  for (const auto& e : net.edges()) edge_ids.push_back(e.id);
  json out = json::array();
  for (const auto& s : sols) {
    out.push_back({{"period_start", s.period_start},
                   {"period_length", s.period_length},
                   {"method", method_name(s.method)},
                   {"f_mean", s.f_mean ? json(*s.f_mean) : json(nullptr)},
                   {"objective", s.objective_value ? json(*s.objective_value) : json(nullptr)},
                   {"trip_count", s.trip_count},
                   {"min_speed_mps", smin},
                   {"edge_ids", edge_ids},
                   {"factors", s.factors}});
  }
  return out.dump();
}

std::string simulate(const RoadNetwork& net, const std::string& trips, std::size_t fleet_size,
                     const std::string& utc_offset, std::uint64_t seed, const std::string& scenario,
                     const std::string& profile) {
  auto cfg = parse_sim_config_text(scenario);
  cfg.fleet_size = fleet_size;
  cfg.seed = seed;
  cfg.validate();
  const auto snapped = load_trips(net, trips, utc_offset);
  TravelTimeProfile prof;
  if (!profile.empty()) {
    const auto doc = json::parse(profile);
    std::vector<TravelTimeLayer> layers;
    EpochSeconds len = 0;
    for (const auto& p : doc) {
      len = p.at("period_length").get<EpochSeconds>();
      layers.emplace_back(net, p.at("period_start").get<EpochSeconds>(),
                          p.at("factors").get<std::vector<double>>(), p.at("min_speed_mps").get<double>());
    }
    prof = TravelTimeProfile(std::move(layers), len);
  }
  const auto requests = generate_requests(net, snapped);
  SimResult r;
  {
    py::gil_scoped_release release;
    r = run_simulation(cfg, requests, net, build_grid(net, cfg.cell_size_m),
                       profile.empty() ? TravelTimeSource() : TravelTimeSource(&prof));
  }
  return kpi_json(r.kpis).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "amodscale native core";
  m.attr("__version__") = "0.1.0";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ReferenceError>(m, "ReferenceError", PyExc_KeyError);

  py::class_<RoadNetwork>(m, "Network")
      .def_property_readonly("node_count", &RoadNetwork::node_count)
      .def_property_readonly("edge_count", &RoadNetwork::edge_count)
      .def_property_readonly("edge_ids",
                             [](const RoadNetwork& n) {
                               std::vector<EdgeId> ids;
                               for (const auto& e : n.edges()) ids.push_back(e.id);
                               return ids;
                             })
      .def(
          "shortest_path",
          [](const RoadNetwork& n, NodeId o, NodeId d, const std::string& weight) -> py::object {
            if (weight != "distance" && weight != "time") throw DomainError("weight must be distance or time");
            const auto w = weight == "distance" ? EdgeWeight::distance() : EdgeWeight::freeflow_time();
            const auto p = shortest_path(n, o, d, w);
            if (!p) return py::none();
            return py::make_tuple(p->edges, p->weight);
          },
          py::arg("origin"), py::arg("dest"), py::arg("weight") = "time",
          "(edge ids, total weight) of the best path, or None when unreachable.");

  m.def("load_network", &load_network, py::arg("nodes"), py::arg("edges"));
  m.def(
      "pair_weight",
      [](double deadhead_m, double d_od_m, double zeta, double fare_per_km, double cost_per_km) {
        SimConfig c;
        c.zeta = zeta;
        c.fare_per_km = fare_per_km;
        c.cost_per_km = cost_per_km;
        return pair_weight(c, deadhead_m, d_od_m);
      },
      py::arg("deadhead_m"), py::arg("d_od_m"), py::arg("zeta") = 0.5, py::arg("fare_per_km") = 0.5,
      py::arg("cost_per_km") = 0.25);
  m.def("calibrate", &calibrate);
  m.def("percentiles", [](const std::vector<double>& e) { return row_json(percentile_table(e)).dump(); });
  m.def("histogram", [](const std::vector<double>& e, std::vector<double> edges) {
    if (edges.empty()) edges = default_histogram_edges();
    const auto h = error_histogram(e, edges);
    return json{{"edges", h.edges},
                {"counts", h.counts},
                {"fractions", h.fractions},
                {"overflow_count", h.overflow_count},
                {"overflow_fraction", h.overflow_fraction}}
        .dump();
  });
  m.def("simulate", &simulate);
}
