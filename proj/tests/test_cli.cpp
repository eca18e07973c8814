#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support/eventlog.hpp"
#include "support/synth.hpp"
#include "support/tmp.hpp"

namespace fs = std::filesystem;

namespace {

constexpr amodscale::EpochSeconds kT0 = 1465200000;  // 2016-06-06 08:00 UTC, period aligned

struct Fixture {
  fs::path dir;
  fs::path nodes, edges, trips;

  explicit Fixture(const std::string& name) : dir(synth::scratch_dir(name)) {
    nodes = dir / "nodes.csv";
    edges = dir / "edges.csv";
    trips = dir / "trips.csv";
    const auto net = synth::grid_network(6, 6);
    synth::write_network_csv(net, nodes, edges);
    synth::Rng rng(61);
    const auto truth = synth::two_cluster_truth(net, 1.2, 2.5);
    const auto t = synth::generative_trips(net, truth, 240, rng, kT0, 3600);
    synth::write_trips_csv(t, trips);
  }

  std::vector<std::string> inputs() const {
    return {"--trips", trips.string(), "--nodes", nodes.string(), "--edges", edges.string()};
  }
};

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "amodscale");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = amodscale::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  Fixture f("cli_usage");
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  const auto r = run(cat({"calibrate", "--method", "median", "--out", (f.dir / "o").string()}, f.inputs()));
  CHECK(r.code == 2);
  CHECK(run(cat({"calibrate", "--method", "asm"}, f.inputs())).code == 2);
  CHECK(run(cat({"calibrate", "--method", "asm", "--out", (f.dir / "o").string(), "--utc-offset", "x"},
                f.inputs())).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("calibrate writes one layer per period and reruns byte-identically") {
  Fixture f("cli_calibrate");
  const auto out1 = f.dir / "a", out2 = f.dir / "b";
  auto r = run(cat({"calibrate", "--method", "asm", "--out", out1.string(), "--geojson"}, f.inputs()));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  r = run(cat({"calibrate", "--method", "asm", "--out", out2.string(), "--threads", "2", "--geojson"},
              f.inputs()));
  REQUIRE(r.code == 0);
  std::size_t layers = 0;
  for (const auto& e : fs::directory_iterator(out1)) {
    const auto name = e.path().filename().string();
    if (name == "manifest.json") continue;
    if (e.path().extension() == ".csv") ++layers;
    CHECK_MESSAGE(slurp(e.path()) == slurp(out2 / name), name);
  }
  CHECK(layers == 2);
  const auto manifest = nlohmann::json::parse(slurp(out1 / "manifest.json"));
  CHECK(manifest["inputs"].size() == 3);
  CHECK(manifest["inputs"][0]["sha256"].get<std::string>().size() == 64);
  CHECK(manifest["config"]["method"] == "asm");
  CHECK(manifest.contains("stage_wall_times_s"));
}

TEST_CASE("calibrate reads option values from a config file") {
  Fixture f("cli_config");
  {
    std::ofstream c(f.dir / "calib.ini");
    c << "method = mfm\ndt-scale = 3600\n";
  }
  const auto out = f.dir / "o";
  const auto r = run(cat({"calibrate", "--config", (f.dir / "calib.ini").string(), "--out", out.string()},
                         f.inputs()));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto side = nlohmann::json::parse(slurp(out / ("layer_" + std::to_string(kT0) + ".json")));
  CHECK(side["method"] == "mfm");
  CHECK(side["period_length_s"] == 3600);
}

TEST_CASE("evaluate reports every profile and flags missing periods") {
  Fixture f("cli_evaluate");
  std::vector<std::string> profiles;
  for (const std::string m : {"mfm", "ssm", "asm"}) {
    const auto out = f.dir / m;
    REQUIRE(run(cat({"calibrate", "--method", m, "--out", out.string()}, f.inputs())).code == 0);
    profiles.push_back("--profile");
    profiles.push_back(m + "=" + out.string());
  }
  const auto rep = f.dir / "report";
  auto args = cat(cat({"evaluate", "--out", rep.string(), "--svg"}, profiles), f.inputs());
  auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto doc = nlohmann::json::parse(slurp(rep / "report.json"));
  REQUIRE(doc["methods"].size() == 3);
  CHECK(doc["methods"][1]["exact_fraction"] == 1.0);
  CHECK(doc["methods"][2]["exact_fraction"] == 1.0);
  CHECK(doc["methods"][0]["exact_fraction"].get<double>() < 1.0);
  CHECK(doc["distance_deviation"]["fraction_within_250m"] == 1.0);
  CHECK(fs::exists(rep / "histogram.svg"));
  CHECK(slurp(rep / "report.md").find("| ssm |") != std::string::npos);

  fs::remove(f.dir / "asm" / ("layer_" + std::to_string(kT0 + 1800) + ".csv"));
  fs::remove(f.dir / "asm" / ("layer_" + std::to_string(kT0 + 1800) + ".json"));
  r = run(cat({"evaluate", "--out", rep.string(), "--profile", "asm=" + (f.dir / "asm").string()},
              f.inputs()));
  CHECK(r.code == 1);
  CHECK(r.err.find(std::to_string(kT0 + 1800)) != std::string::npos);
}

TEST_CASE("simulate sweeps fleet sizes and travel-time sources") {
  Fixture f("cli_simulate");
  const auto prof = f.dir / "prof";
  REQUIRE(run(cat({"calibrate", "--method", "ssm", "--out", prof.string()}, f.inputs())).code == 0);
  {
    std::ofstream c(f.dir / "scenario.ini");
    c << "[sim]\ndt_reposition_s = 900\nfleet_size = 3\n";
  }
  const auto out = f.dir / "sim";
  const auto r = run(cat({"simulate", "--out", out.string(), "--tt", "freeflow", "--tt",
                          "ssm=" + prof.string(), "--fleet-sizes", "2,4,8", "--config",
                          (f.dir / "scenario.ini").string(), "--seed", "3"},
                         f.inputs()));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto doc = nlohmann::json::parse(slurp(out / "kpis.json"));
  REQUIRE(doc["runs"].size() == 6);
  CHECK(doc["config"]["dt_reposition_s"] == 900.0);
  CHECK(doc["config"]["seed"] == 3);
  CHECK(doc["runs"][0]["label"] == "freeflow");
  CHECK(doc["runs"][3]["label"] == "ssm");
  CHECK(doc["runs"][2]["kpis"] != doc["runs"][5]["kpis"]);
  for (const auto& run_doc : doc["runs"]) {
    const auto audit = synth::audit_event_log(slurp(out / run_doc["event_log"].get<std::string>()));
    CHECK(std::abs(audit.profit - run_doc["kpis"]["profit"].get<double>()) <= 1e-9);
    CHECK(audit.max_wait_s <= 360.0);
  }

  const auto out2 = f.dir / "sim2";
  REQUIRE(run(cat({"simulate", "--out", out2.string(), "--tt", "freeflow", "--tt", "ssm=" + prof.string(),
                   "--fleet-sizes", "2,4,8", "--config", (f.dir / "scenario.ini").string(), "--seed", "3"},
                  f.inputs())).code == 0);
  CHECK(slurp(out / "kpis.json") == slurp(out2 / "kpis.json"));
  CHECK(slurp(out / "events_ssm_4.csv") == slurp(out2 / "events_ssm_4.csv"));
}

TEST_CASE("runtime failures exit with 1") {
  Fixture f("cli_runtime");
  const auto r = run(cat({"simulate", "--out", (f.dir / "s").string(), "--tt", "x=" + (f.dir / "none").string()},
                         f.inputs()));
  CHECK(r.code == 1);
  {
    std::ofstream bad(f.dir / "bad_edges.csv");
    bad << "edge_id,from_node,to_node,length_m,freeflow_speed_mps\n1,1,999,10,1\n";
  }
  const auto r2 = run({"calibrate", "--method", "ssm", "--out", (f.dir / "c").string(), "--trips",
                       f.trips.string(), "--nodes", f.nodes.string(), "--edges",
                       (f.dir / "bad_edges.csv").string()});
  CHECK(r2.code == 1);
  CHECK(r2.err.find("999") != std::string::npos);
}
