#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "amodscale/amod.hpp"
#include "amodscale/calibrate.hpp"
#include "amodscale/errors.hpp"
#include "amodscale/evaluate.hpp"
#include "amodscale/grid.hpp"
#include "amodscale/io.hpp"
#include "amodscale/network.hpp"
#include "amodscale/tripdata.hpp"

namespace amodscale::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

class Manifest {
 public:
  explicit Manifest(std::string command) {
    doc_["tool"] = "amodscale";
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
    doc_["stage_wall_times_s"] = json::object();
  }

  void input(const fs::path& path) {
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) input(f);
      return;
    }
    doc_["inputs"].push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
  }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }
  void stage(const std::string& name, double seconds) { doc_["stage_wall_times_s"][name] = seconds; }
  json& config() { return doc_["config"]; }
  json& extra(const std::string& key) { return doc_[key]; }

  void write(const fs::path& dir) {
    const auto path = dir / "manifest.json";
    write_file_atomic(path, doc_.dump(2) + "\n");
  }

 private:
  json doc_;
};

struct InputOptions {
  std::string trips;
  std::string nodes;
  std::string edges;
  std::string utc_offset = "0";
  std::optional<double> max_snap_m;
  double min_speed_mph = 1.0;
  double max_speed_mph = 55.0;
  unsigned threads = 1;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--trips", in.trips, "Trips CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--nodes", in.nodes, "Nodes CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--edges", in.edges, "Edges CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--utc-offset", in.utc_offset,
                  "UTC offset of trip timestamps, e.g. -04:00 or -4")->capture_default_str();
  cmd->add_option("--max-snap-m", in.max_snap_m, "Drop trips snapping farther than this");
  cmd->add_option("--min-speed-mph", in.min_speed_mph, "Trip speed filter, lower bound")
      ->capture_default_str();
  cmd->add_option("--max-speed-mph", in.max_speed_mph, "Trip speed filter, upper bound")
      ->capture_default_str();
  cmd->add_option("--threads", in.threads, "Worker threads")->capture_default_str()->check(
      CLI::PositiveNumber);
}

json input_config(const InputOptions& in) {
  json j{{"trips", in.trips},
         {"nodes", in.nodes},
         {"edges", in.edges},
         {"utc_offset", in.utc_offset},
         {"min_speed_mph", in.min_speed_mph},
         {"max_speed_mph", in.max_speed_mph},
         {"threads", in.threads}};
  j["max_snap_m"] = in.max_snap_m ? json(*in.max_snap_m) : json(nullptr);
  return j;
}

struct Ingested {
  RoadNetwork net;
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  std::size_t speed_filtered = 0;
  SnapResult snap;
};

Ingested ingest(const InputOptions& in, std::ostream& out, Manifest& manifest, Stopwatch& watch) {
  long long offset = 0;
  try {
    offset = parse_utc_offset(in.utc_offset);
  } catch (const ParseError& e) {
    throw UsageError(std::string("--utc-offset: ") + e.what());
  }
  Ingested d;
  d.net = load_network(in.nodes, in.edges);
  manifest.input(in.nodes);
  manifest.input(in.edges);
  manifest.stage("load_network", watch.lap());

  auto parsed = parse_trips(in.trips, offset);
  manifest.input(in.trips);
  d.parsed = parsed.trips.size();
  d.skipped = parsed.skipped_rows;
  const auto kept = filter_trips(parsed.trips, in.min_speed_mph * kMphToMps,
                                 in.max_speed_mph * kMphToMps);
  d.speed_filtered = parsed.trips.size() - kept.size();
  manifest.stage("parse_trips", watch.lap());

  SnapOptions snap_opts;
  snap_opts.max_speed_mps = in.max_speed_mph * kMphToMps;
  snap_opts.max_snap_m = in.max_snap_m;
  d.snap = snap_and_route(d.net, kept, snap_opts);
  manifest.stage("snap_and_route", watch.lap());

  out << "network: " << d.net.node_count() << " nodes, " << d.net.edge_count() << " edges\n";
  out << "trips: " << d.parsed << " parsed, " << d.skipped << " malformed rows skipped, "
      << d.speed_filtered << " outside speed range, " << d.snap.stats.dropped()
      << " dropped after snapping, " << d.snap.trips.size() << " used\n";
  manifest.extra("trip_counts") = {{"parsed", d.parsed},
                                   {"malformed_rows", d.skipped},
                                   {"speed_filtered", d.speed_filtered},
                                   {"same_node", d.snap.stats.same_node},
                                   {"unreachable", d.snap.stats.unreachable},
                                   {"too_fast_on_network", d.snap.stats.too_fast},
                                   {"snap_too_far", d.snap.stats.snap_too_far},
                                   {"used", d.snap.trips.size()}};
  if (d.snap.trips.empty()) throw std::runtime_error("no usable trips after filtering and snapping");
  return d;
}

std::pair<std::string, std::string> split_label(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    auto label = fs::path(text).filename().string();
    if (label.empty()) label = fs::path(text).parent_path().filename().string();
    return {label, text};
  }
  if (eq == 0 || eq + 1 == text.size()) throw UsageError("expected LABEL=PATH, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::vector<ScalingSolution> solutions_from_profile(const TravelTimeProfile& profile) {
  std::vector<ScalingSolution> out;
  for (const auto& layer : profile.layers()) {
    ScalingSolution s;
    s.period_start = layer.period_start();
    s.period_length = profile.period_length();
    s.factors = layer.factors();
    out.push_back(std::move(s));
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

// calibrate

struct CalibrateArgs {
  InputOptions in;
  std::string method;
  std::string out_dir;
  long long dt_scale = 1800;
  double cell_m = 1000.0;
  double smin_mps = 0.5;
  double solver_tol = 1e-8;
  int max_iter = 200000;
  std::optional<long long> horizon_start;
  std::optional<long long> horizon_end;
  bool geojson = false;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
  Stopwatch watch;
  Manifest manifest("calibrate");
  const Method method = *parse_method(a.method);
  CalibConfig cfg;
  cfg.dt_scale_s = a.dt_scale;
  cfg.cell_size_m = a.cell_m;
  cfg.min_speed_mps = a.smin_mps;
  cfg.solver_tol = a.solver_tol;
  cfg.solver_max_iter = a.max_iter;
  cfg.threads = a.in.threads;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  auto conf = input_config(a.in);
  conf.update({{"method", a.method},
               {"dt_scale_s", a.dt_scale},
               {"cell_size_m", a.cell_m},
               {"min_speed_mps", a.smin_mps},
               {"solver_tol", a.solver_tol},
               {"solver_max_iter", a.max_iter}});
  manifest.config() = conf;

  const auto data = ingest(a.in, out, manifest, watch);
  const auto grid = build_grid(data.net, cfg.cell_size_m);
  const auto zones = classify_edges(data.net, grid);
  Horizon horizon = default_horizon(data.snap.trips, cfg.dt_scale_s);
  if (a.horizon_start) horizon.start = *a.horizon_start;
  if (a.horizon_end) horizon.end = *a.horizon_end;
  if (horizon.end <= horizon.start) throw UsageError("horizon end must be after its start");
  const auto groups = group_by_period(data.snap.trips, cfg.dt_scale_s, horizon);
  manifest.stage("group", watch.lap());

  const auto solutions = calibrate_horizon(groups, data.net, zones, cfg, method);
  manifest.stage("calibrate", watch.lap());
  json periods = json::array();
  for (const auto& s : solutions) {
    periods.push_back({{"period_start_epoch_s", s.period_start}, {"wall_time_s", s.wall_time_s}});
    if (s.degenerate) {
      err << "warning: period " << s.period_start << " has no observed edges; all factors set to 1\n";
    }
  }
  manifest.extra("periods") = periods;

  ensure_dir(a.out_dir);
  for (const auto& p : write_profile(a.out_dir, data.net, solutions)) manifest.output(p);
  if (a.geojson) {
    for (const auto& s : solutions) {
      const auto path = fs::path(a.out_dir) / ("cells_" + std::to_string(s.period_start) + ".geojson");
      write_grid_geojson(path, grid, cell_mean_factors(data.net, zones, s), "mean_factor");
      manifest.output(path);
    }
  }
  manifest.stage("write", watch.lap());
  manifest.write(a.out_dir);

  out << "calibrated " << solutions.size() << " period(s) with " << method_name(method) << " into "
      << a.out_dir << "\n";
  return 0;
}

// evaluate

struct EvaluateArgs {
  InputOptions in;
  std::vector<std::string> profiles;
  std::string out_dir;
  double smin_mps = 0.5;
  std::vector<double> bins;
  bool svg = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  Stopwatch watch;
  Manifest manifest("evaluate");
  std::vector<std::pair<std::string, std::string>> specs;
  for (const auto& p : a.profiles) specs.push_back(split_label(p));
  const auto bins = a.bins.empty() ? default_histogram_edges() : a.bins;
  for (std::size_t i = 1; i < bins.size(); ++i) {
    if (!(bins[i] > bins[i - 1])) throw UsageError("--bins must increase strictly");
  }
  if (bins.size() < 2) throw UsageError("--bins needs at least two edges");

  auto conf = input_config(a.in);
  conf["profiles"] = a.profiles;
  conf["bins_s"] = bins;
  conf["min_speed_mps"] = a.smin_mps;
  manifest.config() = conf;

  const auto data = ingest(a.in, out, manifest, watch);
  std::vector<ErrorReport> reports;
  for (const auto& [label, dir] : specs) {
    if (!fs::exists(dir)) throw std::runtime_error("profile '" + label + "': " + dir + " does not exist");
    const auto profile = read_profile(dir, data.net, a.smin_mps);
    manifest.input(dir);
    const auto solutions = solutions_from_profile(profile);
    const auto groups = group_by_period(data.snap.trips, profile.period_length(),
                                        default_horizon(data.snap.trips, profile.period_length()));
    try {
      reports.push_back(make_error_report(label, groups, solutions, data.net, bins));
    } catch (const EvaluationError& e) {
      err << "error: profile '" << label << "' has no travel-time layer for period "
          << e.period_start() << "\n";
      return 1;
    }
    const auto& h = reports.back().histogram;
    if (h.overflow_count > 0) {
      err << "warning: " << h.overflow_count << " errors of '" << label
          << "' fall outside the histogram range\n";
    }
  }
  manifest.stage("evaluate", watch.lap());

  const auto deviation = distance_deviation(data.snap.trips);
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  write_file_atomic(dir / "report.json", report_json(reports, &deviation).dump(2) + "\n");
  write_file_atomic(dir / "report.md", report_markdown(reports));
  write_file_atomic(dir / "histogram.csv", histogram_csv(reports));
  manifest.output(dir / "report.json");
  manifest.output(dir / "report.md");
  manifest.output(dir / "histogram.csv");
  if (a.svg) {
    write_file_atomic(dir / "histogram.svg", histogram_svg(reports));
    manifest.output(dir / "histogram.svg");
  }
  manifest.stage("write", watch.lap());
  manifest.write(dir);
  out << report_markdown(reports);
  return 0;
}

// simulate

struct SimulateArgs {
  InputOptions in;
  std::vector<std::string> tt{"freeflow"};
  std::vector<std::size_t> fleet_sizes;
  std::string config;
  std::string out_dir;
  double smin_mps = 0.5;
  std::optional<std::uint64_t> seed;
  bool force_serve = false;
  std::optional<double> dt_batch, dt_max, dt_reposition, n_days, cell_m;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream&) {
  Stopwatch watch;
  Manifest manifest("simulate");
  SimConfig cfg;
  if (!a.config.empty()) {
    cfg = parse_sim_config(a.config, cfg);
    manifest.input(a.config);
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.force_serve) cfg.force_serve = true;
  if (a.dt_batch) cfg.dt_batch_s = *a.dt_batch;
  if (a.dt_max) cfg.dt_max_s = *a.dt_max;
  if (a.dt_reposition) cfg.dt_reposition_s = *a.dt_reposition;
  if (a.n_days) cfg.n_days = *a.n_days;
  if (a.cell_m) cfg.cell_size_m = *a.cell_m;
  auto fleet_sizes = a.fleet_sizes;
  if (fleet_sizes.empty()) fleet_sizes.push_back(cfg.fleet_size);
  try {
    for (const auto n : fleet_sizes) {
      SimConfig c = cfg;
      c.fleet_size = n;
      c.validate();
    }
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  std::vector<std::pair<std::string, std::string>> sources;
  for (const auto& t : a.tt) {
    if (t == "freeflow") {
      sources.emplace_back("freeflow", "");
    } else {
      sources.push_back(split_label(t));
    }
  }

  auto conf = input_config(a.in);
  conf["sim"] = sim_config_json(cfg);
  conf["fleet_sizes"] = fleet_sizes;
  conf["tt"] = a.tt;
  manifest.config() = conf;

  const auto data = ingest(a.in, out, manifest, watch);
  const auto requests = generate_requests(data.net, data.snap.trips);
  const auto grid = build_grid(data.net, cfg.cell_size_m);
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);

  json runs = json::array();
  for (const auto& [label, path] : sources) {
    std::optional<TravelTimeProfile> profile;
    if (!path.empty()) {
      if (!fs::exists(path)) throw std::runtime_error("profile '" + label + "': " + path + " does not exist");
      profile = read_profile(path, data.net, a.smin_mps);
      manifest.input(path);
    }
    const TravelTimeSource source(profile ? &*profile : nullptr);
    for (const auto n : fleet_sizes) {
      SimConfig c = cfg;
      c.fleet_size = n;
      const auto result = run_simulation(c, requests, data.net, grid, source);
      const auto log_path = dir / ("events_" + label + "_" + std::to_string(n) + ".csv");
      write_file_atomic(log_path, event_log_csv(result.events));
      manifest.output(log_path);
      manifest.stage("simulate_" + label + "_" + std::to_string(n), watch.lap());
      runs.push_back({{"label", label},
                      {"fleet_size", n},
                      {"event_log", log_path.filename().string()},
                      {"kpis", kpi_json(result.kpis)}});
      out << label << " fleet " << n << ": served " << result.kpis.served << "/"
          << result.kpis.requests << ", profit " << format_double(result.kpis.profit) << "\n";
    }
  }
  json doc{{"config", sim_config_json(cfg)}, {"runs", runs}};
  write_file_atomic(dir / "kpis.json", doc.dump(2) + "\n");
  manifest.output(dir / "kpis.json");
  manifest.write(dir);
  return 0;
}

// CLI11 reads config files for the top-level app only, so option values from
// `calibrate --config` and `evaluate --config` are spliced into the argument
// list here. Options already on the command line are left alone.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
  if (args.empty() || (args[0] != "calibrate" && args[0] != "evaluate")) return args;
  std::optional<std::string> path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const auto name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(name);
    if (name != "config") continue;
    if (eq != std::string::npos) {
      path = a.substr(eq + 1);
    } else if (i + 1 < args.size()) {
      path = args[i + 1];
    }
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw UsageError("cannot read config file " + *path);
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 &&
                                   (item.parents[0] == args[0] || item.parents[0] == "default"))) {
      continue;
    }
    if (given.count(item.name) != 0) continue;
    if (item.inputs.size() == 1) {
      args.push_back("--" + item.name + "=" + item.inputs[0]);
    } else {
      for (const auto& v : item.inputs) args.push_back("--" + item.name + "=" + v);
    }
  }
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Road-network travel-time calibration from trip records and AMoD fleet simulation",
               "amodscale"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CalibrateArgs ca;
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate per-period edge scaling factors");
  add_input_options(calibrate, ca.in);
  calibrate->add_option("--method", ca.method, "mfm, ssm or asm")
      ->required()
      ->check(CLI::IsMember({"mfm", "ssm", "asm"}));
  calibrate->add_option("--out", ca.out_dir, "Output directory")->required();
  calibrate->add_option("--dt-scale", ca.dt_scale, "Period length in seconds")->capture_default_str();
  calibrate->add_option("--cell-m", ca.cell_m, "Grid cell size in meters")->capture_default_str();
  calibrate->add_option("--smin-mps", ca.smin_mps, "Minimum scaled edge speed")->capture_default_str();
  calibrate->add_option("--solver-tol", ca.solver_tol, "Solver tolerance")->capture_default_str();
  calibrate->add_option("--max-iter", ca.max_iter, "Solver iteration limit")->capture_default_str();
  calibrate->add_option("--horizon-start", ca.horizon_start, "Horizon start, epoch seconds");
  calibrate->add_option("--horizon-end", ca.horizon_end, "Horizon end (exclusive), epoch seconds");
  calibrate->add_flag("--geojson", ca.geojson, "Also write per-cell mean factors as GeoJSON");
  calibrate->add_option("--config", "INI/TOML file with option values; flags win")
      ->check(CLI::ExistingFile);

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Trip travel-time errors of calibrated profiles");
  add_input_options(evaluate, ea.in);
  evaluate->add_option("--profile", ea.profiles, "LABEL=DIR of a calibrated profile (repeatable)")
      ->required();
  evaluate->add_option("--out", ea.out_dir, "Output directory")->required();
  evaluate->add_option("--smin-mps", ea.smin_mps, "Minimum scaled edge speed")->capture_default_str();
  evaluate->add_option("--bins", ea.bins, "Histogram edges in seconds")->delimiter(',');
  evaluate->add_flag("--svg", ea.svg, "Also write histogram.svg");
  evaluate->add_option("--config", "INI/TOML file with option values; flags win")
      ->check(CLI::ExistingFile);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run the AMoD fleet simulation");
  add_input_options(simulate, sa.in);
  simulate->add_option("--tt", sa.tt, "freeflow or LABEL=DIR of a profile (repeatable)")
      ->capture_default_str();
  simulate->add_option("--fleet-sizes", sa.fleet_sizes, "Comma-separated fleet sizes")->delimiter(',');
  simulate->add_option("--config", sa.config, "Scenario file (key = value)")->check(CLI::ExistingFile);
  simulate->add_option("--out", sa.out_dir, "Output directory")->required();
  simulate->add_option("--smin-mps", sa.smin_mps, "Minimum scaled edge speed of profiles")
      ->capture_default_str();
  simulate->add_option("--seed", sa.seed, "Seed for initial fleet placement");
  simulate->add_flag("--force-serve", sa.force_serve, "Serve as many requests as possible");
  simulate->add_option("--dt-batch", sa.dt_batch, "Batch period in seconds");
  simulate->add_option("--dt-max", sa.dt_max, "Maximum wait in seconds");
  simulate->add_option("--dt-reposition", sa.dt_reposition, "Repositioning period in seconds");
  simulate->add_option("--n-days", sa.n_days, "Days charged per vehicle");
  simulate->add_option("--cell-m", sa.cell_m, "Repositioning cell size in meters");

  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  try {
    args = merge_config_file(std::move(args));
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (calibrate->parsed()) return cmd_calibrate(ca, out, err);
    if (evaluate->parsed()) return cmd_evaluate(ea, out, err);
    if (simulate->parsed()) return cmd_simulate(sa, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const CalibrationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace amodscale::cli
