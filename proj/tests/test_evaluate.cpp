#include <doctest.h>

#include <numeric>

#include <nlohmann/json.hpp>

#include "amodscale/calibrate.hpp"
#include "amodscale/errors.hpp"
#include "amodscale/evaluate.hpp"
#include "support/synth.hpp"

using namespace amodscale;

namespace {

ScalingSolution flat_solution(const RoadNetwork& net, EpochSeconds start, double f) {
  ScalingSolution s;
  s.period_start = start;
  s.period_length = 1800;
  s.factors.assign(net.edge_count(), f);
  return s;
}

}  // namespace

TEST_CASE("percentiles interpolate linearly") {
  const std::vector<double> e{120.0, 0.0, 60.0};
  const auto row = percentile_table(e, "x");
  CHECK(row.p50 == 60.0);
  CHECK(row.max == 120.0);
  CHECK(row.p25 == 30.0);
  CHECK(row.exact_fraction == doctest::Approx(1.0 / 3.0));
  const std::vector<double> same(7, 42.0);
  const auto flat = percentile_table(same);
  CHECK(flat.p5 == 42.0);
  CHECK(flat.p95 == 42.0);
  CHECK(flat.max == 42.0);
  CHECK_THROWS_AS(percentile_table(std::vector<double>{}), DomainError);
}

TEST_CASE("95th percentile of uniform samples") {
  synth::Rng rng(41);
  std::vector<double> v(1000);
  for (auto& x : v) x = rng.uniform(0.0, 100.0);
  const auto row = percentile_table(v);
  CHECK(row.p95 >= 90.0);
  CHECK(row.p95 <= 100.0);
}

TEST_CASE("percentiles are monotone in rank") {
  synth::Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng.index(30));
    for (auto& x : v) x = rng.coin(0.3) ? 0.0 : rng.uniform(0.0, 1e4);
    const auto r = percentile_table(v);
    CHECK(r.p5 <= r.p25);
    CHECK(r.p25 <= r.p50);
    CHECK(r.p50 <= r.p75);
    CHECK(r.p75 <= r.p95);
    CHECK(r.p95 <= r.max);
    CHECK(r.exact_fraction >= 0.0);
    CHECK(r.exact_fraction <= 1.0);
  }
}

TEST_CASE("histogram binning") {
  const auto edges = default_histogram_edges();
  const auto h = error_histogram(std::vector<double>{0.5, 30.0, 90.0}, edges);
  REQUIRE(h.fractions.size() == 6);
  CHECK(h.fractions[0] == doctest::Approx(1.0 / 3));
  CHECK(h.fractions[1] == doctest::Approx(1.0 / 3));
  CHECK(h.fractions[2] == doctest::Approx(1.0 / 3));
  CHECK(h.fractions[3] == 0.0);
  CHECK(h.fractions[4] == 0.0);
  CHECK(h.fractions[5] == 0.0);
  CHECK(h.overflow_count == 0);

  const auto closed = error_histogram(std::vector<double>{4800.0, 5000.0}, edges);
  CHECK(closed.counts[5] == 1);
  CHECK(closed.overflow_count == 1);
  CHECK_THROWS_AS(error_histogram(std::vector<double>{1.0}, std::vector<double>{0.0, 0.0}), DomainError);
}

TEST_CASE("histogram fractions sum to one and counts to the sample size") {
  synth::Rng rng(43);
  const auto edges = default_histogram_edges();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng.index(100));
    for (auto& x : v) x = rng.uniform(0.0, 6000.0);
    const auto h = error_histogram(v, edges);
    const double total = std::accumulate(h.fractions.begin(), h.fractions.end(), h.overflow_fraction);
    CHECK(std::abs(total - 1.0) <= 1e-9);
    const auto n = std::accumulate(h.counts.begin(), h.counts.end(), h.overflow_count);
    CHECK(n == v.size());
  }
}

TEST_CASE("trip errors against a scaled network") {
  // One edge of 600 s free flow.
  const RoadNetwork net({{1, 0, 0}, {2, 0.01, 0}}, {{1, 1, 2, 6000.0, 10.0, 0}});
  TripGroup g;
  g.period_start = 0;
  g.period_length = 1800;
  g.targets.push_back({1, 2, 600.0, {1}, 1, 600.0, 600.0});
  std::vector<TripGroup> groups{g};
  std::vector<ScalingSolution> sols{flat_solution(net, 0, 1.0)};
  auto errs = trip_abs_errors(groups, sols, net);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].abs_error_s == 0.0);

  // Scaled path time 436 s.
  const RoadNetwork fast({{1, 0, 0}, {2, 0.01, 0}}, {{1, 1, 2, 4360.0, 10.0, 0}});
  std::vector<ScalingSolution> ones{flat_solution(fast, 0, 1.0)};
  errs = trip_abs_errors(groups, ones, fast);
  CHECK(errs[0].abs_error_s == 164.0);

  groups[0].period_start = 1800;
  try {
    trip_abs_errors(groups, ones, fast);
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    CHECK(e.period_start() == 1800);
  }
}

TEST_CASE("distance deviation") {
  std::vector<SnappedTrip> trips(3);
  trips[0].sd_distance_m = 5200; trips[0].trip.distance_m = 5000; trips[0].trip.duration_s = 520;
  trips[1].sd_distance_m = 3000; trips[1].trip.distance_m = 3000; trips[1].trip.duration_s = 300;
  trips[2].sd_distance_m = 9000; trips[2].trip.distance_m = 7000; trips[2].trip.duration_s = 900;
  const auto d = distance_deviation(trips);
  CHECK(d.deviations_m == std::vector<double>{200, 0, 2000});
  CHECK(d.fraction_within_250m == doctest::Approx(2.0 / 3));
  CHECK(d.fraction_within_1km == doctest::Approx(2.0 / 3));
  CHECK(d.speeds_mps == std::vector<double>{10, 10, 10});
}

TEST_CASE("on-network trips have zero distance deviation") {
  const auto net = synth::grid_network(5, 5);
  synth::Rng rng(44);
  const auto truth = synth::random_truth(net, rng, 1.0, 2.0);
  std::vector<TripRecord> raw;
  for (const auto& t : synth::generative_trips(net, truth, 100, rng, 0, 1800)) raw.push_back(t.trip);
  const auto snapped = snap_and_route(net, raw);
  const auto d = distance_deviation(snapped.trips);
  CHECK(d.trip_count == 100);
  for (const double x : d.deviations_m) CHECK(x <= 1.0);
}

TEST_CASE("heterogeneous and uniform ground truth") {
  const auto net = synth::grid_network(6, 6);
  const auto grid = build_grid(net, 500.0);
  const auto zones = classify_edges(net, grid);
  synth::Rng rng(45);
  const auto edges = default_histogram_edges();

  SUBCASE("two clusters") {
    const auto truth = synth::two_cluster_truth(net, 1.2, 2.5);
    const auto trips = synth::generative_trips(net, truth, 200, rng, 0, 1800);
    const auto groups = group_by_period(trips, 1800, Horizon{0, 1800});
    std::map<Method, double> exact;
    for (const auto m : {Method::kMfm, Method::kSsm, Method::kAsm}) {
      const auto sols = calibrate_horizon(groups, net, zones, CalibConfig{}, m);
      exact[m] = make_error_report("m", groups, sols, net, edges).percentiles.exact_fraction;
    }
    CHECK(exact[Method::kSsm] == 1.0);
    CHECK(exact[Method::kAsm] == 1.0);
    CHECK(exact[Method::kMfm] < 0.5);
  }
  SUBCASE("single factor") {
    const std::vector<double> truth(net.edge_count(), 1.7);
    const auto trips = synth::generative_trips(net, truth, 200, rng, 0, 1800);
    const auto groups = group_by_period(trips, 1800, Horizon{0, 1800});
    for (const auto m : {Method::kMfm, Method::kSsm, Method::kAsm}) {
      const auto sols = calibrate_horizon(groups, net, zones, CalibConfig{}, m);
      CHECK(make_error_report("m", groups, sols, net, edges).percentiles.exact_fraction == 1.0);
      if (m == Method::kMfm) CHECK(std::abs(*sols[0].f_mean - 1.7) <= 1e-9);
    }
  }
}

TEST_CASE("report rendering") {
  ErrorReport r;
  r.label = "ASM";
  r.abs_errors = {0.0, 30.0, 90.0, 400.0};
  r.percentiles = percentile_table(r.abs_errors, "ASM");
  r.histogram = error_histogram(r.abs_errors, default_histogram_edges());
  const std::vector<ErrorReport> reports{r};
  const auto md = report_markdown(reports);
  CHECK(md.find("| ASM |") != std::string::npos);
  CHECK(md.find("95%") != std::string::npos);
  const auto j = report_json(reports);
  CHECK(j["methods"][0]["label"] == "ASM");
  CHECK(j["methods"][0]["histogram"]["bins"].size() == 6);
  const auto svg = histogram_svg(reports);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(histogram_csv(reports).find("ASM,0,1,1,0.25") != std::string::npos);
}

TEST_CASE("per-cell mean factors over single-zone edges") {
  const auto net = synth::grid_network(3, 3);
  const auto grid = build_grid(net, 1e5);
  const auto zones = classify_edges(net, grid);
  auto s = flat_solution(net, 0, 2.0);
  s.factors[0] = 1.0;
  const auto cells = cell_mean_factors(net, zones, s);
  REQUIRE(cells.size() == 1);
  const double n = static_cast<double>(net.edge_count());
  CHECK(cells.at(0) == doctest::Approx((2.0 * (n - 1) + 1.0) / n));
}
