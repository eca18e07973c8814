#include <doctest.h>

#include <set>

#include "amodscale/amod.hpp"
#include "amodscale/errors.hpp"
#include "amodscale/matching.hpp"
#include "support/eventlog.hpp"
#include "support/synth.hpp"

using namespace amodscale;

namespace {

// O(1) --1 km--> ... ; P(3) is the north-east-most node, so a single huge
// cell anchors there. P -> O 1000 m, O -> D 2000 m, 10 m/s.
RoadNetwork pod() {
  return RoadNetwork({{1, -73.99, 40.70}, {2, -73.98, 40.70}, {3, -73.97, 40.72}},
                     {{1, 3, 1, 1000.0, 10.0, 0}, {2, 1, 2, 2000.0, 10.0, 0},
                      {3, 2, 3, 1000.0, 10.0, 0}, {4, 1, 3, 1000.0, 10.0, 0}});
}

Request request(std::size_t id, double t, std::size_t o, std::size_t d, double dod) {
  Request r;
  r.id = id;
  r.t_r = t;
  r.origin_idx = o;
  r.dest_idx = d;
  r.d_od_m = dod;
  return r;
}

Vehicle vehicle(std::size_t id, std::size_t node, double free_time) {
  Vehicle v;
  v.id = id;
  v.free_node = node;
  v.free_time = free_time;
  return v;
}

}  // namespace

TEST_CASE("pair weight at default prices") {
  const SimConfig cfg;
  CHECK(pair_weight(cfg, 0.0, 2000.0) == 1.0);
  CHECK(pair_weight(cfg, 1000.0, 2000.0) == 0.75);
  CHECK(pair_weight(cfg, 5000.0, 1000.0) == -0.5);
}

TEST_CASE("maximum wait makes a pair infeasible one second late") {
  // 361 m at 1 m/s.
  const RoadNetwork net({{1, 0, 0}, {2, 0.001, 0}}, {{1, 1, 2, 361.0, 1.0, 0}, {2, 2, 1, 360.0, 1.0, 0}});
  const SimConfig cfg;
  const std::vector<Request> batch{request(0, 1000.0, 1, 0, 360.0)};
  std::vector<Vehicle> fleet{vehicle(0, 0, 1000.0)};
  CHECK(feasible_pairs(net, fleet, batch, 1000.0, cfg, {}).empty());
  const std::vector<Request> back{request(0, 1000.0, 0, 1, 361.0)};
  fleet[0].free_node = 1;
  CHECK(feasible_pairs(net, fleet, back, 1000.0, cfg, {}).size() == 1);
}

TEST_CASE("matching equals exhaustive enumeration") {
  synth::Rng rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    const auto rows = 1 + rng.index(6), cols = 1 + rng.index(6);
    WeightMatrix w(rows, std::vector<std::optional<double>>(cols));
    for (auto& row : w)
      for (auto& x : row)
        if (rng.coin(0.7)) x = static_cast<double>(rng.integer(-8, 20)) * 0.25;
    const auto m = max_weight_matching(w, MatchingMode::kProfit);
    CHECK(m.total_weight == synth::brute_force_matching(w, true));
    std::set<std::size_t> used;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!m.row_to_col[r]) continue;
      CHECK(used.insert(*m.row_to_col[r]).second);
      CHECK(*w[r][*m.row_to_col[r]] >= 0.0);
    }
    const auto c = max_weight_matching(w, MatchingMode::kCardinality);
    const auto [size, weight] = synth::brute_force_max_cardinality(w);
    CHECK(c.size == size);
    CHECK(c.total_weight == weight);
  }
}

TEST_CASE("repositioning toward equal shares") {
  const auto net = synth::grid_network(4, 4, 250.0);
  const auto grid = build_grid(net, 500.0);  // 2 x 2 cells of 2 x 2 nodes
  const auto zones = classify_edges(net, grid);
  const auto anchors = cell_anchor_nodes(net, grid, zones);
  REQUIRE(anchors.size() == 4);

  std::vector<Vehicle> fleet;
  for (std::size_t v = 0; v < 4; ++v) fleet.push_back(vehicle(v, 0, 0.0));
  const auto moves = plan_reposition(net, fleet, zones, anchors, 0.0);
  CHECK(moves.size() == 3);
  std::set<CellId> targets;
  for (const auto& m : moves) {
    CHECK(m.vehicle_pos != 0);
    targets.insert(m.to_cell);
  }
  CHECK(targets.size() == 3);

  std::vector<Vehicle> spread;
  for (const auto& [cell, node] : anchors) spread.push_back(vehicle(spread.size(), node, 0.0));
  CHECK(plan_reposition(net, spread, zones, anchors, 0.0).empty());

  for (auto& v : fleet) v.free_time = 100.0;
  CHECK(plan_reposition(net, fleet, zones, anchors, 0.0).empty());
}

TEST_CASE("empty demand costs only the fixed fleet cost") {
  const auto net = pod();
  const auto grid = build_grid(net, 1e5);
  SimConfig cfg;
  cfg.fleet_size = 2;
  const auto r = run_simulation(cfg, {}, net, grid, {});
  CHECK(r.kpis.profit == -50.0);
  CHECK(profit_from_result(cfg, r) == -50.0);
}

TEST_CASE("one served request") {
  const auto net = pod();
  const auto grid = build_grid(net, 1e5);
  const auto zones = classify_edges(net, grid);
  REQUIRE(initial_positions(net, grid, zones, 1, 0)[0] == 2);
  SimConfig cfg;
  cfg.fleet_size = 1;
  std::vector<Request> reqs{request(0, 1000.0, 0, 1, 2000.0)};
  const auto r = run_simulation(cfg, reqs, net, grid, {});
  REQUIRE(r.kpis.served == 1);
  CHECK(r.fleet[0].odometer_m == 3000.0);
  CHECK(r.kpis.profit == -24.25);
  CHECK(r.requests[0].pickup_time == 1130.0);  // decision at 1030, 100 s deadhead
  CHECK(r.requests[0].status == RequestStatus::kServed);
  const auto audit = synth::audit_event_log(event_log_csv(r.events));
  CHECK(audit.profit == -24.25);
}

TEST_CASE("negative pairs are skipped unless serving is forced") {
  // A 0.2 km request after a 5 km deadhead loses money.
  const RoadNetwork net({{1, -73.99, 40.70}, {2, -73.98, 40.70}, {3, -73.90, 40.80}},
                        {{1, 3, 1, 5000.0, 50.0, 0}, {2, 1, 2, 200.0, 10.0, 0}, {3, 2, 3, 5000.0, 50.0, 0}});
  const auto grid = build_grid(net, 1e6);
  SimConfig cfg;
  std::vector<Request> reqs{request(0, 0.0, 0, 1, 200.0)};
  CHECK(run_simulation(cfg, reqs, net, grid, {}).kpis.served == 0);
  cfg.force_serve = true;
  CHECK(run_simulation(cfg, reqs, net, grid, {}).kpis.served == 1);
}

TEST_CASE("simulation invariants on random demand") {
  const auto net = synth::grid_network(8, 8, 250.0, 250.0, 8.0);
  const auto grid = build_grid(net, 500.0);
  synth::Rng rng(52);
  const std::vector<double> ones(net.edge_count(), 1.0);
  const auto trips = synth::generative_trips(net, ones, 300, rng, 3600, 7200);
  const auto requests = generate_requests(net, trips);
  for (std::size_t i = 1; i < requests.size(); ++i) CHECK(requests[i - 1].t_r <= requests[i].t_r);

  for (const bool force : {false, true}) {
    SimConfig cfg;
    cfg.fleet_size = 12;
    cfg.dt_reposition_s = 600;
    cfg.force_serve = force;
    cfg.seed = 7;
    const auto r = run_simulation(cfg, requests, net, grid, {});
    CHECK(r.kpis.served + r.kpis.rejected == requests.size());
    CHECK(r.kpis.served > 0);
    const auto audit = synth::audit_event_log(event_log_csv(r.events));
    CHECK(std::abs(audit.profit - r.kpis.profit) <= 1e-9);
    CHECK(audit.served == r.kpis.served);
    CHECK(audit.rejected == r.kpis.rejected);
    CHECK_FALSE(audit.request_in_two_plans);
    CHECK(audit.max_wait_s <= cfg.dt_max_s);
    CHECK(std::abs(profit_from_result(cfg, r) - r.kpis.profit) <= 1e-9);

    for (const auto& q : r.requests) {
      if (q.status == RequestStatus::kServed) CHECK(*q.pickup_time <= q.t_r + cfg.dt_max_s);
    }
    for (const auto& v : r.fleet) {
      double sum = 0.0;
      for (std::size_t i = 0; i < v.legs.size(); ++i) {
        const auto& leg = v.legs[i];
        CHECK(leg.end >= leg.start);
        sum += leg.distance_m;
        if (i > 0) {
          CHECK(leg.from_idx == v.legs[i - 1].to_idx);
          CHECK(leg.start >= v.legs[i - 1].end);
        }
      }
      CHECK(sum == doctest::Approx(v.odometer_m).epsilon(1e-12));
    }
    // Same inputs, same log.
    const auto again = run_simulation(cfg, requests, net, grid, {});
    CHECK(event_log_csv(again.events) == event_log_csv(r.events));
  }
}

TEST_CASE("congestion never adds feasible pairs") {
  const auto net = synth::grid_network(7, 7, 250.0, 250.0, 8.0);
  synth::Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(net.edge_count());
    for (auto& x : f) x = rng.uniform(1.0, 2.5);
    const TravelTimeProfile profile({TravelTimeLayer(net, 0, f, 0.5)}, 1800);
    std::vector<Vehicle> fleet;
    for (std::size_t v = 0; v < 8; ++v) fleet.push_back(vehicle(v, rng.index(net.node_count()), rng.uniform(0, 60)));
    std::vector<Request> batch;
    for (std::size_t i = 0; i < 8; ++i) {
      const auto o = rng.index(net.node_count());
      batch.push_back(request(i, rng.uniform(0, 30), o, (o + 1) % net.node_count(), 250.0));
    }
    const SimConfig cfg;
    const auto free_pairs = feasible_pairs(net, fleet, batch, 30.0, cfg, {});
    const auto slow_pairs = feasible_pairs(net, fleet, batch, 30.0, cfg, TravelTimeSource(&profile));
    CHECK(slow_pairs.size() <= free_pairs.size());
  }
}

TEST_CASE("profile must cover the requests") {
  const auto net = pod();
  const auto grid = build_grid(net, 1e5);
  const TravelTimeProfile profile({TravelTimeLayer::identity(net, 0)}, 1800);
  std::vector<Request> reqs{request(0, 5000.0, 0, 1, 2000.0)};
  CHECK_THROWS_AS(run_simulation(SimConfig{}, reqs, net, grid, TravelTimeSource(&profile)), DomainError);
}

TEST_CASE("scenario files") {
  const auto cfg = parse_sim_config_text(
      "# fleet\n[sim]\nfleet_size = 40\ndt_max_s = 300 ; five minutes\nforce_serve = true\nseed=9\n");
  CHECK(cfg.fleet_size == 40);
  CHECK(cfg.dt_max_s == 300.0);
  CHECK(cfg.force_serve);
  CHECK(cfg.seed == 9);
  CHECK(cfg.dt_batch_s == 30.0);
  CHECK_THROWS_AS(parse_sim_config_text("fleet = 3\n"), ParseError);
  CHECK_THROWS_AS(parse_sim_config_text("fleet_size = many\n"), ParseError);
  SimConfig bad;
  bad.fleet_size = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("initial placement is seeded") {
  const auto net = synth::grid_network(6, 6);
  const auto grid = build_grid(net, 500.0);
  const auto zones = classify_edges(net, grid);
  const auto a = initial_positions(net, grid, zones, 20, 1);
  CHECK(a == initial_positions(net, grid, zones, 20, 1));
  CHECK(a != initial_positions(net, grid, zones, 20, 2));
  const auto anchors = cell_anchor_nodes(net, grid, zones);
  std::set<std::size_t> distinct(a.begin(), a.begin() + static_cast<long>(anchors.size()));
  CHECK(distinct.size() == anchors.size());
}
