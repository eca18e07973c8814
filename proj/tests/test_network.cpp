#include <doctest.h>

#include <fstream>

#include "amodscale/errors.hpp"
#include "amodscale/network.hpp"
#include "support/synth.hpp"
#include "support/tmp.hpp"

using namespace amodscale;

namespace {

RoadNetwork two_node() {
  return RoadNetwork({{1, 0.0, 0.0}, {2, 0.001, 0.0}}, {{7, 1, 2, 100.0, 10.0, 0.0}});
}

// 1 -> 2 -> 4 and 1 -> 3 -> 4, both of length 2.
RoadNetwork diamond() {
  return RoadNetwork({{1, 0, 0}, {2, 0, 0.001}, {3, 0.001, 0}, {4, 0.001, 0.001}},
                     {{10, 1, 3, 1.0, 1.0, 0}, {11, 3, 4, 1.0, 1.0, 0}, {12, 1, 2, 1.0, 1.0, 0},
                      {13, 2, 4, 1.0, 1.0, 0}});
}

}  // namespace

TEST_CASE("free-flow time is length over speed") {
  const auto net = two_node();
  CHECK(net.edge(7).freeflow_time_s == 10.0);
  CHECK(net.node_count() == 2);
}

TEST_CASE("construction validates references and domains") {
  CHECK_THROWS_AS(RoadNetwork({{1, 0, 0}}, {{1, 1, 99, 10.0, 1.0, 0}}), ReferenceError);
  CHECK_THROWS_AS(RoadNetwork({{1, 0, 0}, {2, 0, 0}}, {{1, 1, 2, 0.0, 1.0, 0}}), DomainError);
  CHECK_THROWS_AS(RoadNetwork({{1, 0, 0}, {2, 0, 0}}, {{1, 1, 2, 5.0, -1.0, 0}}), DomainError);
  CHECK_THROWS_AS(RoadNetwork({{1, 0, 0}, {1, 0, 0}}, {}), DomainError);
  CHECK_THROWS_AS(RoadNetwork({{1, 0, 0}, {2, 0, 0}}, {{1, 1, 2, 1, 1, 0}, {1, 2, 1, 1, 1, 0}}),
                  DomainError);
}

TEST_CASE("ring with both directions has two out-edges per node") {
  std::vector<NodeRecord> nodes{{1, 0, 0}, {2, 0, 1e-3}, {3, 1e-3, 1e-3}, {4, 1e-3, 0}};
  std::vector<EdgeRecord> edges;
  EdgeId id = 1;
  for (NodeId a = 1; a <= 4; ++a) {
    const NodeId b = a % 4 + 1;
    edges.push_back({id++, a, b, 10, 1, 0});
    edges.push_back({id++, b, a, 10, 1, 0});
  }
  const RoadNetwork net(nodes, edges);
  CHECK(net.edge_count() == 8);
  for (std::size_t i = 0; i < net.node_count(); ++i) CHECK(net.out_edges(i).size() == 2);
}

TEST_CASE("load_network reads CSV and reports bad rows") {
  const auto dir = synth::scratch_dir("network_load");
  {
    std::ofstream n(dir / "nodes.csv");
    n << "node_id,lon,lat\n1,-73.9,40.7\n2,-73.89,40.71\n";
    std::ofstream e(dir / "edges.csv");
    e << "edge_id,from_node,to_node,length_m,freeflow_speed_mps\n5,1,2,100,10\n";
  }
  const auto net = load_network(dir / "nodes.csv", dir / "edges.csv");
  CHECK(net.edge(5).freeflow_time_s == 10.0);
  {
    std::ofstream e(dir / "bad.csv");
    e << "edge_id,from_node,to_node,length_m,freeflow_speed_mps\n5,1,2,abc,10\n";
  }
  CHECK_THROWS_AS(load_network(dir / "nodes.csv", dir / "bad.csv"), ParseError);
  {
    std::ofstream e(dir / "noheader.csv");
    e << "5,1,2,100,10\n";
  }
  CHECK_THROWS_AS(load_network(dir / "nodes.csv", dir / "noheader.csv"), ParseError);
  CHECK_THROWS_AS(load_network(dir / "missing.csv", dir / "edges.csv"), ParseError);
}

TEST_CASE("shortest path on a two-node network") {
  const auto net = two_node();
  const auto p = shortest_path(net, 1, 2, EdgeWeight::distance());
  REQUIRE(p);
  CHECK(p->edges == std::vector<EdgeId>{7});
  CHECK(p->weight == 100.0);
  CHECK_FALSE(shortest_path(net, 2, 1, EdgeWeight::distance()));
  const auto self = shortest_path(net, 1, 1, EdgeWeight::distance());
  REQUIRE(self);
  CHECK(self->edges.empty());
}

TEST_CASE("equal-weight paths resolve to the smaller predecessor node id") {
  const auto net = diamond();
  const auto p = shortest_path(net, 1, 4, EdgeWeight::distance());
  REQUIRE(p);
  CHECK(p->edges == std::vector<EdgeId>{12, 13});
}

TEST_CASE("parallel edges resolve to the smaller edge id") {
  const RoadNetwork net({{1, 0, 0}, {2, 0, 1e-3}}, {{9, 1, 2, 3.0, 1, 0}, {4, 1, 2, 3.0, 1, 0}});
  const auto p = shortest_path(net, 1, 2, EdgeWeight::distance());
  REQUIRE(p);
  CHECK(p->edges == std::vector<EdgeId>{4});
}

TEST_CASE("Dijkstra matches Floyd-Warshall on random graphs") {
  synth::Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto net = synth::random_network(rng, 3 + static_cast<int>(rng.index(20)),
                                           static_cast<int>(rng.index(50)));
    const auto w = EdgeWeight::distance().materialize(net);
    const auto oracle = synth::floyd_warshall(net, w);
    for (std::size_t o = 0; o < net.node_count(); ++o) {
      const ShortestPathTree tree(net, o, w);
      for (std::size_t d = 0; d < net.node_count(); ++d) {
        CHECK(tree.distance(d) == oracle[o][d]);
        if (d != o && tree.reachable(d)) {
          const auto path = tree.path_to(d);
          CHECK(path_distance(net, path) == oracle[o][d]);
        }
      }
    }
  }
}

TEST_CASE("bounded search leaves far nodes unreached") {
  const RoadNetwork net({{1, 0, 0}, {2, 0, 1e-3}, {3, 0, 2e-3}},
                        {{1, 1, 2, 5.0, 1, 0}, {2, 2, 3, 5.0, 1, 0}});
  const auto w = EdgeWeight::distance().materialize(net);
  const ShortestPathTree tree(net, 0, w, 7.0);
  CHECK(tree.reachable(1));
  CHECK_FALSE(tree.reachable(2));
}

TEST_CASE("layers enforce the factor box") {
  const auto net = two_node();  // cap at smin 0.5: (100 / 0.5) / 10 = 20
  CHECK(factor_cap(net.edge(7), 0.5) == 20.0);
  CHECK_NOTHROW(TravelTimeLayer(net, 0, {20.0}, 0.5));
  CHECK_THROWS_AS(TravelTimeLayer(net, 0, {0.99}, 0.5), DomainError);
  CHECK_THROWS_AS(TravelTimeLayer(net, 0, {20.5}, 0.5), DomainError);
  CHECK_THROWS_AS(TravelTimeLayer(net, 0, {1.0, 1.0}, 0.5), DomainError);
}

TEST_CASE("scaled path time multiplies free-flow time") {
  const auto net = diamond();
  const TravelTimeLayer layer(net, 0, {1.0, 2.0, 1.5, 1.0}, 0.1);
  const std::vector<EdgeId> path{10, 11};
  CHECK(path_travel_time(net, path) == 2.0);
  CHECK(path_travel_time(net, path, &layer) == 3.0);
  const std::vector<EdgeId> broken{10, 13};
  CHECK_THROWS_AS(path_travel_time(net, broken), ContractError);
  const auto p = shortest_path(net, 1, 4, EdgeWeight::scaled_time(layer));
  REQUIRE(p);
  CHECK(p->edges == std::vector<EdgeId>{12, 13});
  CHECK(p->weight == 2.5);
}

TEST_CASE("profiles must be contiguous") {
  const auto net = two_node();
  const auto a = TravelTimeLayer::identity(net, 0);
  const auto b = TravelTimeLayer::identity(net, 1800);
  const auto c = TravelTimeLayer::identity(net, 5400);
  CHECK_THROWS_AS(TravelTimeProfile({a, c}, 1800), DomainError);
  const TravelTimeProfile p({b, a}, 1800);
  CHECK(p.start() == 0);
  CHECK(p.end() == 3600);
  CHECK(p.layer_at(-5).period_start() == 0);
  CHECK(p.layer_at(1799.9).period_start() == 0);
  CHECK(p.layer_at(1800).period_start() == 1800);
  CHECK(p.layer_at(99999).period_start() == 1800);
  CHECK(p.covers(0, 3600));
  CHECK_FALSE(p.covers(0, 3601));
}

TEST_CASE("scaled distances never undercut free-flow distances") {
  synth::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = synth::random_network(rng, 12, 30);
    std::vector<double> f(net.edge_count());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::min(rng.uniform(1.0, 3.0), factor_cap(net.edges()[i], 0.1));
    const TravelTimeLayer layer(net, 0, f, 0.1);
    const auto free_w = EdgeWeight::freeflow_time().materialize(net);
    const auto scaled_w = EdgeWeight::scaled_time(layer).materialize(net);
    const ShortestPathTree a(net, 0, free_w), b(net, 0, scaled_w);
    for (std::size_t d = 0; d < net.node_count(); ++d) CHECK(b.distance(d) >= a.distance(d));
  }
}
