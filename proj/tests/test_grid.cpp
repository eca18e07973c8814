#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "amodscale/errors.hpp"
#include "amodscale/grid.hpp"
#include "support/synth.hpp"
#include "support/tmp.hpp"

using namespace amodscale;

TEST_CASE("grid covers the node bounding box") {
  // 5 x 5 nodes 240 m apart span 960 m each way.
  const auto net = synth::grid_network(5, 5, 240.0);
  const auto grid = build_grid(net, 500.0);
  CHECK(grid.n_cols() == 2);
  CHECK(grid.n_rows() == 2);
  CHECK(grid.cell_of(net.nodes()[0].lon, net.nodes()[0].lat) == 0);
  const auto& ne = net.nodes().back();
  CHECK(grid.cell_of(ne.lon, ne.lat) == grid.cell_count() - 1);
  CHECK(grid.cell_of(ne.lon + 1.0, ne.lat + 1.0) == grid.cell_count() - 1);
  CHECK_THROWS_AS(build_grid(net, 0.0), DomainError);
}

TEST_CASE("single cell grid holds every edge as single-zone") {
  const auto net = synth::grid_network(3, 3);
  const auto grid = build_grid(net, 1e5);
  CHECK(grid.cell_count() == 1);
  const auto zones = classify_edges(net, grid);
  CHECK(zones.single_zone.size() == net.edge_count());
  CHECK(zones.multi_zone.empty());
  CHECK(occupied_cells(zones) == std::vector<CellId>{0});
}

TEST_CASE("edges crossing a cell border are multi-zone") {
  const auto net = synth::grid_network(4, 4, 250.0);
  const auto grid = build_grid(net, 400.0);
  const auto zones = classify_edges(net, grid);
  CHECK(zones.single_zone.size() + zones.multi_zone.size() == net.edge_count());
  CHECK_FALSE(zones.multi_zone.empty());
  for (const auto& [edge, cells] : zones.multi_zone) {
    REQUIRE(cells.size() == 2);
    CHECK(cells[0] < cells[1]);
    const auto& e = net.edge(edge);
    CHECK(zones.node_cells[net.node_index(e.from_node)] != zones.node_cells[net.node_index(e.to_node)]);
  }
}

TEST_CASE("anchor node lies in its cell") {
  const auto net = synth::grid_network(6, 6, 250.0);
  const auto grid = build_grid(net, 500.0);
  const auto zones = classify_edges(net, grid);
  const auto anchors = cell_anchor_nodes(net, grid, zones);
  CHECK(anchors.size() == occupied_cells(zones).size());
  for (const auto& [cell, node] : anchors) CHECK(zones.node_cells[node] == cell);
}

TEST_CASE("geojson lists one polygon per cell") {
  const auto net = synth::grid_network(4, 4, 250.0);
  const auto grid = build_grid(net, 500.0);
  const auto dir = synth::scratch_dir("grid_geojson");
  write_grid_geojson(dir / "cells.geojson", grid, {{0, 1.25}}, "mean_factor");
  std::ifstream in(dir / "cells.geojson");
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc["type"] == "FeatureCollection");
  REQUIRE(doc["features"].size() == static_cast<std::size_t>(grid.cell_count()));
  const auto& f0 = doc["features"][0];
  CHECK(f0["geometry"]["type"] == "Polygon");
  CHECK(f0["properties"]["mean_factor"] == 1.25);
}
