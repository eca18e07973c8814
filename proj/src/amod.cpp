#include "amodscale/amod.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "amodscale/errors.hpp"
#include "amodscale/evaluate.hpp"
#include "amodscale/geo.hpp"
#include "amodscale/io.hpp"
#include "amodscale/matching.hpp"
#include "csv.hpp"

namespace amodscale {

namespace {

class WeightCache {
 public:
  explicit WeightCache(const RoadNetwork& net) : net_(&net) {}

  const std::vector<double>& get(const TravelTimeLayer* layer) {
    auto it = cache_.find(layer);
    if (it == cache_.end()) {
      const auto w = layer ? EdgeWeight::scaled_time(*layer) : EdgeWeight::freeflow_time();
      it = cache_.emplace(layer, w.materialize(*net_)).first;
    }
    return it->second;
  }

 private:
  const RoadNetwork* net_;
  std::unordered_map<const TravelTimeLayer*, std::vector<double>> cache_;
};

double km(double m) { return m / 1000.0; }

std::vector<PairCandidate> collect_pairs(const RoadNetwork& net, std::span<const Vehicle> fleet,
                                         std::span<const Request> batch, double decision_time,
                                         const SimConfig& cfg, const TravelTimeSource& source,
                                         WeightCache& cache) {
  std::vector<PairCandidate> out;
  if (batch.empty()) return out;
  double latest = -std::numeric_limits<double>::infinity();
  for (const auto& r : batch) latest = std::max(latest, r.t_r + cfg.dt_max_s);

  for (std::size_t v = 0; v < fleet.size(); ++v) {
    const double depart = std::max(fleet[v].free_time, decision_time);
    if (depart > latest) continue;
    const auto& weights = cache.get(source.layer_at(depart));
    // Slack on the bound only; feasibility is re-checked exactly below.
    const double limit = (latest - depart) * (1.0 + 1e-12) + 1e-9;
    const ShortestPathTree tree(net, fleet[v].free_node, weights, limit);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const auto& req = batch[r];
      if (!tree.reachable(req.origin_idx)) continue;
      const double arrival = depart + tree.distance(req.origin_idx);
      if (arrival > req.t_r + cfg.dt_max_s) continue;
      const double deadhead = path_distance(net, tree.path_to(req.origin_idx));
      out.push_back({r, v, depart, arrival, deadhead, pair_weight(cfg, deadhead, req.d_od_m)});
    }
  }
  return out;
}

BatchAssignment assign_from_pairs(std::vector<PairCandidate> pairs, std::size_t batch_size,
                                  const SimConfig& cfg) {
  BatchAssignment result;
  result.feasible_pair_count = pairs.size();
  if (pairs.empty()) return result;

  std::vector<std::size_t> columns;
  for (const auto& p : pairs) columns.push_back(p.vehicle_pos);
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());

  WeightMatrix weights(batch_size, std::vector<std::optional<double>>(columns.size()));
  std::vector<std::vector<std::size_t>> pair_at(batch_size, std::vector<std::size_t>(columns.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto c = static_cast<std::size_t>(
        std::lower_bound(columns.begin(), columns.end(), pairs[i].vehicle_pos) - columns.begin());
    weights[pairs[i].request_pos][c] = pairs[i].weight;
    pair_at[pairs[i].request_pos][c] = i;
  }
  const auto matching = max_weight_matching(
      weights, cfg.force_serve ? MatchingMode::kCardinality : MatchingMode::kProfit);
  for (std::size_t r = 0; r < batch_size; ++r) {
    if (!matching.row_to_col[r]) continue;
    result.matched.push_back(pairs[pair_at[r][*matching.row_to_col[r]]]);
  }
  result.total_weight = matching.total_weight;
  return result;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
  // Rejection sampling; std distributions differ between standard libraries.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % range;
}

std::string kv(std::initializer_list<std::pair<const char*, std::string>> items) {
  std::string out;
  for (const auto& [k, v] : items) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

bool parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

void SimConfig::validate() const {
  if (fleet_size < 1) throw DomainError("fleet_size must be at least 1");
  for (const double period : {dt_batch_s, dt_max_s, dt_reposition_s, n_days, cell_size_m}) {
    if (!(period > 0.0) || !std::isfinite(period)) {
      throw DomainError("simulation periods, n_days and cell_size_m must be positive");
    }
  }
  for (const double price : {zeta, fare_per_km, cost_per_km, fixed_cost_per_vehicle_day}) {
    if (!std::isfinite(price)) throw DomainError("prices must be finite");
  }
}

SimConfig parse_sim_config_text(std::string_view text, SimConfig cfg) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = csv::trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    const auto where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ParseError(where + ": expected key = value");
    const auto key = csv::trim(line.substr(0, eq));
    const auto value = csv::trim(line.substr(eq + 1));

    const auto real = [&](double& field) {
      const auto v = csv::to_double(value);
      if (!v) throw ParseError(where + ": bad number for " + std::string(key));
      field = *v;
    };
    const auto integer = [&](auto& field) {
      const auto v = csv::to_int(value);
      if (!v || *v < 0) throw ParseError(where + ": bad integer for " + std::string(key));
      field = static_cast<std::remove_reference_t<decltype(field)>>(*v);
    };

    if (key == "fleet_size") integer(cfg.fleet_size);
    else if (key == "dt_batch_s") real(cfg.dt_batch_s);
    else if (key == "dt_max_s") real(cfg.dt_max_s);
    else if (key == "dt_reposition_s") real(cfg.dt_reposition_s);
    else if (key == "zeta") real(cfg.zeta);
    else if (key == "fare_per_km") real(cfg.fare_per_km);
    else if (key == "cost_per_km") real(cfg.cost_per_km);
    else if (key == "fixed_cost_per_vehicle_day") real(cfg.fixed_cost_per_vehicle_day);
    else if (key == "n_days") real(cfg.n_days);
    else if (key == "cell_size_m") real(cfg.cell_size_m);
    else if (key == "seed") integer(cfg.seed);
    else if (key == "force_serve") {
      if (!parse_bool(value, cfg.force_serve)) throw ParseError(where + ": bad boolean for force_serve");
    } else {
      throw ParseError(where + ": unknown key '" + std::string(key) + "'");
    }
  }
  return cfg;
}

SimConfig parse_sim_config(const std::filesystem::path& path, SimConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sim_config_text(buf.str(), base);
}

nlohmann::json sim_config_json(const SimConfig& cfg) {
  return {{"fleet_size", cfg.fleet_size},
          {"dt_batch_s", cfg.dt_batch_s},
          {"dt_max_s", cfg.dt_max_s},
          {"dt_reposition_s", cfg.dt_reposition_s},
          {"zeta", cfg.zeta},
          {"fare_per_km", cfg.fare_per_km},
          {"cost_per_km", cfg.cost_per_km},
          {"fixed_cost_per_vehicle_day", cfg.fixed_cost_per_vehicle_day},
          {"n_days", cfg.n_days},
          {"cell_size_m", cfg.cell_size_m},
          {"seed", cfg.seed},
          {"force_serve", cfg.force_serve}};
}

std::string_view request_status_name(RequestStatus s) {
  switch (s) {
    case RequestStatus::kPending: return "pending";
    case RequestStatus::kAssigned: return "assigned";
    case RequestStatus::kServed: return "served";
    case RequestStatus::kRejected: return "rejected";
  }
  return "?";
}

std::string_view leg_kind_name(LegKind k) {
  switch (k) {
    case LegKind::kReposition: return "reposition";
    case LegKind::kPickup: return "pickup";
    case LegKind::kDropoff: return "dropoff";
  }
  return "?";
}

std::vector<Request> generate_requests(const RoadNetwork& net, std::span<const SnappedTrip> trips) {
  std::vector<std::size_t> order(trips.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return trips[a].trip.pickup_time < trips[b].trip.pickup_time;
  });
  std::vector<Request> out;
  out.reserve(trips.size());
  for (const std::size_t i : order) {
    const auto& t = trips[i];
    Request r;
    r.id = out.size();
    r.t_r = static_cast<double>(t.trip.pickup_time);
    r.origin_idx = net.node_index(t.origin_node);
    r.dest_idx = net.node_index(t.dest_node);
    r.d_od_m = t.sd_distance_m;
    out.push_back(r);
  }
  return out;
}

const TravelTimeLayer* TravelTimeSource::layer_at(double t) const {
  return profile_ ? &profile_->layer_at(t) : nullptr;
}

double pair_weight(const SimConfig& cfg, double deadhead_m, double d_od_m) {
  return cfg.zeta + cfg.fare_per_km * km(d_od_m) - cfg.cost_per_km * (km(deadhead_m) + km(d_od_m));
}

std::vector<PairCandidate> feasible_pairs(const RoadNetwork& net, std::span<const Vehicle> fleet,
                                          std::span<const Request> batch, double decision_time,
                                          const SimConfig& cfg, const TravelTimeSource& source) {
  WeightCache cache(net);
  return collect_pairs(net, fleet, batch, decision_time, cfg, source, cache);
}

BatchAssignment batch_assign(const RoadNetwork& net, std::span<const Vehicle> fleet,
                             std::span<const Request> batch, double decision_time,
                             const SimConfig& cfg, const TravelTimeSource& source) {
  return assign_from_pairs(feasible_pairs(net, fleet, batch, decision_time, cfg, source), batch.size(),
                           cfg);
}

std::vector<std::size_t> initial_positions(const RoadNetwork& net, const GridPartition& grid,
                                           const EdgeZoneIndex& zones, std::size_t fleet_size,
                                           std::uint64_t seed) {
  const auto anchors = cell_anchor_nodes(net, grid, zones);
  if (anchors.empty()) throw DomainError("network has no nodes to place vehicles on");
  std::vector<std::size_t> nodes;
  for (const auto& [cell, node] : anchors) nodes.push_back(node);
  std::mt19937_64 rng(seed);
  for (std::size_t i = nodes.size(); i > 1; --i) {
    std::swap(nodes[i - 1], nodes[bounded(rng, i)]);
  }
  std::vector<std::size_t> out(fleet_size);
  for (std::size_t v = 0; v < fleet_size; ++v) out[v] = nodes[v % nodes.size()];
  return out;
}

std::vector<RepositionMove> plan_reposition(const RoadNetwork& net, std::span<const Vehicle> fleet,
                                            const EdgeZoneIndex& zones,
                                            const std::map<CellId, std::size_t>& anchors,
                                            double now) {
  std::vector<RepositionMove> moves;
  if (anchors.empty()) return moves;
  std::map<CellId, std::vector<std::size_t>> idle;  // cell -> fleet positions
  std::size_t n_idle = 0;
  for (const auto& [cell, node] : anchors) idle[cell];
  for (std::size_t v = 0; v < fleet.size(); ++v) {
    if (fleet[v].free_time > now) continue;
    idle[zones.node_cells[fleet[v].free_node]].push_back(v);
    ++n_idle;
  }
  const std::size_t share = n_idle / anchors.size();
  if (share == 0) return moves;

  std::map<CellId, std::size_t> deficit;
  std::vector<std::pair<std::size_t, CellId>> movable;
  for (auto& [cell, members] : idle) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return fleet[a].id < fleet[b].id; });
    if (members.size() < share) deficit[cell] = share - members.size();
    for (std::size_t i = share; i < members.size(); ++i) movable.emplace_back(members[i], cell);
  }
  std::sort(movable.begin(), movable.end(), [&](const auto& a, const auto& b) {
    return fleet[a.first].id < fleet[b.first].id;
  });

  for (const auto& [v, from_cell] : movable) {
    if (deficit.empty()) break;
    const auto& here = net.nodes()[fleet[v].free_node];
    CellId best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [cell, need] : deficit) {
      const auto& anchor = net.nodes()[anchors.at(cell)];
      const double d = equirectangular_m(here.lon, here.lat, anchor.lon, anchor.lat);
      if (d < best_d) {
        best_d = d;
        best = cell;
      }
    }
    moves.push_back({v, from_cell, best, anchors.at(best)});
    if (--deficit[best] == 0) deficit.erase(best);
  }
  return moves;
}

SimResult run_simulation(const SimConfig& cfg, std::vector<Request> requests, const RoadNetwork& net,
                         const GridPartition& grid, const TravelTimeSource& source) {
  cfg.validate();
  std::stable_sort(requests.begin(), requests.end(),
                   [](const Request& a, const Request& b) { return a.t_r < b.t_r; });
  for (const auto& r : requests) {
    if (!(r.d_od_m > 0.0)) throw DomainError("request " + std::to_string(r.id) + " has no trip distance");
  }
  if (const auto* profile = source.profile()) {
    if (profile->empty()) throw DomainError("travel-time profile is empty");
    if (!requests.empty() && !profile->covers(requests.front().t_r, requests.back().t_r)) {
      throw DomainError("travel-time profile [" + std::to_string(profile->start()) + ", " +
                        std::to_string(profile->end()) + ") does not cover the request times");
    }
  }

  const auto zones = classify_edges(net, grid);
  const auto anchors = cell_anchor_nodes(net, grid, zones);
  const double start = requests.empty() ? 0.0 : requests.front().t_r;

  SimResult result;
  auto& events = result.events;
  auto& fleet = result.fleet;
  const auto positions = initial_positions(net, grid, zones, cfg.fleet_size, cfg.seed);
  fleet.resize(cfg.fleet_size);
  for (std::size_t v = 0; v < fleet.size(); ++v) {
    fleet[v].id = v;
    fleet[v].free_node = positions[v];
    fleet[v].free_time = start;
  }

  events.push_back({start, "sim", "start",
                    kv({{"fleet_size", num(cfg.fleet_size)},
                        {"n_days", num(cfg.n_days)},
                        {"zeta", num(cfg.zeta)},
                        {"fare_per_km", num(cfg.fare_per_km)},
                        {"cost_per_km", num(cfg.cost_per_km)},
                        {"fixed_cost_per_vehicle_day", num(cfg.fixed_cost_per_vehicle_day)},
                        {"dt_max_s", num(cfg.dt_max_s)}})});
  for (std::size_t v = 0; v < fleet.size(); ++v) {
    events.push_back({start, "vehicle:" + std::to_string(v), "place",
                      kv({{"node", std::to_string(net.nodes()[fleet[v].free_node].id)}})});
  }
  for (const auto& r : requests) {
    events.push_back({r.t_r, "request:" + std::to_string(r.id), "request",
                      kv({{"origin", std::to_string(net.nodes()[r.origin_idx].id)},
                          {"dest", std::to_string(net.nodes()[r.dest_idx].id)},
                          {"d_od_m", num(r.d_od_m)}})});
  }

  WeightCache cache(net);
  const auto add_leg = [&](Vehicle& v, LegKind kind, std::optional<std::size_t> request,
                           std::size_t to, double depart) -> std::optional<Leg> {
    const auto& w = cache.get(source.layer_at(depart));
    const ShortestPathTree tree(net, v.free_node, w);
    if (!tree.reachable(to)) return std::nullopt;
    Leg leg{kind, request, v.free_node, to, depart, depart + tree.distance(to),
            path_distance(net, tree.path_to(to))};
    v.legs.push_back(leg);
    v.odometer_m += leg.distance_m;
    v.free_node = to;
    v.free_time = leg.end;
    std::string detail = kv({{"kind", std::string(leg_kind_name(kind))},
                             {"from", std::to_string(net.nodes()[leg.from_idx].id)},
                             {"to", std::to_string(net.nodes()[leg.to_idx].id)},
                             {"arrive", num(leg.end)},
                             {"distance_m", num(leg.distance_m)}});
    if (request) detail += ";request=" + std::to_string(*request);
    events.push_back({depart, "vehicle:" + std::to_string(v.id), "depart", std::move(detail)});
    return leg;
  };

  std::vector<std::size_t> request_pos(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) request_pos[i] = i;

  std::size_t next = 0;
  std::uint64_t window = 0;
  double last_decision = start;
  while (next < requests.size()) {
    const double tau = start + static_cast<double>(window + 1) * cfg.dt_batch_s;
    last_decision = tau;
    std::size_t end = next;
    while (end < requests.size() && requests[end].t_r < tau) ++end;

    if (end > next) {
      ++result.kpis.batches;
      const std::span<const Request> batch(requests.data() + next, end - next);
      auto pairs = collect_pairs(net, fleet, batch, tau, cfg, source, cache);
      const auto assignment = assign_from_pairs(std::move(pairs), batch.size(), cfg);
      result.kpis.feasible_pairs += assignment.feasible_pair_count;

      std::vector<bool> matched(batch.size(), false);
      for (const auto& m : assignment.matched) {
        matched[m.request_pos] = true;
        auto& req = requests[next + m.request_pos];
        auto& veh = fleet[m.vehicle_pos];
        req.status = RequestStatus::kAssigned;
        req.vehicle = veh.id;
        events.push_back({tau, "request:" + std::to_string(req.id), "assign",
                          kv({{"vehicle", std::to_string(veh.id)},
                              {"weight", num(m.weight)},
                              {"deadhead_m", num(m.deadhead_m)}})});
        if (veh.free_node != req.origin_idx) {
          add_leg(veh, LegKind::kPickup, req.id, req.origin_idx, m.depart);
        } else {
          veh.free_time = m.depart;
        }
        req.pickup_time = veh.free_time;
        events.push_back({veh.free_time, "request:" + std::to_string(req.id), "pickup",
                          kv({{"vehicle", std::to_string(veh.id)},
                              {"wait_s", num(veh.free_time - req.t_r)}})});
        const auto trip = add_leg(veh, LegKind::kDropoff, req.id, req.dest_idx, veh.free_time);
        if (!trip) throw ContractError("destination unreachable for an assigned request");
        req.dropoff_time = trip->end;
        events.push_back({trip->end, "request:" + std::to_string(req.id), "dropoff",
                          kv({{"vehicle", std::to_string(veh.id)}, {"d_od_m", num(req.d_od_m)}})});
      }
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (matched[i]) continue;
        auto& req = requests[next + i];
        req.status = RequestStatus::kRejected;
        events.push_back({tau, "request:" + std::to_string(req.id), "reject", ""});
      }
      next = end;
    }

    const double elapsed = tau - start;
    if (std::floor(elapsed / cfg.dt_reposition_s) >
        std::floor((elapsed - cfg.dt_batch_s) / cfg.dt_reposition_s)) {
      for (const auto& move : plan_reposition(net, fleet, zones, anchors, tau)) {
        auto& veh = fleet[move.vehicle_pos];
        if (add_leg(veh, LegKind::kReposition, std::nullopt, move.target_idx, tau)) {
          ++result.kpis.reposition_moves;
        }
      }
    }
    ++window;
  }

  // Committed legs run to completion.
  double finish = last_decision;
  for (auto& r : requests) {
    if (r.status == RequestStatus::kAssigned) r.status = RequestStatus::kServed;
  }
  for (const auto& v : fleet) finish = std::max(finish, v.free_time);

  auto& k = result.kpis;
  k.requests = requests.size();
  std::vector<double> waits;
  for (const auto& r : requests) {
    if (r.status == RequestStatus::kServed) {
      ++k.served;
      waits.push_back(*r.pickup_time - r.t_r);
      k.revenue += cfg.zeta + cfg.fare_per_km * km(r.d_od_m);
    } else {
      ++k.rejected;
    }
  }
  for (const auto& v : fleet) {
    k.cost += cfg.fixed_cost_per_vehicle_day * cfg.n_days + cfg.cost_per_km * km(v.odometer_m);
    k.fleet_distance_km += km(v.odometer_m);
    for (const auto& leg : v.legs) {
      switch (leg.kind) {
        case LegKind::kPickup: k.deadhead_km += km(leg.distance_m); break;
        case LegKind::kReposition: k.reposition_km += km(leg.distance_m); break;
        case LegKind::kDropoff: k.occupied_km += km(leg.distance_m); break;
      }
    }
  }
  k.profit = k.revenue - k.cost;
  k.service_rate = k.requests ? static_cast<double>(k.served) / static_cast<double>(k.requests) : 0.0;
  if (!waits.empty()) {
    std::sort(waits.begin(), waits.end());
    double sum = 0.0;
    for (const double w : waits) sum += w;
    k.mean_wait_s = sum / static_cast<double>(waits.size());
    k.p50_wait_s = percentile_sorted(waits, 50);
    k.p95_wait_s = percentile_sorted(waits, 95);
    k.max_wait_s = waits.back();
  }
  for (const auto& v : fleet) {
    events.push_back({finish, "vehicle:" + std::to_string(v.id), "end",
                      kv({{"odometer_m", num(v.odometer_m)}})});
  }
  events.push_back({finish, "sim", "end",
                    kv({{"served", num(k.served)}, {"rejected", num(k.rejected)},
                        {"profit", num(k.profit)}})});

  std::stable_sort(events.begin(), events.end(),
                   [](const SimEvent& a, const SimEvent& b) { return a.time < b.time; });
  result.requests = std::move(requests);
  return result;
}

double profit_from_result(const SimConfig& cfg, const SimResult& result) {
  double revenue = 0.0, cost = 0.0;
  for (const auto& r : result.requests) {
    if (r.status == RequestStatus::kServed) revenue += cfg.zeta + cfg.fare_per_km * km(r.d_od_m);
  }
  for (const auto& v : result.fleet) {
    double driven = 0.0;
    for (const auto& leg : v.legs) driven += leg.distance_m;
    cost += cfg.fixed_cost_per_vehicle_day * cfg.n_days + cfg.cost_per_km * km(driven);
  }
  return revenue - cost;
}

std::string event_log_csv(std::span<const SimEvent> events) {
  std::string out = "time,entity,event,detail\n";
  for (const auto& e : events) {
    out += format_double(e.time);
    out += ',';
    out += e.entity;
    out += ',';
    out += e.event;
    out += ',';
    out += e.detail;
    out += '\n';
  }
  return out;
}

nlohmann::json kpi_json(const SimKpis& k) {
  return {{"requests", k.requests},
          {"served", k.served},
          {"rejected", k.rejected},
          {"service_rate", k.service_rate},
          {"revenue", k.revenue},
          {"cost", k.cost},
          {"profit", k.profit},
          {"mean_wait_s", k.mean_wait_s},
          {"p50_wait_s", k.p50_wait_s},
          {"p95_wait_s", k.p95_wait_s},
          {"max_wait_s", k.max_wait_s},
          {"fleet_distance_km", k.fleet_distance_km},
          {"deadhead_km", k.deadhead_km},
          {"reposition_km", k.reposition_km},
          {"occupied_km", k.occupied_km},
          {"batches", k.batches},
          {"feasible_pairs", k.feasible_pairs},
          {"reposition_moves", k.reposition_moves}};
}

}  // namespace amodscale
