#include "evac/schedule.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <set>

#include "evac/min_cost_flow.hpp"

namespace evac {

int64_t Schedule::total() const {
  int64_t sum = 0;
  for (const auto& [key, count] : departures) sum += count;
  return sum;
}

void require_valid_routes(const EvacuationNetwork& net, const RouteSet& routes) {
  for (const auto& [v, e] : routes.successor) {
    if (v < 0 || static_cast<size_t>(v) >= net.num_nodes()) {
      throw Error("route successor on unknown node index " + std::to_string(v));
    }
    if (e < 0 || static_cast<size_t>(e) >= net.num_edges() || net.edge(e).tail != v) {
      throw Error("route successor of node '" + net.node(v).id + "' is not an outgoing edge");
    }
    if (net.node(v).kind == NodeKind::Safe) {
      throw Error("safe node '" + net.node(v).id + "' cannot have a successor");
    }
  }
  for (NodeIndex k : net.sources()) {
    if (!routes.successor.count(k)) {
      throw Error("source '" + net.node(k).id + "' has no route");
    }
    // Follow the successor chain; it must reach a safe node without
    // revisiting anything (confluence + acyclicity).
    std::set<NodeIndex> seen;
    NodeIndex cur = k;
    while (net.node(cur).kind != NodeKind::Safe) {
      if (!seen.insert(cur).second) {
        throw Error("route from source '" + net.node(k).id + "' revisits node '" +
                    net.node(cur).id + "'");
      }
      auto it = routes.successor.find(cur);
      if (it == routes.successor.end()) {
        throw Error("route from source '" + net.node(k).id + "' dead-ends at node '" +
                    net.node(cur).id + "'");
      }
      cur = net.edge(it->second).head;
    }
  }
}

Route route_from(const EvacuationNetwork& net, const RouteSet& routes, NodeIndex source) {
  Route route;
  route.nodes.push_back(source);
  NodeIndex cur = source;
  while (net.node(cur).kind != NodeKind::Safe) {
    auto it = routes.successor.find(cur);
    if (it == routes.successor.end()) {
      throw Error("route from '" + net.node(source).id + "' dead-ends at '" + net.node(cur).id +
                  "'");
    }
    const Edge& e = net.edge(it->second);
    route.edges.push_back(it->second);
    route.travel_time += e.travel_time;
    cur = e.head;
    route.nodes.push_back(cur);
  }
  return route;
}

namespace {

struct ModelOptions {
  const std::vector<char>* usable = nullptr;          // static edge mask
  std::optional<Timestep> arrival_cutoff;             // drop sink arcs with t_s > cutoff
  bool with_costs = true;
};

struct FlowModel {
  MinCostFlow mcf;
  int master = -1;
  int sink = -1;
  int64_t total_demand = 0;
  std::vector<int> teg_arc;  // per TEG edge, -1 when excluded
  struct Injection {
    NodeIndex source = -1;
    Timestep t = 0;
    int arc = -1;
  };
  std::vector<Injection> injections;
};

// Arrival costs are scaled by K and injection arcs carry a small
// (rank+1)*t term, so among cost-equal schedules lower-indexed sources
// depart later. This pins a canonical optimal schedule: when two
// sources tie, the higher-indexed one leaves first.
int64_t tiebreak_scale(const TimeExpandedGraph& teg) {
  const auto& net = teg.network();
  const int64_t nsrc = static_cast<int64_t>(net.sources().size());
  return net.total_demand() * (static_cast<int64_t>(teg.horizon()) + 1) * nsrc + 1;
}

FlowModel build_model(const TimeExpandedGraph& teg, const ModelOptions& opt) {
  const EvacuationNetwork& net = teg.network();
  FlowModel m;
  m.total_demand = net.total_demand();
  m.sink = teg.super_sink();
  const int64_t cap_inf = std::max<int64_t>(m.total_demand, 1);
  const int64_t scale = opt.with_costs ? tiebreak_scale(teg) : 1;

  for (size_t i = 0; i < teg.nodes().size(); ++i) m.mcf.add_node();

  m.teg_arc.assign(teg.edges().size(), -1);
  for (size_t e = 0; e < teg.edges().size(); ++e) {
    const TegEdge& te = teg.edges()[e];
    if (te.base_edge >= 0 && opt.usable &&
        !(*opt.usable)[static_cast<size_t>(te.base_edge)]) {
      continue;
    }
    if (te.to == m.sink && opt.arrival_cutoff && te.t_s > *opt.arrival_cutoff) continue;
    const int64_t cap = te.capacity == kUnboundedCapacity ? cap_inf : te.capacity;
    const int64_t cost =
        (opt.with_costs && te.to == m.sink) ? static_cast<int64_t>(te.t_s) * scale : 0;
    m.teg_arc[e] = m.mcf.add_arc(te.from, te.to, cap, cost);
  }

  m.master = m.mcf.add_node();
  const auto& sources = net.sources();
  for (size_t rank = 0; rank < sources.size(); ++rank) {
    const NodeIndex k = sources[rank];
    const int inj = m.mcf.add_node();
    m.mcf.add_arc(m.master, inj, net.node(k).demand, 0);
    for (Timestep t = 0; t <= teg.horizon(); ++t) {
      const TegNodeIndex c = teg.copy(k, t);
      if (c < 0) continue;
      const int64_t cost =
          opt.with_costs ? static_cast<int64_t>(t) * static_cast<int64_t>(rank + 1) : 0;
      const int arc = m.mcf.add_arc(inj, c, net.node(k).demand, cost);
      m.injections.push_back(FlowModel::Injection{k, t, arc});
    }
  }
  return m;
}

int64_t sink_arc_cost(const TimeExpandedGraph& teg, const FlowModel& m) {
  int64_t cost = 0;
  for (size_t e = 0; e < teg.edges().size(); ++e) {
    if (m.teg_arc[e] < 0) continue;
    const TegEdge& te = teg.edges()[e];
    if (te.to != m.sink) continue;
    cost += m.mcf.arc_flow(m.teg_arc[e]) * static_cast<int64_t>(te.t_s);
  }
  return cost;
}

Schedule extract_schedule(const FlowModel& m) {
  Schedule s;
  for (const auto& inj : m.injections) {
    const int64_t f = m.mcf.arc_flow(inj.arc);
    if (f > 0) s.departures[{inj.source, inj.t}] += f;
  }
  return s;
}

int64_t outlier_kept_count(const TimeExpandedGraph& teg) {
  int64_t bypass_cap = 0;
  if (teg.bypass() >= 0) {
    for (TegEdgeIndex e : teg.out_edges(teg.bypass())) {
      if (teg.edge(e).to == teg.super_sink()) bypass_cap = teg.edge(e).capacity;
    }
  }
  return teg.network().total_demand() - bypass_cap;
}

bool completion_feasible(const TimeExpandedGraph& teg, const std::vector<char>& usable,
                         Timestep t) {
  ModelOptions opt;
  opt.usable = &usable;
  opt.arrival_cutoff = t;
  opt.with_costs = false;
  FlowModel m = build_model(teg, opt);
  return m.mcf.run(m.master, m.sink, m.total_demand).flow == m.total_demand;
}

std::vector<char> route_edge_mask(const EvacuationNetwork& net, const RouteSet& routes) {
  std::vector<char> usable(net.num_edges(), 0);
  for (const auto& [v, e] : routes.successor) usable[static_cast<size_t>(e)] = 1;
  return usable;
}

}  // namespace

std::optional<Timestep> min_feasible_completion(const TimeExpandedGraph& teg,
                                                const std::vector<char>& usable_static_edges) {
  if (!completion_feasible(teg, usable_static_edges, teg.horizon())) return std::nullopt;
  Timestep lo = 0;
  Timestep hi = teg.horizon();
  while (lo < hi) {
    const Timestep mid = lo + (hi - lo) / 2;
    if (completion_feasible(teg, usable_static_edges, mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

DynamicFlowResult min_cost_dynamic_flow(const TimeExpandedGraph& teg,
                                        const std::vector<char>& usable_static_edges) {
  ModelOptions opt;
  opt.usable = &usable_static_edges;
  FlowModel m = build_model(teg, opt);
  const auto run = m.mcf.run(m.master, m.sink, m.total_demand);
  if (run.flow < m.total_demand) {
    throw InfeasibleError("cannot route demand within the horizon: max flow " +
                          std::to_string(run.flow) + " of " + std::to_string(m.total_demand));
  }
  DynamicFlowResult out;
  out.flow = run.flow;
  out.cost = sink_arc_cost(teg, m);
  out.edge_flow.assign(teg.edges().size(), 0);
  for (size_t e = 0; e < teg.edges().size(); ++e) {
    if (m.teg_arc[e] >= 0) out.edge_flow[e] = m.mcf.arc_flow(m.teg_arc[e]);
  }
  return out;
}

ScheduleResult schedule_fixed_routes(const TimeExpandedGraph& teg, const RouteSet& routes) {
  const EvacuationNetwork& net = teg.network();
  require_valid_routes(net, routes);
  const std::vector<char> usable = route_edge_mask(net, routes);

  ScheduleResult result;
  switch (teg.variant()) {
    case TegVariant::Average:
    case TegVariant::OutlierAverage: {
      ModelOptions opt;
      opt.usable = &usable;
      FlowModel m = build_model(teg, opt);
      const auto run = m.mcf.run(m.master, m.sink, m.total_demand);
      if (run.flow < m.total_demand) {
        throw InfeasibleError("routes cannot carry the demand within the horizon");
      }
      result.schedule = extract_schedule(m);
      const bool outlier = teg.variant() == TegVariant::OutlierAverage;
      result.objective =
          ObjectiveValue{outlier ? ObjectiveKind::OutlierAverage : ObjectiveKind::Average,
                         sink_arc_cost(teg, m),
                         outlier ? outlier_kept_count(teg) : net.total_demand()};
      break;
    }
    case TegVariant::CompletionTime: {
      const auto t_star = min_feasible_completion(teg, usable);
      if (!t_star) throw InfeasibleError("routes cannot carry the demand within the horizon");
      ModelOptions opt;
      opt.usable = &usable;
      opt.arrival_cutoff = *t_star;
      FlowModel m = build_model(teg, opt);
      const auto run = m.mcf.run(m.master, m.sink, m.total_demand);
      assert(run.flow == m.total_demand);
      (void)run;
      result.schedule = extract_schedule(m);
      result.objective = ObjectiveValue{ObjectiveKind::CompletionTime, *t_star, 1};
      break;
    }
  }
  return result;
}

PlanMetrics evaluate_plan(const EvacuationNetwork& net, const EvacuationPlan& plan,
                          double p_out) {
  if (!(p_out > 0.0 && p_out <= 1.0)) throw Error("outlier fraction must be in (0, 1]");
  require_valid_routes(net, plan.routes);

  std::map<NodeIndex, Route> routes;
  std::map<NodeIndex, int64_t> shipped;
  for (const auto& [key, count] : plan.schedule.departures) {
    const auto& [k, t] = key;
    if (count < 0) throw Error("negative departure count");
    if (k < 0 || static_cast<size_t>(k) >= net.num_nodes() ||
        net.node(k).kind != NodeKind::Source) {
      throw Error("departure scheduled on a non-source node");
    }
    if (t < 0) throw Error("departure before evacuation start");
    shipped[k] += count;
    if (!routes.count(k)) routes.emplace(k, route_from(net, plan.routes, k));
  }
  for (NodeIndex k : net.sources()) {
    const int64_t want = net.node(k).demand;
    const int64_t got = shipped.count(k) ? shipped[k] : 0;
    if (want != got) {
      throw Error("schedule ships " + std::to_string(got) + " of " + std::to_string(want) +
                  " evacuees from source '" + net.node(k).id + "'");
    }
  }

  // Loads per (static edge, entry timestep); report the first bad copy in
  // (edge, t) order.
  std::map<std::pair<EdgeIndex, Timestep>, int64_t> load;
  std::map<std::pair<EdgeIndex, Timestep>, std::string> bad_copy;
  for (const auto& [key, count] : plan.schedule.departures) {
    const auto& [k, t] = key;
    if (count == 0) continue;
    const Route& route = routes.at(k);
    Timestep enter = t;
    for (EdgeIndex e : route.edges) {
      const Edge& edge = net.edge(e);
      const std::string name =
          "edge (" + net.node(edge.tail).id + ", " + net.node(edge.head).id + ")";
      if (enter + edge.travel_time > net.horizon()) {
        bad_copy.try_emplace({e, enter}, name + " has no copy at t=" + std::to_string(enter) +
                                             " (arrival past horizon)");
      } else if (edge.deadline && enter > *edge.deadline) {
        bad_copy.try_emplace({e, enter}, name + " has no copy at t=" + std::to_string(enter) +
                                             " (past deadline)");
      }
      load[{e, enter}] += count;
      enter += edge.travel_time;
    }
  }
  for (const auto& [key, used] : load) {
    const auto& [e, t] = key;
    const Edge& edge = net.edge(e);
    if (used > edge.capacity) {
      const std::string name =
          "edge (" + net.node(edge.tail).id + ", " + net.node(edge.head).id + ")";
      bad_copy.try_emplace({e, t}, name + " copy at t=" + std::to_string(t) + " carries " +
                                       std::to_string(used) + " > capacity " +
                                       std::to_string(edge.capacity));
    }
  }
  if (!bad_copy.empty()) throw CapacityViolationError(bad_copy.begin()->second);

  PlanMetrics metrics;
  metrics.demand = net.total_demand();
  // Cohorts as (arrival, source rank, departure) with deterministic
  // outlier exclusion order: latest arrival first, ties by source rank
  // then departure time, both descending.
  struct Cohort {
    Timestep arrival;
    size_t rank;
    Timestep departure;
    int64_t count;
  };
  std::vector<Cohort> cohorts;
  std::map<NodeIndex, size_t> rank_of;
  for (size_t r = 0; r < net.sources().size(); ++r) rank_of[net.sources()[r]] = r;
  for (const auto& [key, count] : plan.schedule.departures) {
    const auto& [k, t] = key;
    if (count == 0) continue;
    const Timestep arrival = t + static_cast<Timestep>(routes.at(k).travel_time);
    metrics.total_time += count * static_cast<int64_t>(arrival);
    metrics.completion = std::max(metrics.completion, arrival);
    cohorts.push_back(Cohort{arrival, rank_of[k], t, count});
  }
  std::sort(cohorts.begin(), cohorts.end(), [](const Cohort& a, const Cohort& b) {
    if (a.arrival != b.arrival) return a.arrival > b.arrival;
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.departure > b.departure;
  });
  int64_t to_exclude = static_cast<int64_t>(
      std::floor((1.0 - p_out) * static_cast<double>(metrics.demand) + 1e-9));
  metrics.kept_count = metrics.demand - to_exclude;
  metrics.kept_total = metrics.total_time;
  for (const Cohort& c : cohorts) {
    if (to_exclude <= 0) break;
    const int64_t cut = std::min(to_exclude, c.count);
    metrics.kept_total -= cut * static_cast<int64_t>(c.arrival);
    to_exclude -= cut;
  }
  return metrics;
}

ObjectiveValue plan_objective(const EvacuationNetwork& net, const EvacuationPlan& plan,
                              TegVariant variant, double p_out) {
  const PlanMetrics m = evaluate_plan(net, plan, p_out);
  switch (variant) {
    case TegVariant::Average:
      return ObjectiveValue{ObjectiveKind::Average, m.total_time, m.demand};
    case TegVariant::CompletionTime:
      return ObjectiveValue{ObjectiveKind::CompletionTime, m.completion, 1};
    case TegVariant::OutlierAverage:
      return ObjectiveValue{ObjectiveKind::OutlierAverage, m.kept_total, m.kept_count};
  }
  return {};
}

}  // namespace evac
