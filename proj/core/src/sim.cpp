#include "evac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "evac/rng.hpp"

namespace evac {

const char* to_string(SimEventType type) {
  switch (type) {
    case SimEventType::Depart: return "depart";
    case SimEventType::EnterEdge: return "enter_edge";
    case SimEventType::Arrive: return "arrive";
    case SimEventType::Stall: return "stall";
    case SimEventType::Strand: return "strand";
  }
  return "?";
}

std::vector<AgentDeparture> perturb_departures(const EvacuationNetwork& net,
                                               const Schedule& schedule,
                                               const PerturbationModel& model) {
  std::vector<AgentDeparture> agents;
  for (const auto& [key, count] : schedule.departures) {
    const auto& [source, t] = key;
    for (int64_t i = 0; i < count; ++i) {
      AgentDeparture a;
      a.agent = static_cast<int64_t>(agents.size());
      a.source = source;
      a.prescribed = t;
      a.actual = t;
      agents.push_back(a);
    }
  }
  (void)net;
  Rng rng(model.seed);
  switch (model.kind) {
    case PerturbationModel::Kind::None: break;
    case PerturbationModel::Kind::Normal:
      for (auto& a : agents) {
        const double draw = static_cast<double>(a.prescribed) + model.sigma * rng.gaussian();
        a.actual = static_cast<Timestep>(std::max<int64_t>(0, std::llround(draw)));
      }
      break;
    case PerturbationModel::Kind::Uniform:
      for (auto& a : agents) {
        a.actual = static_cast<Timestep>(
            std::max<int64_t>(0, rng.range(model.lo, std::max(model.lo, model.hi))));
      }
      break;
  }
  return agents;
}

namespace {

struct AgentState {
  NodeIndex source = -1;
  const Route* route = nullptr;
  size_t next_edge = 0;  // index into route->edges
  Timestep joined_queue = -1;
  bool done = false;
};

std::string edge_name(const EvacuationNetwork& net, EdgeIndex e) {
  return net.node(net.edge(e).tail).id + "-" + net.node(net.edge(e).head).id;
}

}  // namespace

SimResult simulate(const EvacuationNetwork& net, const EvacuationPlan& plan,
                   const PerturbationModel& perturbation, std::span<const EdgeFailure> failures,
                   Timestep max_time) {
  require_valid_routes(net, plan.routes);
  std::map<NodeIndex, Route> routes;
  for (NodeIndex k : net.sources()) routes.emplace(k, route_from(net, plan.routes, k));

  std::vector<Timestep> fail_at(net.num_edges(), -1);
  for (const EdgeFailure& f : failures) {
    if (f.edge < 0 || static_cast<size_t>(f.edge) >= net.num_edges()) {
      throw Error("failure names an unknown edge");
    }
    fail_at[static_cast<size_t>(f.edge)] =
        fail_at[static_cast<size_t>(f.edge)] < 0
            ? f.fail_time
            : std::min(fail_at[static_cast<size_t>(f.edge)], f.fail_time);
  }

  const auto departures = perturb_departures(net, plan.schedule, perturbation);
  const size_t n_agents = departures.size();
  std::vector<AgentState> state(n_agents);

  SimResult result;
  result.agents.resize(n_agents);
  for (size_t i = 0; i < n_agents; ++i) {
    result.agents[i].agent = departures[i].agent;
    result.agents[i].source = departures[i].source;
    result.agents[i].prescribed = departures[i].prescribed;
    result.agents[i].actual = departures[i].actual;
    state[i].source = departures[i].source;
    state[i].route = &routes.at(departures[i].source);
  }

  // depart_at[t] / traversal_done[t]: agent ids, processed in id order.
  std::vector<std::vector<int64_t>> depart_at(static_cast<size_t>(max_time) + 1);
  for (size_t i = 0; i < n_agents; ++i) {
    if (departures[i].actual <= max_time) {
      depart_at[static_cast<size_t>(departures[i].actual)].push_back(
          static_cast<int64_t>(i));
    }
  }
  std::vector<std::vector<int64_t>> traversal_done(static_cast<size_t>(max_time) + 1);
  // FIFO entry queues per edge, ordered by (join time, agent id).
  std::vector<std::set<std::pair<Timestep, int64_t>>> queue(net.num_edges());

  auto log = [&](Timestep t, int64_t agent, SimEventType type, std::string location) {
    result.events.push_back(SimEvent{t, agent, type, std::move(location)});
  };

  result.rate_curve.assign(static_cast<size_t>(max_time) + 1, 0);
  int64_t arrived = 0;

  auto at_destination = [&](size_t i) {
    return state[i].next_edge >= state[i].route->edges.size();
  };

  auto settle = [&](size_t i, Timestep t) {
    // Agent i is at a node at time t, ready for its next leg (or done).
    const int64_t id = static_cast<int64_t>(i);
    if (at_destination(i)) {
      state[i].done = true;
      result.agents[i].arrival = t;
      result.total_evacuation_time += t;
      result.completion_time = std::max(result.completion_time, t);
      ++arrived;
      result.rate_curve[static_cast<size_t>(t)] = arrived;
      log(t, id, SimEventType::Arrive, net.node(state[i].route->nodes.back()).id);
      return;
    }
    const EdgeIndex e = state[i].route->edges[state[i].next_edge];
    state[i].joined_queue = t;
    queue[static_cast<size_t>(e)].insert({t, id});
  };

  for (Timestep t = 0; t <= max_time; ++t) {
    for (const int64_t id : traversal_done[static_cast<size_t>(t)]) {
      settle(static_cast<size_t>(id), t);
    }
    for (const int64_t id : depart_at[static_cast<size_t>(t)]) {
      log(t, id, SimEventType::Depart, net.node(state[static_cast<size_t>(id)].source).id);
      settle(static_cast<size_t>(id), t);
    }
    for (size_t e = 0; e < net.num_edges(); ++e) {
      auto& q = queue[e];
      if (q.empty()) continue;
      const Edge& edge = net.edge(static_cast<EdgeIndex>(e));
      const Timestep dead = fail_at[e];
      if (dead >= 0 && t > dead) {
        // Severed: everyone still waiting for this edge is stranded.
        for (const auto& [jt, id] : q) {
          log(t, id, SimEventType::Strand, net.node(edge.tail).id);
          state[static_cast<size_t>(id)].done = true;
        }
        q.clear();
        continue;
      }
      int64_t admitted = 0;
      while (!q.empty() && admitted < edge.capacity) {
        const auto [jt, id] = *q.begin();
        q.erase(q.begin());
        ++admitted;
        log(t, id, SimEventType::EnterEdge, edge_name(net, static_cast<EdgeIndex>(e)));
        state[static_cast<size_t>(id)].next_edge++;
        const Timestep eta = t + edge.travel_time;
        if (eta <= max_time) {
          traversal_done[static_cast<size_t>(eta)].push_back(id);
        } else {
          state[static_cast<size_t>(id)].done = true;  // still on the road at cutoff
        }
      }
      for (const auto& [jt, id] : q) {
        log(t, id, SimEventType::Stall, net.node(edge.tail).id);
      }
    }
  }

  for (size_t t = 1; t < result.rate_curve.size(); ++t) {
    result.rate_curve[t] = std::max(result.rate_curve[t], result.rate_curve[t - 1]);
  }
  for (const AgentOutcome& a : result.agents) {
    if (!a.arrival) ++result.unsuccessful;
  }
  return result;
}

namespace {

double quantile(const std::vector<Timestep>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = static_cast<size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return static_cast<double>(sorted[lo]) * (1.0 - frac) + static_cast<double>(sorted[hi]) * frac;
}

}  // namespace

RunStats summarize(const SimResult& result) {
  RunStats stats;
  std::vector<Timestep> arrivals;
  for (const AgentOutcome& a : result.agents) {
    if (a.arrival) arrivals.push_back(*a.arrival);
  }
  std::sort(arrivals.begin(), arrivals.end());
  stats.arrived = static_cast<int64_t>(arrivals.size());
  stats.unsuccessful = result.unsuccessful;
  stats.completion = result.completion_time;
  if (!arrivals.empty()) {
    stats.min = arrivals.front();
    stats.max = arrivals.back();
    stats.q1 = quantile(arrivals, 0.25);
    stats.median = quantile(arrivals, 0.5);
    stats.q3 = quantile(arrivals, 0.75);
    double sum = 0;
    for (const Timestep a : arrivals) sum += a;
    stats.mean = sum / static_cast<double>(arrivals.size());
  }
  return stats;
}

std::vector<RunStats> compare_runs(std::span<const SimResult> results) {
  std::vector<RunStats> out;
  out.reserve(results.size());
  for (const SimResult& r : results) out.push_back(summarize(r));
  return out;
}

}  // namespace evac
