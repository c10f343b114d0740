#include "evac/lns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "evac/rng.hpp"

namespace evac {

LnsParams default_params() { return LnsParams{}; }

LnsParams scaling_study_params() {
  LnsParams params;
  params.p = 80.0;
  params.threshold_gap = 0.02;
  return params;
}

EvacuationPlan initial_solution(const EvacuationNetwork& net, const TimeExpandedGraph& teg) {
  // Larger demand wins shared transit nodes; displaced sources re-route
  // around the already-fixed successors.
  std::vector<NodeIndex> order = net.sources();
  std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
    if (net.node(a).demand != net.node(b).demand) return net.node(a).demand > net.node(b).demand;
    return net.node(a).id < net.node(b).id;
  });

  RouteSet routes;
  for (NodeIndex k : order) {
    const auto route = shortest_route_constrained(net, k, routes.successor);
    if (!route) {
      throw InfeasibleError("no confluent completion of the shortest-route union covers source '" +
                            net.node(k).id + "'");
    }
    for (size_t i = 0; i + 1 < route->nodes.size(); ++i) {
      routes.successor.emplace(route->nodes[i], route->edges[i]);
    }
  }
  ScheduleResult sched = schedule_fixed_routes(teg, routes);
  return EvacuationPlan{std::move(routes), std::move(sched.schedule)};
}

namespace {

double kind_scaled(const ObjectiveValue& v) { return v.value(); }

// Global lower bound at the original horizon: the confluence-relaxed
// flow (earliest feasible completion for the CT variant).
std::optional<double> global_relaxation_bound(const TimeExpandedGraph& teg) {
  const std::vector<char> all(teg.network().num_edges(), 1);
  try {
    if (teg.variant() == TegVariant::CompletionTime) {
      const auto t = min_feasible_completion(teg, all);
      if (!t) return std::nullopt;
      return static_cast<double>(*t);
    }
    const auto flow = min_cost_dynamic_flow(teg, all);
    int64_t den = teg.network().total_demand();
    if (teg.variant() == TegVariant::OutlierAverage) {
      // kept count = demand - bypass capacity
      int64_t bypass_cap = 0;
      if (teg.bypass() >= 0) {
        for (TegEdgeIndex e : teg.out_edges(teg.bypass())) {
          if (teg.edge(e).to == teg.super_sink()) bypass_cap = teg.edge(e).capacity;
        }
      }
      den = teg.network().total_demand() - bypass_cap;
    }
    return den <= 0 ? 0.0 : static_cast<double>(flow.cost) / static_cast<double>(den);
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

}  // namespace

LnsResult run(std::shared_ptr<const EvacuationNetwork> net, const LnsParams& params) {
  const EvacuationNetwork& n = *net;
  const double p_out =
      n.objective().kind == ObjectiveKind::OutlierAverage ? n.objective().fraction : 1.0;
  TimeExpandedGraph teg = build_variant_teg(net);
  const Timestep original_horizon = teg.horizon();
  const TegVariant variant = teg.variant();

  const auto started = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - started)
        .count();
  };

  double global_lower = global_relaxation_bound(teg).value_or(0.0);

  EvacuationPlan current = initial_solution(n, teg);
  ObjectiveValue current_value = plan_objective(n, current, variant, p_out);
  EvacuationPlan best = current;
  ObjectiveValue best_value = current_value;

  Rng rng(params.rng_seed);
  double p = std::clamp(params.p, 0.0, 100.0);
  Timestep working_horizon = original_horizon;
  int64_t nodes_explored = 0;

  LnsResult result;
  SolveReport& report = result.report;
  auto push_report_trace = [&] {
    BoundTracePoint pt;
    pt.wall_ms = elapsed_ms();
    pt.upper_bound = kind_scaled(best_value);
    pt.lower_bound = global_lower;
    pt.gap = pt.upper_bound > 0 ? (pt.upper_bound - pt.lower_bound) / pt.upper_bound : 0.0;
    report.trace.push_back(pt);
  };

  {
    const PlanMetrics m = evaluate_plan(n, current, p_out);
    LnsIterationRecord row;
    row.iteration = 0;
    row.objective = kind_scaled(current_value);
    row.completion = m.completion;
    row.horizon = working_horizon;
    row.p = p;
    row.inner_status = "initial";
    row.accepted = true;
    row.fixed_count = 0;
    result.trace.rows.push_back(row);
    push_report_trace();
  }

  const size_t num_sources = n.sources().size();
  for (int iter = 1; iter <= params.iterations; ++iter) {
    const int fixed_count = static_cast<int>(
        std::ceil((100.0 - p) * static_cast<double>(num_sources) / 100.0));
    const auto picks =
        rng.sample_without_replacement(num_sources, static_cast<size_t>(fixed_count));

    RouteSet fixed;
    for (const size_t idx : picks) {
      const NodeIndex k = n.sources()[idx];
      const Route route = route_from(n, current.routes, k);
      for (size_t i = 0; i + 1 < route.nodes.size(); ++i) {
        fixed.successor.emplace(route.nodes[i], route.edges[i]);
      }
    }

    SolveLimits inner_limits;
    inner_limits.time_limit = params.inner_time_limit;
    inner_limits.threshold_gap = params.threshold_gap;
    inner_limits.workers = params.workers;
    const SolveReport inner = solve(teg, fixed, inner_limits);
    nodes_explored += inner.nodes_explored;

    bool accepted = false;
    if (inner.best_plan && inner.objective) {
      const bool better = inner.objective->numerator <= current_value.numerator;
      if (better || params.accept_worse) {
        accepted = true;
        current = *inner.best_plan;
        current_value = *inner.objective;
        if (current_value.numerator < best_value.numerator) {
          best = current;
          best_value = current_value;
        }
        const PlanMetrics m = evaluate_plan(n, current, p_out);
        // completion 0 only happens with zero demand; a horizon below 1
        // is not expandable, so never shrink past the first timestep.
        if (m.completion >= 1 &&
            working_horizon - m.completion > params.horizon_shrink_threshold) {
          teg = teg.truncate_horizon(m.completion);
          working_horizon = m.completion;
        }
      }
    }
    // An inner solve with nothing fixed at the original horizon bounds
    // the original problem; restricted or truncated solves do not.
    if (fixed.successor.empty() && working_horizon == original_horizon &&
        inner.lower_bound > global_lower &&
        inner.lower_bound != std::numeric_limits<double>::infinity()) {
      global_lower = inner.lower_bound;
    }

    const PlanMetrics m = evaluate_plan(n, current, p_out);
    LnsIterationRecord row;
    row.iteration = iter;
    row.objective = kind_scaled(current_value);
    row.completion = m.completion;
    row.horizon = working_horizon;
    row.p = p;
    row.inner_status = to_string(inner.status);
    row.accepted = accepted;
    row.fixed_count = fixed_count;
    result.trace.rows.push_back(row);
    if (params.progress) {
      std::fprintf(stderr, "lns iter %d/%d objective %.6g completion %d horizon %d p %.1f %s\n",
                   iter, params.iterations, row.objective, row.completion, row.horizon, p,
                   row.inner_status.c_str());
    }

    p = std::min(p + params.p_inc, 100.0);
    push_report_trace();
  }

  result.plan = best;
  report.best_plan = best;
  report.objective = best_value;
  report.upper_bound = kind_scaled(best_value);
  report.lower_bound = std::min(global_lower, report.upper_bound);
  report.gap = report.upper_bound > 0
                   ? (report.upper_bound - report.lower_bound) / report.upper_bound
                   : 0.0;
  report.nodes_explored = nodes_explored;
  if (report.gap <= 1e-12) {
    report.status = SolveStatus::Optimal;
  } else if (report.gap <= params.threshold_gap) {
    report.status = SolveStatus::GapReached;
  } else {
    report.status = SolveStatus::TimeLimit;
  }
  return result;
}

}  // namespace evac
