#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "evac/teg.hpp"

namespace evac {

/// Confluent route assignment: the chosen outgoing edge per node. Every
/// source has exactly one entry; transit nodes that carry flow have at
/// most one. Following successors from any source ends at a safe node.
struct RouteSet {
  std::map<NodeIndex, EdgeIndex> successor;

  bool operator==(const RouteSet&) const = default;
};

/// Departure counts per (source, timestep).
struct Schedule {
  std::map<std::pair<NodeIndex, Timestep>, int64_t> departures;

  int64_t total() const;
  bool operator==(const Schedule&) const = default;
};

struct EvacuationPlan {
  RouteSet routes;
  Schedule schedule;

  bool operator==(const EvacuationPlan&) const = default;
};

/// Kind-matched scalar stored as an exact fraction. Average: total
/// evacuation time over total demand. CompletionTime: latest arrival over
/// 1. OutlierAverage: kept-evacuee time over kept count.
struct ObjectiveValue {
  ObjectiveKind kind = ObjectiveKind::Average;
  int64_t numerator = 0;
  int64_t denominator = 1;

  double value() const {
    return denominator == 0 ? 0.0
                            : static_cast<double>(numerator) / static_cast<double>(denominator);
  }
};

/// Throws Error when `routes` breaks a RouteSet invariant on `net`.
void require_valid_routes(const EvacuationNetwork& net, const RouteSet& routes);

/// The path induced by following successors from `source`.
Route route_from(const EvacuationNetwork& net, const RouteSet& routes, NodeIndex source);

struct ScheduleResult {
  Schedule schedule;
  ObjectiveValue objective;
};

/// Optimal departure schedule for a fixed confluent route set: the
/// continuous subproblem once all edge choices are pinned. Average and
/// outlier variants solve a min-cost dynamic flow whose sink arcs charge
/// the arrival timestep; the completion variant does a monotone search
/// over the deadline with max-flow feasibility tests. The returned flow
/// is integral. Throws InfeasibleError when the demand cannot be routed
/// within the horizon.
ScheduleResult schedule_fixed_routes(const TimeExpandedGraph& teg, const RouteSet& routes);

struct DynamicFlowResult {
  std::vector<int64_t> edge_flow;  // per TEG edge
  int64_t cost = 0;                // sum of flow * t_s over super-sink arcs
  int64_t flow = 0;
};

/// Integral min-cost dynamic flow shipping the full demand, with
/// departure-time freedom at the sources. `usable_static_edges` masks
/// which static edges may carry flow (all-true = confluence-relaxed
/// lower bound). Throws InfeasibleError when max flow < total demand.
DynamicFlowResult min_cost_dynamic_flow(const TimeExpandedGraph& teg,
                                        const std::vector<char>& usable_static_edges);

/// Smallest completion time T such that the full demand can arrive by T
/// using `usable_static_edges` (confluence relaxed), or nullopt.
std::optional<Timestep> min_feasible_completion(const TimeExpandedGraph& teg,
                                                const std::vector<char>& usable_static_edges);

/// All three plan metrics computed analytically from cohort arrivals.
struct PlanMetrics {
  int64_t total_time = 0;
  int64_t demand = 0;
  Timestep completion = 0;
  int64_t kept_total = 0;  // outlier-excluded total
  int64_t kept_count = 0;

  double average() const {
    return demand == 0 ? 0.0 : static_cast<double>(total_time) / static_cast<double>(demand);
  }
  double outlier_average() const {
    return kept_count == 0 ? 0.0
                           : static_cast<double>(kept_total) / static_cast<double>(kept_count);
  }
};

/// Evaluates a plan against the network: checks per-edge-copy loads and
/// returns average, completion and non-outlier average (excluding the
/// floor((1-p_out) * sum d) latest arrivals). Throws CapacityViolationError
/// naming the first overloaded or missing edge copy.
PlanMetrics evaluate_plan(const EvacuationNetwork& net, const EvacuationPlan& plan, double p_out);

/// The objective value of `plan` under the given variant, computed
/// analytically (used for incumbent comparisons).
ObjectiveValue plan_objective(const EvacuationNetwork& net, const EvacuationPlan& plan,
                              TegVariant variant, double p_out);

}  // namespace evac
