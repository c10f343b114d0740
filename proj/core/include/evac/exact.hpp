#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "evac/schedule.hpp"

namespace evac {

enum class SolveStatus { Optimal, GapReached, TimeLimit, Infeasible };

const char* to_string(SolveStatus status);

struct SolveLimits {
  std::optional<std::chrono::milliseconds> time_limit;
  double threshold_gap = 0.0;
  int workers = 1;  // > 1 explores the tree in parallel; optimum is unchanged
};

struct BoundTracePoint {
  int64_t wall_ms = 0;
  double upper_bound = 0;
  double lower_bound = 0;
  double gap = 0;
};

struct SolveReport {
  std::optional<EvacuationPlan> best_plan;
  std::optional<ObjectiveValue> objective;
  double upper_bound = 0;  // kind-matched scale; +inf while no incumbent
  double lower_bound = 0;
  double gap = 1.0;  // (Z_U - Z_L) / Z_U
  int64_t nodes_explored = 0;
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<BoundTracePoint> trace;
};

/// Exact solver for the routing+scheduling problem on `teg`: depth-first
/// branch-and-bound over confluent successor choices, bounded by the
/// confluence-relaxed min-cost dynamic flow (earliest-feasible-completion
/// for the completion variant). `fixed_routes` pins successors up front
/// (the LNS neighborhood contract). Deterministic for fixed limits with
/// workers == 1 and no time limit.
SolveReport solve(const TimeExpandedGraph& teg, const RouteSet& fixed_routes = {},
                  const SolveLimits& limits = {});

/// Every successor assignment reachable from the sources that is acyclic
/// and terminates at safe nodes (oracle support for tests and gap
/// measurement). Throws CapExceededError when the out-degree product over
/// sources and transits exceeds `cap`.
std::vector<RouteSet> enumerate_confluent_routings(const EvacuationNetwork& net,
                                                   int64_t cap = 1000000);

}  // namespace evac
