#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evac/exact.hpp"

namespace evac {

struct LnsParams {
  int iterations = 30;   // n
  double p = 75.0;       // percent of routes free to update
  double p_inc = 0.5;    // per-iteration increment of p
  double threshold_gap = 0.05;
  std::optional<std::chrono::milliseconds> inner_time_limit;
  Timestep horizon_shrink_threshold = 1;
  bool accept_worse = false;  // unconditional acceptance variant
  uint64_t rng_seed = 0;
  int workers = 1;
  bool progress = false;  // one line per iteration on stderr
};

/// n=30, p=75, p_inc=0.5, threshold_gap=5%.
LnsParams default_params();

/// Scaling-study profile: p=80, threshold_gap=2%.
LnsParams scaling_study_params();

struct LnsIterationRecord {
  int iteration = 0;
  double objective = 0;       // incumbent, kind-matched scale
  Timestep completion = 0;    // incumbent completion time
  Timestep horizon = 0;       // working horizon after the iteration
  double p = 0;
  std::string inner_status;   // "initial" on row 0
  bool accepted = false;
  int fixed_count = 0;
};

struct LnsTrace {
  std::vector<LnsIterationRecord> rows;
};

struct LnsResult {
  EvacuationPlan plan;
  SolveReport report;
  LnsTrace trace;
};

/// Shortest route from every source to its nearest safe node, with
/// conflicts at shared nodes resolved in favor of the larger-demand
/// source (ties by source id) and displaced sources re-routed under the
/// already-fixed successors; the departure schedule is then solved
/// optimally for those routes. Throws InfeasibleError when no confluent
/// completion of the shortest-route union exists within the horizon.
EvacuationPlan initial_solution(const EvacuationNetwork& net, const TimeExpandedGraph& teg);

/// The destroy-and-reoptimize loop: each iteration fixes the current routes of
/// ceil((100-p)% * #sources) randomly chosen sources, re-optimizes the
/// rest exactly under the inner limits, accepts monotonically (unless
/// accept_worse), and shrinks the working horizon when the completion
/// time improves by more than horizon_shrink_threshold.
LnsResult run(std::shared_ptr<const EvacuationNetwork> net, const LnsParams& params);

}  // namespace evac
