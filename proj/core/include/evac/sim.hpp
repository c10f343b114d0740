#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evac/schedule.hpp"

namespace evac {

/// Departure-time non-compliance model. Normal perturbs each prescribed
/// departure by N(0, sigma^2) rounded to the nearest timestep; Uniform
/// redraws it uniformly on [lo, hi]. Departures never precede t=0.
struct PerturbationModel {
  enum class Kind { None, Normal, Uniform };
  Kind kind = Kind::None;
  double sigma = 0.0;
  Timestep lo = 0;
  Timestep hi = 0;
  uint64_t seed = 0;

  static PerturbationModel none() { return {}; }
  static PerturbationModel normal(double sigma, uint64_t seed) {
    return {Kind::Normal, sigma, 0, 0, seed};
  }
  static PerturbationModel uniform(Timestep lo, Timestep hi, uint64_t seed) {
    return {Kind::Uniform, 0.0, lo, hi, seed};
  }
};

/// Edge admits no new entries strictly after fail_time; agents already on
/// it finish their traversal.
struct EdgeFailure {
  EdgeIndex edge = -1;
  Timestep fail_time = 0;
};

struct AgentDeparture {
  int64_t agent = 0;
  NodeIndex source = -1;
  Timestep prescribed = 0;
  Timestep actual = 0;
};

/// Deterministic agent materialization (cohorts in (source, t) order) and
/// seeded departure perturbation.
std::vector<AgentDeparture> perturb_departures(const EvacuationNetwork& net,
                                               const Schedule& schedule,
                                               const PerturbationModel& model);

enum class SimEventType { Depart, EnterEdge, Arrive, Stall, Strand };

const char* to_string(SimEventType type);

struct SimEvent {
  Timestep t = 0;
  int64_t agent = 0;
  SimEventType type = SimEventType::Depart;
  std::string location;  // node id, or "tail-head" for edge entries
};

struct AgentOutcome {
  int64_t agent = 0;
  NodeIndex source = -1;
  Timestep prescribed = 0;
  Timestep actual = 0;
  std::optional<Timestep> arrival;  // nullopt = unsuccessful
};

struct SimResult {
  std::vector<AgentOutcome> agents;
  int64_t unsuccessful = 0;
  int64_t total_evacuation_time = 0;  // sum of arrival times over arrived agents
  Timestep completion_time = 0;
  std::vector<int64_t> rate_curve;  // cumulative arrivals per timestep
  std::vector<SimEvent> events;
};

/// Queue-based discrete-time simulation of a plan. Each edge admits at
/// most capacity agents per timestep, FIFO by (queue arrival time, agent
/// id); blocked agents wait at the upstream node (waiting is legal here
/// even though plans forbid it). Agents whose next edge has failed are
/// stranded; anyone not at safety by max_time is unsuccessful.
SimResult simulate(const EvacuationNetwork& net, const EvacuationPlan& plan,
                   const PerturbationModel& perturbation, std::span<const EdgeFailure> failures,
                   Timestep max_time);

/// Per-run summary used for scenario comparison tables.
struct RunStats {
  int64_t arrived = 0;
  int64_t unsuccessful = 0;
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;
  Timestep completion = 0;
  double mean = 0;
};

RunStats summarize(const SimResult& result);
std::vector<RunStats> compare_runs(std::span<const SimResult> results);

}  // namespace evac
