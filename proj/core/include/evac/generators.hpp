#pragma once

#include <cstdint>

#include "evac/network.hpp"

namespace evac {

/// The worked micro-example: sources 0 and 1 (one evacuee each) feeding
/// transit node 2, safe node A, all edges capacity 1 / travel time 1,
/// horizon 3, average objective.
EvacuationNetwork sample_network();

struct RandomInstanceParams {
  int max_nodes = 8;
  int max_sources = 3;
  Timestep max_horizon = 6;
  ObjectiveKind objective = ObjectiveKind::Average;
  double outlier_fraction = 0.75;
  /// Only emit instances whose shortest-route initial solution schedules
  /// within the horizon (guarantees overall feasibility).
  bool require_feasible = true;
};

/// Seeded random small instance; always passes validate().
EvacuationNetwork random_network(uint64_t seed, const RandomInstanceParams& params = {});

/// Seeded rows x cols lattice with bidirectional unit-length streets,
/// `sources` random demand points and safe nodes on the boundary.
EvacuationNetwork grid_network(int rows, int cols, int sources, uint64_t seed);

}  // namespace evac
