#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "evac/exact.hpp"
#include "evac/network.hpp"

namespace evac {

/// Two Distinct Path instance: directed graph with sources x1, x2, sinks
/// y1, y2 and edge labels in {1, 2}; P2 may only use label-2 edges.
/// known_yes carries a human-verified certificate in the fixture.
struct TwoPathEdge {
  std::string tail;
  std::string head;
  int label = 1;
};

struct TwoPathInstance {
  std::string name;
  std::vector<std::string> nodes;
  std::vector<TwoPathEdge> edges;
  std::string x1, x2, y1, y2;
  bool known_yes = false;
};

/// Shipped toy instances: "yes1" (two disjoint 2-edge paths) and "no1"
/// (all paths share one capacity-2 edge).
TwoPathInstance two_path_fixture(const std::string& name);

inline constexpr Timestep kDefaultGadgetHorizonCap = 1024;

/// Reduction instance for the 3/2-gap construction: sources s_i with
/// M*i evacuees feed x_i through capacity-i edges, label-i edges carry
/// capacity i, sinks attach to a safe node with capacity-i edges, all
/// travel times 1, horizon M^2*n clipped at horizon_cap (recorded in the
/// instance metadata).
EvacuationNetwork build_two_path_gadget(const TwoPathInstance& inst, int64_t M,
                                        Timestep horizon_cap = kDefaultGadgetHorizonCap);

struct GridCoord {
  int x = 0;
  int y = 0;
  auto operator<=>(const GridCoord&) const = default;
};

/// k node-disjoint-paths instance on a subgrid; sinks lie on the outer
/// boundary (already swapped). Edges are undirected unit segments.
struct GridNdpInstance {
  std::string name;
  std::vector<std::pair<GridCoord, GridCoord>> edges;
  std::vector<std::pair<GridCoord, GridCoord>> pairs;  // (s_i, t_i), i = 1..k
  bool known_yes = false;
};

/// Shipped k=2 instances on a 6x6 grid: "yes1" (two disjoint rows) and
/// "no1" (both pairs on one row).
GridNdpInstance grid_fixture(const std::string& name);

/// Grid reduction: subdivides every edge and relocates each terminal to a
/// fresh pendant vertex so it is incident to exactly one edge, then
/// assigns capacity i to terminal edges, capacity k elsewhere, demand M*i
/// to s_i, travel time 1, horizon M^2*n clipped at horizon_cap. Throws
/// NotASubgridError if the pendant placement cannot stay grid-embedded.
EvacuationNetwork build_grid_gadget(const GridNdpInstance& inst, int64_t M,
                                    Timestep horizon_cap = kDefaultGadgetHorizonCap);

struct GapMeasurement {
  double ratio = 0;  // OPT(no) / OPT(yes)
  SolveReport yes_report;
  SolveReport no_report;
};

/// Ratio of exact optimal objectives between a NO and a YES instance.
GapMeasurement measure_gap(const EvacuationNetwork& yes_net, const EvacuationNetwork& no_net,
                           const SolveLimits& limits = {});

}  // namespace evac
