#pragma once

#include <cstdint>
#include <vector>

namespace evac {

/// Successive-shortest-path min-cost flow with Dijkstra potentials.
/// Costs must be non-negative. Augmenting paths are chosen by reduced
/// cost with ties broken on node index, so results are deterministic for
/// a fixed construction order.
class MinCostFlow {
 public:
  int add_node();
  /// Returns an arc id usable with arc_flow().
  int add_arc(int from, int to, int64_t capacity, int64_t cost);

  struct Result {
    int64_t flow = 0;
    int64_t cost = 0;
  };

  /// Sends up to flow_limit units from source to sink at minimum cost.
  Result run(int source, int sink, int64_t flow_limit);

  int64_t arc_flow(int arc) const;
  int num_nodes() const { return static_cast<int>(adjacency_.size()); }

 private:
  struct HalfArc {
    int to = 0;
    int64_t residual = 0;
    int64_t cost = 0;
  };

  // Paired storage: half-arc 2k is arc k forward, 2k+1 its reverse.
  std::vector<HalfArc> halves_;
  std::vector<int64_t> capacity_;
  std::vector<std::vector<int>> adjacency_;
};

}  // namespace evac
