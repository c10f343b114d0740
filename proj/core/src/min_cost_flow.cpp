#include "evac/min_cost_flow.hpp"

#include <cassert>
#include <limits>
#include <queue>

namespace evac {

namespace {
constexpr int64_t kInfDist = std::numeric_limits<int64_t>::max() / 4;
}

int MinCostFlow::add_node() {
  adjacency_.emplace_back();
  return static_cast<int>(adjacency_.size() - 1);
}

int MinCostFlow::add_arc(int from, int to, int64_t capacity, int64_t cost) {
  assert(capacity >= 0 && cost >= 0);
  const int id = static_cast<int>(capacity_.size());
  halves_.push_back(HalfArc{to, capacity, cost});
  halves_.push_back(HalfArc{from, 0, -cost});
  capacity_.push_back(capacity);
  adjacency_[static_cast<size_t>(from)].push_back(2 * id);
  adjacency_[static_cast<size_t>(to)].push_back(2 * id + 1);
  return id;
}

int64_t MinCostFlow::arc_flow(int arc) const {
  return capacity_[static_cast<size_t>(arc)] - halves_[static_cast<size_t>(2 * arc)].residual;
}

MinCostFlow::Result MinCostFlow::run(int source, int sink, int64_t flow_limit) {
  const size_t n = adjacency_.size();
  std::vector<int64_t> potential(n, 0);
  std::vector<int64_t> dist(n);
  std::vector<int> parent_half(n);
  Result result;

  while (result.flow < flow_limit) {
    std::fill(dist.begin(), dist.end(), kInfDist);
    std::fill(parent_half.begin(), parent_half.end(), -1);
    dist[static_cast<size_t>(source)] = 0;
    using Entry = std::pair<int64_t, int>;  // (distance, node); node index breaks ties
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    heap.emplace(0, source);
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[static_cast<size_t>(v)]) continue;
      for (int h : adjacency_[static_cast<size_t>(v)]) {
        const HalfArc& arc = halves_[static_cast<size_t>(h)];
        if (arc.residual <= 0) continue;
        const int64_t nd =
            d + arc.cost + potential[static_cast<size_t>(v)] - potential[static_cast<size_t>(arc.to)];
        if (nd < dist[static_cast<size_t>(arc.to)]) {
          dist[static_cast<size_t>(arc.to)] = nd;
          parent_half[static_cast<size_t>(arc.to)] = h;
          heap.emplace(nd, arc.to);
        }
      }
    }
    if (dist[static_cast<size_t>(sink)] >= kInfDist) break;
    for (size_t v = 0; v < n; ++v) {
      if (dist[v] < kInfDist) potential[v] += dist[v];
    }
    int64_t push = flow_limit - result.flow;
    for (int v = sink; v != source;) {
      const int h = parent_half[static_cast<size_t>(v)];
      push = std::min(push, halves_[static_cast<size_t>(h)].residual);
      v = halves_[static_cast<size_t>(h ^ 1)].to;
    }
    for (int v = sink; v != source;) {
      const int h = parent_half[static_cast<size_t>(v)];
      halves_[static_cast<size_t>(h)].residual -= push;
      halves_[static_cast<size_t>(h ^ 1)].residual += push;
      result.cost += push * halves_[static_cast<size_t>(h)].cost;
      v = halves_[static_cast<size_t>(h ^ 1)].to;
    }
    result.flow += push;
  }
  return result;
}

}  // namespace evac
