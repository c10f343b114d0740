#include "evac/generators.hpp"

#include <algorithm>
#include <set>

#include "evac/lns.hpp"
#include "evac/rng.hpp"
#include "evac/teg.hpp"

namespace evac {

EvacuationNetwork sample_network() {
  NetworkBuilder b;
  b.node("0", NodeKind::Source, 1);
  b.node("1", NodeKind::Source, 1);
  b.node("2", NodeKind::Transit);
  b.node("A", NodeKind::Safe);
  b.edge("0", "2", 1, 1);
  b.edge("1", "2", 1, 1);
  b.edge("2", "A", 1, 1);
  b.horizon(3);
  b.objective(ObjectiveSpec::average());
  return b.build();
}

namespace {

ObjectiveSpec make_objective(const RandomInstanceParams& params) {
  switch (params.objective) {
    case ObjectiveKind::Average: return ObjectiveSpec::average();
    case ObjectiveKind::CompletionTime: return ObjectiveSpec::completion();
    case ObjectiveKind::OutlierAverage: return ObjectiveSpec::outlier(params.outlier_fraction);
  }
  return ObjectiveSpec::average();
}

std::optional<EvacuationNetwork> try_random_network(Rng& rng,
                                                    const RandomInstanceParams& params) {
  const int n_nodes = static_cast<int>(rng.range(4, params.max_nodes));
  const int n_sources =
      static_cast<int>(rng.range(1, std::min(params.max_sources, n_nodes - 2)));
  const int n_safe = static_cast<int>(rng.range(1, std::min(2, n_nodes - n_sources - 1)));
  const int n_transit = n_nodes - n_sources - n_safe;

  NetworkBuilder b;
  std::vector<std::string> order;  // sources, transits, safes
  for (int i = 0; i < n_sources; ++i) {
    const std::string id = "s" + std::to_string(i);
    b.node(id, NodeKind::Source, rng.range(1, 3));
    order.push_back(id);
  }
  for (int i = 0; i < n_transit; ++i) {
    const std::string id = "m" + std::to_string(i);
    b.node(id, NodeKind::Transit);
    order.push_back(id);
  }
  for (int i = 0; i < n_safe; ++i) {
    const std::string id = "f" + std::to_string(i);
    b.node(id, NodeKind::Safe);
    order.push_back(id);
  }

  // Forward edges guarantee reachability; a few cross edges add route
  // choices (and possibly cycles, which the routing layer handles).
  const int n_non_safe = n_sources + n_transit;
  std::set<std::pair<int, int>> present;
  auto add_edge = [&](int from, int to) {
    if (from == to) return;
    if (!present.insert({from, to}).second) return;
    b.edge(order[static_cast<size_t>(from)], order[static_cast<size_t>(to)],
           static_cast<Timestep>(rng.range(1, 2)), rng.range(1, 3));
  };
  for (int i = 0; i < n_non_safe; ++i) {
    add_edge(i, static_cast<int>(rng.range(i + 1, n_nodes - 1)));
  }
  const int extra = static_cast<int>(rng.range(0, n_non_safe));
  for (int i = 0; i < extra; ++i) {
    const int from = static_cast<int>(rng.range(0, n_non_safe - 1));
    add_edge(from, static_cast<int>(rng.range(0, n_nodes - 1)));
  }
  // Out-degree cap of 3 keeps the enumeration oracle cheap.
  b.horizon(params.max_horizon);
  b.objective(make_objective(params));
  EvacuationNetwork probe = b.build();
  for (size_t v = 0; v < probe.num_nodes(); ++v) {
    if (probe.out_edges(static_cast<NodeIndex>(v)).size() > 3) return std::nullopt;
  }
  if (!validate(probe).empty()) return std::nullopt;

  // Tighten the horizon to a random feasible value.
  Timestep needed = 1;
  for (NodeIndex k : probe.sources()) {
    needed = std::max(needed,
                      static_cast<Timestep>(shortest_route_to_safety(probe, k).travel_time));
  }
  if (needed > params.max_horizon) return std::nullopt;
  const Timestep horizon =
      static_cast<Timestep>(rng.range(needed, params.max_horizon));
  EvacuationNetwork net(probe.nodes(), probe.edges(), horizon, probe.objective());
  if (!validate(net).empty()) return std::nullopt;
  if (params.require_feasible) {
    try {
      auto ptr = std::make_shared<EvacuationNetwork>(net);
      initial_solution(*ptr, build_variant_teg(ptr));
    } catch (const InfeasibleError&) {
      return std::nullopt;
    }
  }
  return net;
}

}  // namespace

EvacuationNetwork random_network(uint64_t seed, const RandomInstanceParams& params) {
  for (uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * (attempt + 1)));
    auto net = try_random_network(rng, params);
    if (net) return *net;
    if (attempt > 10000) throw Error("random instance generation did not converge");
  }
}

EvacuationNetwork grid_network(int rows, int cols, int sources, uint64_t seed) {
  if (rows < 2 || cols < 2) throw Error("grid needs at least 2x2 nodes");
  if (sources < 1) throw Error("grid needs at least one source");
  Rng rng(seed);

  auto id = [&](int r, int c) { return std::to_string(r) + "_" + std::to_string(c); };
  std::vector<std::pair<int, int>> boundary;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (r == 0 || c == 0 || r == rows - 1 || c == cols - 1) boundary.push_back({r, c});
    }
  }
  const int n_safe = std::max<int>(1, static_cast<int>(boundary.size()) / 6);
  std::set<std::pair<int, int>> safe;
  {
    const auto picks =
        rng.sample_without_replacement(boundary.size(), static_cast<size_t>(n_safe));
    for (const size_t i : picks) safe.insert(boundary[i]);
  }
  std::vector<std::pair<int, int>> candidates;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!safe.count({r, c})) candidates.push_back({r, c});
    }
  }
  if (static_cast<size_t>(sources) > candidates.size()) {
    throw Error("more sources than available grid cells");
  }
  std::set<std::pair<int, int>> source_cells;
  {
    const auto picks =
        rng.sample_without_replacement(candidates.size(), static_cast<size_t>(sources));
    for (const size_t i : picks) source_cells.insert(candidates[i]);
  }

  NetworkBuilder b;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (safe.count({r, c})) {
        b.node(id(r, c), NodeKind::Safe);
      } else if (source_cells.count({r, c})) {
        b.node(id(r, c), NodeKind::Source, rng.range(1, 5));
      } else {
        b.node(id(r, c), NodeKind::Transit);
      }
    }
  }
  auto maybe_edge = [&](int r1, int c1, int r2, int c2, int64_t cap) {
    if (safe.count({r1, c1})) return;  // safe nodes are terminal
    b.edge(id(r1, c1), id(r2, c2), 1, cap);
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (r + 1 < rows) {
        const int64_t cap = rng.range(1, 3);
        maybe_edge(r, c, r + 1, c, cap);
        maybe_edge(r + 1, c, r, c, cap);
      }
      if (c + 1 < cols) {
        const int64_t cap = rng.range(1, 3);
        maybe_edge(r, c, r, c + 1, cap);
        maybe_edge(r, c + 1, r, c, cap);
      }
    }
  }
  b.horizon(3 * (rows + cols));
  b.objective(ObjectiveSpec::average());
  return b.build();
}

}  // namespace evac
