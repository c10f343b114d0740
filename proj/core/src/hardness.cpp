#include "evac/hardness.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "evac/teg.hpp"

namespace evac {

namespace {

std::string metadata_text(const std::string& gadget, const std::string& fixture, int64_t M,
                          int k, bool known_yes, bool clipped, bool m_below_proof_scale) {
  std::ostringstream os;
  os << "{\"gadget\":\"" << gadget << "\",\"fixture\":\"" << fixture << "\",\"M\":" << M
     << ",\"k\":" << k << ",\"known\":\"" << (known_yes ? "yes" : "no") << "\""
     << ",\"horizon_clipped\":" << (clipped ? "true" : "false");
  if (m_below_proof_scale) os << ",\"m_below_proof_scale\":true";
  os << "}";
  return os.str();
}

Timestep clipped_horizon(int64_t M, size_t n, Timestep cap, bool* clipped) {
  const long double want = static_cast<long double>(M) * static_cast<long double>(M) *
                           static_cast<long double>(n);
  if (want > static_cast<long double>(cap)) {
    *clipped = true;
    return cap;
  }
  *clipped = false;
  return static_cast<Timestep>(want);
}

}  // namespace

TwoPathInstance two_path_fixture(const std::string& name) {
  if (name == "yes1") {
    // Certificate: P1 = x1-a-y1, P2 = x2-b-y2 (all label 2), edge-disjoint.
    TwoPathInstance inst;
    inst.name = name;
    inst.nodes = {"x1", "x2", "a", "b", "y1", "y2"};
    inst.edges = {{"x1", "a", 1}, {"a", "y1", 1}, {"x2", "b", 2}, {"b", "y2", 2}};
    inst.x1 = "x1";
    inst.x2 = "x2";
    inst.y1 = "y1";
    inst.y2 = "y2";
    inst.known_yes = true;
    return inst;
  }
  if (name == "no1") {
    // Every x1->y1 and x2->y2 path crosses edge (c, d), so no pair of
    // edge-disjoint paths exists; (c, d) is the capacity-2 cut.
    TwoPathInstance inst;
    inst.name = name;
    inst.nodes = {"x1", "x2", "c", "d", "y1", "y2"};
    inst.edges = {{"x1", "c", 2}, {"x2", "c", 2}, {"c", "d", 2}, {"d", "y1", 2}, {"d", "y2", 2}};
    inst.x1 = "x1";
    inst.x2 = "x2";
    inst.y1 = "y1";
    inst.y2 = "y2";
    inst.known_yes = false;
    return inst;
  }
  throw Error("unknown two-path fixture '" + name + "'");
}

EvacuationNetwork build_two_path_gadget(const TwoPathInstance& inst, int64_t M,
                                        Timestep horizon_cap) {
  if (M < 1) throw Error("gadget scale M must be at least 1");
  NetworkBuilder b;
  b.node("s1", NodeKind::Source, M);
  b.node("s2", NodeKind::Source, 2 * M);
  for (const std::string& v : inst.nodes) b.node(v, NodeKind::Transit);
  b.node("t", NodeKind::Safe);

  b.edge("s1", inst.x1, 1, 1);
  b.edge("s2", inst.x2, 1, 2);
  for (const TwoPathEdge& e : inst.edges) b.edge(e.tail, e.head, 1, e.label);
  b.edge(inst.y1, "t", 1, 1);
  b.edge(inst.y2, "t", 1, 2);

  const size_t n = inst.nodes.size() + 3;
  bool clipped = false;
  b.horizon(clipped_horizon(M, n, horizon_cap, &clipped));
  b.objective(ObjectiveSpec::average());
  b.metadata(metadata_text("two-path", inst.name, M, 2, inst.known_yes, clipped,
                           M < static_cast<int64_t>(n) * static_cast<int64_t>(n) *
                                   static_cast<int64_t>(n)));
  return b.build();
}

GridNdpInstance grid_fixture(const std::string& name) {
  auto row = [](int y, int x0, int x1) {
    std::vector<std::pair<GridCoord, GridCoord>> edges;
    for (int x = x0; x < x1; ++x) edges.push_back({{x, y}, {x + 1, y}});
    return edges;
  };
  if (name == "yes1") {
    // Two disjoint rows of the 6x6 grid; each pair follows its own row.
    GridNdpInstance inst;
    inst.name = name;
    inst.edges = row(0, 0, 5);
    const auto second = row(5, 0, 5);
    inst.edges.insert(inst.edges.end(), second.begin(), second.end());
    inst.pairs = {{{0, 0}, {5, 0}}, {{0, 5}, {5, 5}}};
    inst.known_yes = true;
    return inst;
  }
  if (name == "no1") {
    // One row with nested pairs: the outer path must pass through the
    // inner pair's vertices, so node-disjoint paths do not exist.
    GridNdpInstance inst;
    inst.name = name;
    inst.edges = row(0, 0, 5);
    inst.pairs = {{{0, 0}, {5, 0}}, {{2, 0}, {4, 0}}};
    inst.known_yes = false;
    return inst;
  }
  throw Error("unknown grid fixture '" + name + "'");
}

EvacuationNetwork build_grid_gadget(const GridNdpInstance& inst, int64_t M,
                                    Timestep horizon_cap) {
  if (M < 1) throw Error("gadget scale M must be at least 1");
  const int k = static_cast<int>(inst.pairs.size());

  // Scale coordinates by two; midpoints of original edges become lattice
  // points, pendant slots live at odd-odd coordinates.
  auto scaled = [](GridCoord c) { return GridCoord{2 * c.x, 2 * c.y}; };
  std::set<GridCoord> vertices;
  std::set<std::pair<GridCoord, GridCoord>> segments;  // normalized (min, max)
  auto add_segment = [&](GridCoord a, GridCoord b) {
    if (std::abs(a.x - b.x) + std::abs(a.y - b.y) != 1) {
      throw NotASubgridError("segment endpoints are not grid-adjacent");
    }
    vertices.insert(a);
    vertices.insert(b);
    segments.insert({std::min(a, b), std::max(a, b)});
  };
  std::map<GridCoord, std::vector<GridCoord>> midpoints_of;  // original vertex -> midpoints
  for (const auto& [a, b] : inst.edges) {
    const GridCoord sa = scaled(a);
    const GridCoord sb = scaled(b);
    const GridCoord mid{(sa.x + sb.x) / 2, (sa.y + sb.y) / 2};
    add_segment(sa, mid);
    add_segment(mid, sb);
    midpoints_of[sa].push_back(mid);
    midpoints_of[sb].push_back(mid);
  }

  // Relocate each terminal: pick its smallest adjacent midpoint, then hang
  // a pendant off that midpoint at a free odd-odd slot.
  struct Terminal {
    GridCoord pendant;
    bool is_source = false;
    int index = 0;  // 1-based i
  };
  std::vector<Terminal> terminals;
  std::set<GridCoord> used_midpoints;
  std::set<std::pair<GridCoord, GridCoord>> pendant_edges;
  auto place = [&](GridCoord original, bool is_source, int index) {
    const GridCoord v = scaled(original);
    auto it = midpoints_of.find(v);
    if (it == midpoints_of.end()) throw NotASubgridError("terminal has no incident edge");
    std::vector<GridCoord> mids = it->second;
    std::sort(mids.begin(), mids.end());
    for (const GridCoord m : mids) {
      if (used_midpoints.count(m)) continue;
      std::vector<GridCoord> slots;
      if (m.x % 2 != 0) {
        slots = {{m.x, m.y - 1}, {m.x, m.y + 1}};
      } else {
        slots = {{m.x - 1, m.y}, {m.x + 1, m.y}};
      }
      std::sort(slots.begin(), slots.end());
      for (const GridCoord p : slots) {
        if (vertices.count(p)) continue;
        used_midpoints.insert(m);
        vertices.insert(p);
        pendant_edges.insert({p, m});
        terminals.push_back(Terminal{p, is_source, index});
        return;
      }
    }
    throw NotASubgridError("no free pendant slot next to a terminal");
  };
  for (size_t i = 0; i < inst.pairs.size(); ++i) {
    place(inst.pairs[i].first, true, static_cast<int>(i) + 1);
  }
  for (size_t i = 0; i < inst.pairs.size(); ++i) {
    place(inst.pairs[i].second, false, static_cast<int>(i) + 1);
  }

  auto coord_id = [](GridCoord c) {
    return std::to_string(c.x) + "_" + std::to_string(c.y);
  };

  NetworkBuilder b;
  std::map<GridCoord, Terminal*> terminal_at;
  for (Terminal& t : terminals) terminal_at[t.pendant] = &t;
  for (const GridCoord v : vertices) {
    auto it = terminal_at.find(v);
    if (it == terminal_at.end()) {
      b.node(coord_id(v), NodeKind::Transit);
    } else if (it->second->is_source) {
      b.node(coord_id(v), NodeKind::Source, M * it->second->index);
    } else {
      b.node(coord_id(v), NodeKind::Safe);
    }
  }
  // Interior segments run both ways with capacity k.
  for (const auto& [a, b2] : segments) {
    b.edge(coord_id(a), coord_id(b2), 1, k);
    b.edge(coord_id(b2), coord_id(a), 1, k);
  }
  // Pendant edges are directed (source out, sink in) with capacity i.
  for (const auto& [p, m] : pendant_edges) {
    const Terminal* t = terminal_at.at(p);
    if (t->is_source) {
      b.edge(coord_id(p), coord_id(m), 1, t->index);
    } else {
      b.edge(coord_id(m), coord_id(p), 1, t->index);
    }
  }

  const size_t n = vertices.size();
  bool clipped = false;
  b.horizon(clipped_horizon(M, n, horizon_cap, &clipped));
  b.objective(ObjectiveSpec::average());
  b.metadata(metadata_text("grid", inst.name, M, k, inst.known_yes, clipped,
                           M < static_cast<int64_t>(n) * static_cast<int64_t>(n) *
                                   static_cast<int64_t>(n)));
  return b.build();
}

GapMeasurement measure_gap(const EvacuationNetwork& yes_net, const EvacuationNetwork& no_net,
                           const SolveLimits& limits) {
  GapMeasurement out;
  auto solve_one = [&](const EvacuationNetwork& net) {
    auto ptr = std::make_shared<EvacuationNetwork>(net);
    const TimeExpandedGraph teg = build_variant_teg(ptr);
    return solve(teg, {}, limits);
  };
  out.yes_report = solve_one(yes_net);
  out.no_report = solve_one(no_net);
  if (!out.yes_report.objective || !out.no_report.objective) {
    throw InfeasibleError("gap measurement requires both instances to be solvable");
  }
  out.ratio = out.no_report.objective->value() / out.yes_report.objective->value();
  return out;
}

}  // namespace evac
