#include "evac/network.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <queue>

namespace evac {

EvacuationNetwork::EvacuationNetwork(std::vector<Node> nodes, std::vector<Edge> edges,
                                     Timestep horizon, ObjectiveSpec objective,
                                     std::string metadata_json)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      horizon_(horizon),
      objective_(objective),
      metadata_json_(std::move(metadata_json)),
      out_(nodes_.size()),
      in_(nodes_.size()) {
  for (size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    assert(edge.tail >= 0 && static_cast<size_t>(edge.tail) < nodes_.size());
    assert(edge.head >= 0 && static_cast<size_t>(edge.head) < nodes_.size());
    out_[static_cast<size_t>(edge.tail)].push_back(static_cast<EdgeIndex>(e));
    in_[static_cast<size_t>(edge.head)].push_back(static_cast<EdgeIndex>(e));
  }
  for (size_t v = 0; v < nodes_.size(); ++v) {
    by_id_[nodes_[v].id] = static_cast<NodeIndex>(v);
    if (nodes_[v].kind == NodeKind::Source) sources_.push_back(static_cast<NodeIndex>(v));
    if (nodes_[v].kind == NodeKind::Safe) safes_.push_back(static_cast<NodeIndex>(v));
    total_demand_ += nodes_[v].demand;
  }
}

std::optional<NodeIndex> EvacuationNetwork::find_node(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

NetworkBuilder& NetworkBuilder::node(std::string id, NodeKind kind, int64_t demand) {
  if (by_id_.count(id)) throw ParseError("duplicate node id '" + id + "'");
  by_id_[id] = static_cast<NodeIndex>(nodes_.size());
  nodes_.push_back(Node{std::move(id), kind, demand});
  return *this;
}

NetworkBuilder& NetworkBuilder::edge(const std::string& tail, const std::string& head,
                                     Timestep travel_time, int64_t capacity,
                                     std::optional<Timestep> deadline) {
  auto t = by_id_.find(tail);
  auto h = by_id_.find(head);
  if (t == by_id_.end()) throw ParseError("edge references unknown node '" + tail + "'");
  if (h == by_id_.end()) throw ParseError("edge references unknown node '" + head + "'");
  edges_.push_back(Edge{t->second, h->second, travel_time, capacity, deadline});
  return *this;
}

EvacuationNetwork NetworkBuilder::build() const {
  return EvacuationNetwork(nodes_, edges_, horizon_, objective_, metadata_);
}

namespace {

// (travel time, edge count) label used for shortest-route tie-breaking.
struct DistLabel {
  int64_t time = std::numeric_limits<int64_t>::max();
  int64_t edges = std::numeric_limits<int64_t>::max();

  bool operator<(const DistLabel& o) const {
    return time != o.time ? time < o.time : edges < o.edges;
  }
  bool operator==(const DistLabel& o) const { return time == o.time && edges == o.edges; }
  bool infinite() const { return time == std::numeric_limits<int64_t>::max(); }
};

// Distance-to-nearest-safe labels over the reversed graph. When
// `fixed_successor` pins a node, only the pinned edge may leave it.
std::vector<DistLabel> labels_to_safety(const EvacuationNetwork& net,
                                        const std::map<NodeIndex, EdgeIndex>* fixed_successor) {
  const size_t n = net.num_nodes();
  std::vector<DistLabel> dist(n);
  using Entry = std::pair<DistLabel, NodeIndex>;
  auto cmp = [](const Entry& a, const Entry& b) {
    return b.first < a.first || (a.first == b.first && a.second > b.second);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  for (NodeIndex s : net.safe_nodes()) {
    dist[static_cast<size_t>(s)] = DistLabel{0, 0};
    heap.push({DistLabel{0, 0}, s});
  }
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (!(d == dist[static_cast<size_t>(v)])) continue;
    for (EdgeIndex e : net.in_edges(v)) {
      const Edge& edge = net.edge(e);
      const NodeIndex u = edge.tail;
      if (fixed_successor) {
        auto it = fixed_successor->find(u);
        if (it != fixed_successor->end() && it->second != e) continue;
      }
      DistLabel cand{d.time + edge.travel_time, d.edges + 1};
      if (cand < dist[static_cast<size_t>(u)]) {
        dist[static_cast<size_t>(u)] = cand;
        heap.push({cand, u});
      }
    }
  }
  return dist;
}

std::optional<Route> greedy_route(const EvacuationNetwork& net, NodeIndex source,
                                  const std::vector<DistLabel>& dist,
                                  const std::map<NodeIndex, EdgeIndex>* fixed_successor) {
  if (dist[static_cast<size_t>(source)].infinite()) return std::nullopt;
  Route route;
  route.nodes.push_back(source);
  NodeIndex cur = source;
  while (net.node(cur).kind != NodeKind::Safe) {
    const DistLabel& here = dist[static_cast<size_t>(cur)];
    EdgeIndex best = -1;
    for (EdgeIndex e : net.out_edges(cur)) {
      const Edge& edge = net.edge(e);
      if (fixed_successor) {
        auto it = fixed_successor->find(cur);
        if (it != fixed_successor->end() && it->second != e) continue;
      }
      const DistLabel& there = dist[static_cast<size_t>(edge.head)];
      if (there.infinite()) continue;
      if (!(DistLabel{there.time + edge.travel_time, there.edges + 1} == here)) continue;
      // All optimal continuations have the same length, so picking the
      // smallest head id at each step yields the lexicographically
      // smallest node-id sequence.
      if (best == -1 || net.node(edge.head).id < net.node(net.edge(best).head).id) best = e;
    }
    if (best == -1) return std::nullopt;
    route.edges.push_back(best);
    route.travel_time += net.edge(best).travel_time;
    cur = net.edge(best).head;
    route.nodes.push_back(cur);
  }
  return route;
}

}  // namespace

Route shortest_route_to_safety(const EvacuationNetwork& net, NodeIndex source) {
  auto dist = labels_to_safety(net, nullptr);
  auto route = greedy_route(net, source, dist, nullptr);
  if (!route) {
    throw NoRouteError("source '" + net.node(source).id + "' has no route to any safe node");
  }
  return *route;
}

std::optional<Route> shortest_route_constrained(
    const EvacuationNetwork& net, NodeIndex source,
    const std::map<NodeIndex, EdgeIndex>& fixed_successor) {
  auto dist = labels_to_safety(net, &fixed_successor);
  return greedy_route(net, source, dist, &fixed_successor);
}

std::vector<std::string> validate(const EvacuationNetwork& net) {
  std::vector<std::string> v;
  if (net.horizon() < 1) v.push_back("horizon must be a positive integer");
  if (net.objective().kind == ObjectiveKind::OutlierAverage) {
    const double f = net.objective().fraction;
    if (!(f > 0.0 && f <= 1.0)) v.push_back("outlier fraction must be in (0, 1]");
  }
  for (size_t e = 0; e < net.num_edges(); ++e) {
    const Edge& edge = net.edge(static_cast<EdgeIndex>(e));
    const std::string name =
        "edge (" + net.node(edge.tail).id + ", " + net.node(edge.head).id + ")";
    if (edge.travel_time < 1) v.push_back(name + " has non-positive travel time");
    if (edge.capacity < 0) v.push_back(name + " has negative capacity");
    if (edge.tail == edge.head) v.push_back(name + " is a self-loop");
    if (edge.deadline && *edge.deadline < 0) v.push_back(name + " has negative deadline");
  }
  for (size_t i = 0; i < net.num_nodes(); ++i) {
    const Node& node = net.node(static_cast<NodeIndex>(i));
    if (node.demand < 0) v.push_back("negative demand on node '" + node.id + "'");
    if (node.demand > 0 && node.kind != NodeKind::Source) {
      v.push_back("demand on non-source node '" + node.id + "'");
    }
    if (node.kind == NodeKind::Safe && !net.out_edges(static_cast<NodeIndex>(i)).empty()) {
      v.push_back("safe node '" + node.id + "' has outgoing edges");
    }
    if (node.kind == NodeKind::Source && net.out_edges(static_cast<NodeIndex>(i)).empty()) {
      v.push_back("source '" + node.id + "' has no outgoing edge");
    }
  }
  // Scheduling scales arrival costs by sum(d) * (H+1) * #sources for the
  // deterministic tie-break, so total costs reach about
  // (sum(d) * (H+1))^2 * (#sources + 1); keep that within int64.
  {
    const long double bound = 4.0e18L;
    const long double mass = static_cast<long double>(net.total_demand()) *
                             (static_cast<long double>(net.horizon()) + 1);
    if (mass * mass * (static_cast<long double>(net.sources().size()) + 1) > bound) {
      v.push_back("total demand too large for exact flow arithmetic");
    }
  }
  if (v.empty()) {
    for (NodeIndex s : net.sources()) {
      try {
        Route r = shortest_route_to_safety(net, s);
        if (r.travel_time > net.horizon()) {
          v.push_back("source '" + net.node(s).id +
                      "' cannot reach any safe node within horizon " +
                      std::to_string(net.horizon()));
        }
      } catch (const NoRouteError&) {
        v.push_back("source '" + net.node(s).id +
                    "' cannot reach any safe node within horizon " +
                    std::to_string(net.horizon()));
      }
    }
  }
  return v;
}

}  // namespace evac
