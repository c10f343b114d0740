#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evac/errors.hpp"

namespace evac {

using NodeIndex = int32_t;
using EdgeIndex = int32_t;
using Timestep = int32_t;

enum class NodeKind { Source, Transit, Safe };

enum class ObjectiveKind { Average, CompletionTime, OutlierAverage };

/// Which scalar a plan is optimized for. `fraction` is the kept fraction
/// p of evacuees for OutlierAverage and ignored otherwise.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::Average;
  double fraction = 1.0;

  static ObjectiveSpec average() { return {ObjectiveKind::Average, 1.0}; }
  static ObjectiveSpec completion() { return {ObjectiveKind::CompletionTime, 1.0}; }
  static ObjectiveSpec outlier(double fraction) { return {ObjectiveKind::OutlierAverage, fraction}; }
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Transit;
  int64_t demand = 0;
};

/// Directed road edge. Capacity bounds how many vehicles may enter per
/// timestep; an optional deadline is the last timestep at which entry is
/// still allowed (timed road failure).
struct Edge {
  NodeIndex tail = -1;
  NodeIndex head = -1;
  Timestep travel_time = 1;
  int64_t capacity = 0;
  std::optional<Timestep> deadline;
};

/// Static capacitated road graph with a source/transit/safe partition,
/// per-source demand, an evacuation horizon and a target objective.
/// Immutable after construction; all operations on it are pure.
class EvacuationNetwork {
 public:
  EvacuationNetwork(std::vector<Node> nodes, std::vector<Edge> edges,
                    Timestep horizon, ObjectiveSpec objective,
                    std::string metadata_json = "");

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Timestep horizon() const { return horizon_; }
  const ObjectiveSpec& objective() const { return objective_; }

  /// Free-form JSON text round-tripped through instance files (used by the
  /// gadget generators to record M, k and clip flags). Empty = absent.
  const std::string& metadata_json() const { return metadata_json_; }

  const Node& node(NodeIndex v) const { return nodes_[static_cast<size_t>(v)]; }
  const Edge& edge(EdgeIndex e) const { return edges_[static_cast<size_t>(e)]; }
  size_t num_nodes() const { return nodes_.size(); }
  size_t num_edges() const { return edges_.size(); }

  std::optional<NodeIndex> find_node(const std::string& id) const;
  std::span<const EdgeIndex> out_edges(NodeIndex v) const { return out_[static_cast<size_t>(v)]; }
  std::span<const EdgeIndex> in_edges(NodeIndex v) const { return in_[static_cast<size_t>(v)]; }

  /// Source node indices in node-list order.
  const std::vector<NodeIndex>& sources() const { return sources_; }
  const std::vector<NodeIndex>& safe_nodes() const { return safes_; }
  int64_t total_demand() const { return total_demand_; }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  Timestep horizon_;
  ObjectiveSpec objective_;
  std::string metadata_json_;
  std::vector<std::vector<EdgeIndex>> out_;
  std::vector<std::vector<EdgeIndex>> in_;
  std::vector<NodeIndex> sources_;
  std::vector<NodeIndex> safes_;
  std::map<std::string, NodeIndex> by_id_;
  int64_t total_demand_ = 0;
};

/// Incremental construction helper; resolves string ids to indices.
class NetworkBuilder {
 public:
  NetworkBuilder& node(std::string id, NodeKind kind, int64_t demand = 0);
  NetworkBuilder& edge(const std::string& tail, const std::string& head,
                       Timestep travel_time, int64_t capacity,
                       std::optional<Timestep> deadline = std::nullopt);
  NetworkBuilder& horizon(Timestep h) { horizon_ = h; return *this; }
  NetworkBuilder& objective(ObjectiveSpec o) { objective_ = o; return *this; }
  NetworkBuilder& metadata(std::string json_text) { metadata_ = std::move(json_text); return *this; }
  EvacuationNetwork build() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<std::string, NodeIndex> by_id_;
  Timestep horizon_ = 1;
  ObjectiveSpec objective_ = ObjectiveSpec::average();
  std::string metadata_;
};

/// Returns every invariant violation (empty = valid instance). Violations
/// are data, not failures; each message names the offending node or edge.
std::vector<std::string> validate(const EvacuationNetwork& net);

/// A source-to-safety path with its travel-time length.
struct Route {
  std::vector<NodeIndex> nodes;
  std::vector<EdgeIndex> edges;
  int64_t travel_time = 0;
};

/// Travel-time-shortest path from `source` to its nearest safe node.
/// Ties are broken by edge count, then by the lexicographically smallest
/// node-id sequence. Throws NoRouteError if safety is unreachable.
Route shortest_route_to_safety(const EvacuationNetwork& net, NodeIndex source);

/// As above but nodes with an entry in `fixed_successor` (node -> edge)
/// must be left through that edge. Returns nullopt when no such path exists.
std::optional<Route> shortest_route_constrained(
    const EvacuationNetwork& net, NodeIndex source,
    const std::map<NodeIndex, EdgeIndex>& fixed_successor);

}  // namespace evac
