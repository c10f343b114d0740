#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "evac/network.hpp"

namespace evac {

enum class TegVariant { Average, CompletionTime, OutlierAverage };

enum class TegNodeTag : uint8_t { Plain, SuperSink, CompletionCollector, Bypass };

using TegNodeIndex = int32_t;
using TegEdgeIndex = int32_t;

/// Sentinel for edges whose capacity is unconstrained (super-sink arcs).
inline constexpr int64_t kUnboundedCapacity = std::numeric_limits<int64_t>::max();

struct TegNode {
  NodeIndex base = -1;  // -1 for sink / collector / bypass nodes
  Timestep t = 0;
  TegNodeTag tag = TegNodeTag::Plain;
};

struct TegEdge {
  TegNodeIndex from = -1;
  TegNodeIndex to = -1;
  int64_t capacity = 0;
  EdgeIndex base_edge = -1;  // static edge this copy realizes, -1 otherwise
  Timestep t_s = 0;          // timestep of the starting node
};

/// Horizon-indexed copy graph hosting all flow variables. Copies of a
/// static edge run (u,t) -> (v,t+T_e) for t+T_e <= H, restricted to
/// t <= deadline when the edge has one. Arcs entering the super sink carry
/// the arrival cost t_s. Instances are immutable; augment/prune/truncate
/// return new graphs.
class TimeExpandedGraph {
 public:
  /// Builds the Average-variant TEG: one copy of every node per timestep
  /// plus a super sink fed by every safe-node copy. Throws
  /// HorizonTooSmallError if some source cannot reach safety within H.
  static TimeExpandedGraph expand(std::shared_ptr<const EvacuationNetwork> net, Timestep horizon);

  /// Reroutes safe copies through per-timestep collector nodes z_t so the
  /// latest used sink arc witnesses the completion time. Requires the
  /// Average variant.
  TimeExpandedGraph augment_completion() const;

  /// Adds the bypass node: every safe copy may route flow to it at zero
  /// arrival cost, and its sink arc is capped at floor((1-p_out) * sum d),
  /// the number of excludable outliers. Requires the Average variant.
  TimeExpandedGraph augment_outlier(double p_out) const;

  /// Drops nodes unreachable from the source copies or unable to reach the
  /// super sink, with their incident edges. Idempotent. Throws
  /// InfeasibleAfterPruneError if a source copy (k, 0) would be removed.
  TimeExpandedGraph prune() const;

  /// Removes all nodes with t > new_horizon (re-applying the variant's
  /// augmentation rules) and prunes.
  TimeExpandedGraph truncate_horizon(Timestep new_horizon) const;

  const EvacuationNetwork& network() const { return *net_; }
  std::shared_ptr<const EvacuationNetwork> network_ptr() const { return net_; }
  TegVariant variant() const { return variant_; }
  Timestep horizon() const { return horizon_; }
  double outlier_fraction() const { return outlier_fraction_; }
  bool pruned() const { return pruned_; }

  const std::vector<TegNode>& nodes() const { return nodes_; }
  const std::vector<TegEdge>& edges() const { return edges_; }
  const TegNode& node(TegNodeIndex v) const { return nodes_[static_cast<size_t>(v)]; }
  const TegEdge& edge(TegEdgeIndex e) const { return edges_[static_cast<size_t>(e)]; }

  /// Index of copy (base, t), or -1 if pruned away / out of range.
  TegNodeIndex copy(NodeIndex base, Timestep t) const;
  TegNodeIndex super_sink() const { return super_sink_; }
  TegNodeIndex bypass() const { return bypass_; }
  TegNodeIndex collector(Timestep t) const;

  std::span<const TegEdgeIndex> out_edges(TegNodeIndex v) const { return out_[static_cast<size_t>(v)]; }
  std::span<const TegEdgeIndex> in_edges(TegNodeIndex v) const { return in_[static_cast<size_t>(v)]; }

  /// Debug dump: from_base,from_t,to_base,to_t,capacity,t_s per edge.
  void dump_csv(std::ostream& os) const;

 private:
  TimeExpandedGraph() = default;
  void rebuild_adjacency();
  TegNodeIndex add_node(NodeIndex base, Timestep t, TegNodeTag tag);
  void add_edge(TegNodeIndex from, TegNodeIndex to, int64_t capacity, EdgeIndex base_edge,
                Timestep t_s);

  std::shared_ptr<const EvacuationNetwork> net_;
  TegVariant variant_ = TegVariant::Average;
  Timestep horizon_ = 0;
  double outlier_fraction_ = 1.0;
  bool pruned_ = false;

  std::vector<TegNode> nodes_;
  std::vector<TegEdge> edges_;
  std::vector<TegNodeIndex> copy_index_;  // (t * |N| + base) -> node or -1
  std::vector<TegNodeIndex> collectors_;  // per t, or empty
  TegNodeIndex super_sink_ = -1;
  TegNodeIndex bypass_ = -1;
  std::vector<std::vector<TegEdgeIndex>> out_;
  std::vector<std::vector<TegEdgeIndex>> in_;
};

/// expand() plus the augmentation matching the network's objective.
TimeExpandedGraph build_variant_teg(std::shared_ptr<const EvacuationNetwork> net,
                                    std::optional<Timestep> horizon = std::nullopt);

}  // namespace evac
