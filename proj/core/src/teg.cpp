#include "evac/teg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <ostream>

namespace evac {

namespace {

int64_t outlier_bypass_capacity(int64_t total_demand, double p_out) {
  // floor((1 - p) * sum d), with a nudge so exact products like 0.1 * 10
  // do not land just below the integer.
  const double raw = (1.0 - p_out) * static_cast<double>(total_demand);
  return static_cast<int64_t>(std::floor(raw + 1e-9));
}

}  // namespace

TegNodeIndex TimeExpandedGraph::add_node(NodeIndex base, Timestep t, TegNodeTag tag) {
  nodes_.push_back(TegNode{base, t, tag});
  return static_cast<TegNodeIndex>(nodes_.size() - 1);
}

void TimeExpandedGraph::add_edge(TegNodeIndex from, TegNodeIndex to, int64_t capacity,
                                 EdgeIndex base_edge, Timestep t_s) {
  edges_.push_back(TegEdge{from, to, capacity, base_edge, t_s});
}

void TimeExpandedGraph::rebuild_adjacency() {
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (size_t e = 0; e < edges_.size(); ++e) {
    out_[static_cast<size_t>(edges_[e].from)].push_back(static_cast<TegEdgeIndex>(e));
    in_[static_cast<size_t>(edges_[e].to)].push_back(static_cast<TegEdgeIndex>(e));
  }
}

TegNodeIndex TimeExpandedGraph::copy(NodeIndex base, Timestep t) const {
  if (t < 0 || t > horizon_) return -1;
  const size_t n = net_->num_nodes();
  return copy_index_[static_cast<size_t>(t) * n + static_cast<size_t>(base)];
}

TegNodeIndex TimeExpandedGraph::collector(Timestep t) const {
  if (t < 0 || static_cast<size_t>(t) >= collectors_.size()) return -1;
  return collectors_[static_cast<size_t>(t)];
}

TimeExpandedGraph TimeExpandedGraph::expand(std::shared_ptr<const EvacuationNetwork> net,
                                            Timestep horizon) {
  assert(net);
  if (horizon < 1) throw HorizonTooSmallError("horizon must be at least 1");
  TimeExpandedGraph g;
  g.net_ = std::move(net);
  g.variant_ = TegVariant::Average;
  g.horizon_ = horizon;

  const EvacuationNetwork& n = *g.net_;
  const size_t num_base = n.num_nodes();
  g.copy_index_.assign(num_base * (static_cast<size_t>(horizon) + 1), -1);
  // Copies in (t, base) order so node index order matches the
  // deterministic tie-break used by the flow solver.
  for (Timestep t = 0; t <= horizon; ++t) {
    for (NodeIndex b = 0; b < static_cast<NodeIndex>(num_base); ++b) {
      g.copy_index_[static_cast<size_t>(t) * num_base + static_cast<size_t>(b)] =
          g.add_node(b, t, TegNodeTag::Plain);
    }
  }
  g.super_sink_ = g.add_node(-1, horizon, TegNodeTag::SuperSink);

  for (EdgeIndex e = 0; e < static_cast<EdgeIndex>(n.num_edges()); ++e) {
    const Edge& edge = n.edge(e);
    Timestep last_entry = horizon - edge.travel_time;
    if (edge.deadline) last_entry = std::min(last_entry, *edge.deadline);
    for (Timestep t = 0; t <= last_entry; ++t) {
      g.add_edge(g.copy(edge.tail, t), g.copy(edge.head, t + edge.travel_time), edge.capacity,
                 e, t);
    }
  }
  for (Timestep t = 0; t <= horizon; ++t) {
    for (NodeIndex s : n.safe_nodes()) {
      g.add_edge(g.copy(s, t), g.super_sink_, kUnboundedCapacity, -1, t);
    }
  }
  g.rebuild_adjacency();

  // Every source must be able to reach the super sink from its t=0 copy.
  std::vector<char> reaches_sink(g.nodes_.size(), 0);
  std::deque<TegNodeIndex> queue{g.super_sink_};
  reaches_sink[static_cast<size_t>(g.super_sink_)] = 1;
  while (!queue.empty()) {
    const TegNodeIndex v = queue.front();
    queue.pop_front();
    for (TegEdgeIndex e : g.in_edges(v)) {
      const TegNodeIndex u = g.edges_[static_cast<size_t>(e)].from;
      if (!reaches_sink[static_cast<size_t>(u)]) {
        reaches_sink[static_cast<size_t>(u)] = 1;
        queue.push_back(u);
      }
    }
  }
  for (NodeIndex k : n.sources()) {
    if (!reaches_sink[static_cast<size_t>(g.copy(k, 0))]) {
      throw HorizonTooSmallError("source '" + n.node(k).id +
                                 "' cannot reach safety within horizon " +
                                 std::to_string(horizon));
    }
  }
  return g;
}

TimeExpandedGraph TimeExpandedGraph::augment_completion() const {
  if (variant_ != TegVariant::Average) {
    throw Error("augment_completion requires the Average variant");
  }
  TimeExpandedGraph g = *this;
  g.variant_ = TegVariant::CompletionTime;
  // Drop the direct safe -> sink arcs; they are replaced by
  // safe -> z_t -> sink.
  std::vector<TegEdge> kept;
  kept.reserve(g.edges_.size());
  for (const TegEdge& e : g.edges_) {
    if (e.to == g.super_sink_) continue;
    kept.push_back(e);
  }
  g.edges_ = std::move(kept);
  g.collectors_.assign(static_cast<size_t>(horizon_) + 1, -1);
  for (Timestep t = 0; t <= horizon_; ++t) {
    g.collectors_[static_cast<size_t>(t)] = g.add_node(-1, t, TegNodeTag::CompletionCollector);
  }
  for (Timestep t = 0; t <= horizon_; ++t) {
    for (NodeIndex s : net_->safe_nodes()) {
      const TegNodeIndex c = copy(s, t);
      if (c >= 0) g.add_edge(c, g.collectors_[static_cast<size_t>(t)], kUnboundedCapacity, -1, t);
    }
    g.add_edge(g.collectors_[static_cast<size_t>(t)], g.super_sink_, kUnboundedCapacity, -1, t);
  }
  g.rebuild_adjacency();
  return g;
}

TimeExpandedGraph TimeExpandedGraph::augment_outlier(double p_out) const {
  if (variant_ != TegVariant::Average) {
    throw Error("augment_outlier requires the Average variant");
  }
  if (!(p_out > 0.0 && p_out <= 1.0)) throw Error("outlier fraction must be in (0, 1]");
  TimeExpandedGraph g = *this;
  g.variant_ = TegVariant::OutlierAverage;
  g.outlier_fraction_ = p_out;
  g.bypass_ = g.add_node(-1, 0, TegNodeTag::Bypass);
  for (Timestep t = 0; t <= horizon_; ++t) {
    for (NodeIndex s : net_->safe_nodes()) {
      const TegNodeIndex c = copy(s, t);
      if (c >= 0) g.add_edge(c, g.bypass_, kUnboundedCapacity, -1, t);
    }
  }
  g.add_edge(g.bypass_, g.super_sink_, outlier_bypass_capacity(net_->total_demand(), p_out), -1,
             0);
  g.rebuild_adjacency();
  return g;
}

TimeExpandedGraph TimeExpandedGraph::prune() const {
  const size_t n = nodes_.size();
  // Sources may depart at any timestep, so every surviving source copy is
  // a forward root.
  std::vector<char> forward(n, 0);
  std::deque<TegNodeIndex> queue;
  for (size_t v = 0; v < n; ++v) {
    const TegNode& node = nodes_[v];
    if (node.base >= 0 && net_->node(node.base).kind == NodeKind::Source) {
      forward[v] = 1;
      queue.push_back(static_cast<TegNodeIndex>(v));
    }
  }
  while (!queue.empty()) {
    const TegNodeIndex v = queue.front();
    queue.pop_front();
    for (TegEdgeIndex e : out_edges(v)) {
      const TegNodeIndex w = edges_[static_cast<size_t>(e)].to;
      if (!forward[static_cast<size_t>(w)]) {
        forward[static_cast<size_t>(w)] = 1;
        queue.push_back(w);
      }
    }
  }
  std::vector<char> backward(n, 0);
  if (super_sink_ >= 0) {
    backward[static_cast<size_t>(super_sink_)] = 1;
    queue.push_back(super_sink_);
    while (!queue.empty()) {
      const TegNodeIndex v = queue.front();
      queue.pop_front();
      for (TegEdgeIndex e : in_edges(v)) {
        const TegNodeIndex u = edges_[static_cast<size_t>(e)].from;
        if (!backward[static_cast<size_t>(u)]) {
          backward[static_cast<size_t>(u)] = 1;
          queue.push_back(u);
        }
      }
    }
  }

  std::vector<TegNodeIndex> remap(n, -1);
  TimeExpandedGraph g;
  g.net_ = net_;
  g.variant_ = variant_;
  g.horizon_ = horizon_;
  g.outlier_fraction_ = outlier_fraction_;
  g.pruned_ = true;
  g.copy_index_.assign(copy_index_.size(), -1);
  if (!collectors_.empty()) g.collectors_.assign(collectors_.size(), -1);
  for (size_t v = 0; v < n; ++v) {
    if (!forward[v] || !backward[v]) continue;
    const TegNode& node = nodes_[v];
    remap[v] = g.add_node(node.base, node.t, node.tag);
    switch (node.tag) {
      case TegNodeTag::Plain:
        g.copy_index_[static_cast<size_t>(node.t) * net_->num_nodes() +
                      static_cast<size_t>(node.base)] = remap[v];
        break;
      case TegNodeTag::SuperSink: g.super_sink_ = remap[v]; break;
      case TegNodeTag::CompletionCollector:
        g.collectors_[static_cast<size_t>(node.t)] = remap[v];
        break;
      case TegNodeTag::Bypass: g.bypass_ = remap[v]; break;
    }
  }
  for (NodeIndex k : net_->sources()) {
    const TegNodeIndex c = copy(k, 0);
    if (c < 0 || remap[static_cast<size_t>(c)] < 0) {
      throw InfeasibleAfterPruneError("pruning removed source copy ('" + net_->node(k).id +
                                      "', 0); no feasible plan exists");
    }
  }
  for (const TegEdge& e : edges_) {
    const TegNodeIndex from = remap[static_cast<size_t>(e.from)];
    const TegNodeIndex to = remap[static_cast<size_t>(e.to)];
    if (from >= 0 && to >= 0) g.add_edge(from, to, e.capacity, e.base_edge, e.t_s);
  }
  g.rebuild_adjacency();
  return g;
}

TimeExpandedGraph TimeExpandedGraph::truncate_horizon(Timestep new_horizon) const {
  if (new_horizon > horizon_) throw Error("truncate_horizon cannot grow the horizon");
  try {
    TimeExpandedGraph g = expand(net_, new_horizon);
    switch (variant_) {
      case TegVariant::Average: break;
      case TegVariant::CompletionTime: g = g.augment_completion(); break;
      case TegVariant::OutlierAverage: g = g.augment_outlier(outlier_fraction_); break;
    }
    return g.prune();
  } catch (const HorizonTooSmallError& e) {
    throw InfeasibleAfterPruneError(e.what());
  }
}

void TimeExpandedGraph::dump_csv(std::ostream& os) const {
  auto name = [&](TegNodeIndex v) -> std::string {
    const TegNode& node = nodes_[static_cast<size_t>(v)];
    switch (node.tag) {
      case TegNodeTag::Plain: return net_->node(node.base).id;
      case TegNodeTag::SuperSink: return "@sink";
      case TegNodeTag::CompletionCollector: return "@z";
      case TegNodeTag::Bypass: return "@bypass";
    }
    return "?";
  };
  os << "from_base,from_t,to_base,to_t,capacity,t_s\n";
  for (const TegEdge& e : edges_) {
    os << name(e.from) << ',' << nodes_[static_cast<size_t>(e.from)].t << ',' << name(e.to)
       << ',' << nodes_[static_cast<size_t>(e.to)].t << ',';
    if (e.capacity == kUnboundedCapacity) {
      os << "inf";
    } else {
      os << e.capacity;
    }
    os << ',' << e.t_s << '\n';
  }
}

TimeExpandedGraph build_variant_teg(std::shared_ptr<const EvacuationNetwork> net,
                                    std::optional<Timestep> horizon) {
  const Timestep h = horizon.value_or(net->horizon());
  TimeExpandedGraph g = TimeExpandedGraph::expand(net, h);
  switch (net->objective().kind) {
    case ObjectiveKind::Average: return g;
    case ObjectiveKind::CompletionTime: return g.augment_completion();
    case ObjectiveKind::OutlierAverage: return g.augment_outlier(net->objective().fraction);
  }
  return g;
}

}  // namespace evac
