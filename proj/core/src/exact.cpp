#include "evac/exact.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

namespace evac {

namespace {

constexpr int32_t kFree = -1;
constexpr int32_t kClosed = -2;
constexpr int64_t kNoBound = std::numeric_limits<int64_t>::max();

using Clock = std::chrono::steady_clock;

struct Relaxation {
  bool feasible = false;
  int64_t bound = 0;
  std::vector<int64_t> static_edge_flow;  // aggregated over copies
};

std::vector<char> usable_mask(const EvacuationNetwork& net, const std::vector<int32_t>& choice) {
  std::vector<char> usable(net.num_edges(), 0);
  for (size_t e = 0; e < net.num_edges(); ++e) {
    const int32_t c = choice[static_cast<size_t>(net.edge(static_cast<EdgeIndex>(e)).tail)];
    if (c == kFree || c == static_cast<int32_t>(e)) usable[e] = 1;
  }
  return usable;
}

// Confluence-relaxed lower bound plus the relaxed flow aggregated per
// static edge (used for leaf detection and branching).
Relaxation relax(const TimeExpandedGraph& teg, const std::vector<int32_t>& choice) {
  const EvacuationNetwork& net = teg.network();
  const std::vector<char> usable = usable_mask(net, choice);
  Relaxation rel;
  rel.static_edge_flow.assign(net.num_edges(), 0);
  if (net.total_demand() == 0) {
    rel.feasible = true;
    return rel;
  }
  try {
    if (teg.variant() == TegVariant::CompletionTime) {
      const auto t = min_feasible_completion(teg, usable);
      if (!t) return rel;
      rel.bound = *t;
      // Witness flow with all arrivals within the optimal deadline, for
      // structure analysis; realized on the truncated graph.
      const TimeExpandedGraph trunc = teg.truncate_horizon(std::max<Timestep>(*t, 1));
      const auto flow = min_cost_dynamic_flow(trunc, usable);
      for (size_t e = 0; e < trunc.edges().size(); ++e) {
        const EdgeIndex base = trunc.edges()[e].base_edge;
        if (base >= 0) rel.static_edge_flow[static_cast<size_t>(base)] += flow.edge_flow[e];
      }
    } else {
      const auto flow = min_cost_dynamic_flow(teg, usable);
      rel.bound = flow.cost;
      for (size_t e = 0; e < teg.edges().size(); ++e) {
        const EdgeIndex base = teg.edges()[e].base_edge;
        if (base >= 0) rel.static_edge_flow[static_cast<size_t>(base)] += flow.edge_flow[e];
      }
    }
  } catch (const InfeasibleError&) {
    return rel;
  } catch (const InfeasibleAfterPruneError&) {
    return rel;
  }
  rel.feasible = true;
  return rel;
}

struct SplitNode {
  NodeIndex node = -1;
  int64_t slack = 0;
  std::vector<EdgeIndex> used;  // flow-carrying outgoing static edges
};

// Free node whose relaxed flow leaves through two or more static edges;
// smallest rerouting slack first, ties by node index.
std::optional<SplitNode> pick_branch_node(const EvacuationNetwork& net,
                                          const std::vector<int32_t>& choice,
                                          const std::vector<int64_t>& static_edge_flow) {
  std::optional<SplitNode> best;
  for (size_t v = 0; v < net.num_nodes(); ++v) {
    if (choice[v] != kFree) continue;
    SplitNode cand;
    cand.node = static_cast<NodeIndex>(v);
    int64_t total = 0;
    int64_t largest = 0;
    for (EdgeIndex e : net.out_edges(static_cast<NodeIndex>(v))) {
      const int64_t f = static_edge_flow[static_cast<size_t>(e)];
      if (f <= 0) continue;
      cand.used.push_back(e);
      total += f;
      largest = std::max(largest, f);
    }
    if (cand.used.size() < 2) continue;
    cand.slack = total - largest;
    if (!best || cand.slack < best->slack ||
        (cand.slack == best->slack && cand.node < best->node)) {
      best = std::move(cand);
    }
  }
  return best;
}

// Completes a confluent relaxed solution into a full RouteSet: explicit
// choices, then flow-defined successors, then shortest constrained routes
// for demandless sources that carry no flow.
std::optional<RouteSet> leaf_routes(const EvacuationNetwork& net,
                                    const std::vector<int32_t>& choice,
                                    const std::vector<int64_t>& static_edge_flow) {
  RouteSet routes;
  for (size_t v = 0; v < net.num_nodes(); ++v) {
    if (choice[v] >= 0) routes.successor[static_cast<NodeIndex>(v)] = choice[v];
  }
  for (size_t v = 0; v < net.num_nodes(); ++v) {
    if (choice[v] != kFree) continue;
    for (EdgeIndex e : net.out_edges(static_cast<NodeIndex>(v))) {
      if (static_edge_flow[static_cast<size_t>(e)] > 0) {
        routes.successor[static_cast<NodeIndex>(v)] = e;
        break;  // confluent: at most one carries flow
      }
    }
  }
  for (NodeIndex k : net.sources()) {
    if (routes.successor.count(k)) continue;
    const auto fill = shortest_route_constrained(net, k, routes.successor);
    if (!fill) return std::nullopt;
    for (size_t i = 0; i + 1 < fill->nodes.size(); ++i) {
      routes.successor.emplace(fill->nodes[i], fill->edges[i]);
    }
  }
  return routes;
}

struct ObjectiveScale {
  ObjectiveKind kind = ObjectiveKind::Average;
  int64_t denominator = 1;
};

ObjectiveScale objective_scale(const TimeExpandedGraph& teg) {
  const int64_t demand = teg.network().total_demand();
  switch (teg.variant()) {
    case TegVariant::Average: return {ObjectiveKind::Average, std::max<int64_t>(demand, 1)};
    case TegVariant::CompletionTime: return {ObjectiveKind::CompletionTime, 1};
    case TegVariant::OutlierAverage: {
      int64_t bypass_cap = 0;
      if (teg.bypass() >= 0) {
        for (TegEdgeIndex e : teg.out_edges(teg.bypass())) {
          if (teg.edge(e).to == teg.super_sink()) bypass_cap = teg.edge(e).capacity;
        }
      }
      return {ObjectiveKind::OutlierAverage, std::max<int64_t>(demand - bypass_cap, 1)};
    }
  }
  return {};
}

double int_gap(int64_t upper, int64_t lower) {
  if (upper == kNoBound) return 1.0;
  if (upper <= 0) return upper == lower ? 0.0 : 1.0;
  return static_cast<double>(upper - lower) / static_cast<double>(upper);
}

struct SearchNode {
  std::vector<int32_t> choice;
  int64_t bound = 0;
  std::vector<int64_t> static_edge_flow;
};

// Shared search context. The incumbent value is atomic so parallel
// workers can prune against it; the plan itself sits behind the mutex.
struct SearchContext {
  const TimeExpandedGraph& teg;
  const EvacuationNetwork& net;
  SolveLimits limits;
  Clock::time_point started;

  std::atomic<int64_t> incumbent_value{kNoBound};
  std::mutex mutex;
  std::optional<EvacuationPlan> incumbent_plan;
  std::optional<ObjectiveValue> incumbent_objective;
  std::atomic<int64_t> nodes_explored{0};
  std::atomic<bool> stop{false};
  int64_t root_bound = 0;
  std::vector<BoundTracePoint> trace;

  explicit SearchContext(const TimeExpandedGraph& t, const SolveLimits& l)
      : teg(t), net(t.network()), limits(l), started(Clock::now()) {}

  bool timed_out() {
    if (!limits.time_limit) return false;
    if (Clock::now() - started >= *limits.time_limit) {
      stop.store(true, std::memory_order_relaxed);
      return true;
    }
    return false;
  }

  int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
  }

  void record_trace(int64_t lower, const ObjectiveScale& scale) {
    const int64_t upper = incumbent_value.load(std::memory_order_relaxed);
    BoundTracePoint p;
    p.wall_ms = elapsed_ms();
    p.upper_bound = upper == kNoBound
                        ? std::numeric_limits<double>::infinity()
                        : static_cast<double>(upper) / static_cast<double>(scale.denominator);
    p.lower_bound = static_cast<double>(lower) / static_cast<double>(scale.denominator);
    p.gap = int_gap(upper, lower);
    trace.push_back(p);
  }
};

// Evaluates a confluent relaxed solution as an incumbent candidate.
void try_leaf(SearchContext& ctx, const SearchNode& node) {
  const auto routes = leaf_routes(ctx.net, node.choice, node.static_edge_flow);
  if (!routes) return;
  ScheduleResult sched;
  try {
    sched = schedule_fixed_routes(ctx.teg, *routes);
  } catch (const InfeasibleError&) {
    return;
  }
  const int64_t value = sched.objective.numerator;
  std::lock_guard<std::mutex> lock(ctx.mutex);
  if (value < ctx.incumbent_value.load(std::memory_order_relaxed)) {
    ctx.incumbent_value.store(value, std::memory_order_relaxed);
    ctx.incumbent_plan = EvacuationPlan{*routes, sched.schedule};
    ctx.incumbent_objective = sched.objective;
    ctx.record_trace(ctx.root_bound, objective_scale(ctx.teg));
  }
}

// Children of a split node in exploration order: flow-heavy edges first
// (ties by edge index), then the close-the-node child for transits.
std::vector<int32_t> child_choices(const EvacuationNetwork& net, const SearchNode& node,
                                   const SplitNode& split) {
  std::vector<EdgeIndex> edges(net.out_edges(split.node).begin(),
                               net.out_edges(split.node).end());
  std::stable_sort(edges.begin(), edges.end(), [&](EdgeIndex a, EdgeIndex b) {
    return node.static_edge_flow[static_cast<size_t>(a)] >
           node.static_edge_flow[static_cast<size_t>(b)];
  });
  std::vector<int32_t> out(edges.begin(), edges.end());
  if (net.node(split.node).kind == NodeKind::Transit) out.push_back(kClosed);
  return out;
}

// Depth-first loop over one subtree. Returns the subtree's remaining
// lower bound when stopped early (kNoBound when fully explored).
int64_t dfs(SearchContext& ctx, SearchNode root) {
  std::vector<SearchNode> stack;
  stack.push_back(std::move(root));
  while (!stack.empty()) {
    if (ctx.stop.load(std::memory_order_relaxed) || ctx.timed_out()) {
      int64_t remaining = kNoBound;
      for (const SearchNode& n : stack) remaining = std::min(remaining, n.bound);
      return remaining;
    }
    SearchNode node = std::move(stack.back());
    stack.pop_back();
    ctx.nodes_explored.fetch_add(1, std::memory_order_relaxed);
    if (node.bound >= ctx.incumbent_value.load(std::memory_order_relaxed)) continue;

    const auto split = pick_branch_node(ctx.net, node.choice, node.static_edge_flow);
    if (!split) {
      try_leaf(ctx, node);
      continue;
    }
    std::vector<SearchNode> children;
    for (const int32_t choice : child_choices(ctx.net, node, *split)) {
      SearchNode child;
      child.choice = node.choice;
      child.choice[static_cast<size_t>(split->node)] = choice;
      Relaxation rel = relax(ctx.teg, child.choice);
      if (!rel.feasible) continue;
      if (rel.bound >= ctx.incumbent_value.load(std::memory_order_relaxed)) continue;
      child.bound = rel.bound;
      child.static_edge_flow = std::move(rel.static_edge_flow);
      children.push_back(std::move(child));
    }
    // Push in reverse so the preferred child is explored first.
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      stack.push_back(std::move(*it));
    }

    // Early stop on gap: the best open bound is a valid global lower bound
    // for this (single-subtree) search.
    if (ctx.limits.workers <= 1 && ctx.limits.threshold_gap > 0 &&
        ctx.incumbent_value.load(std::memory_order_relaxed) != kNoBound) {
      int64_t open = kNoBound;
      for (const SearchNode& n : stack) open = std::min(open, n.bound);
      const int64_t upper = ctx.incumbent_value.load(std::memory_order_relaxed);
      const int64_t lower = std::min(open, upper);
      if (int_gap(upper, lower) <= ctx.limits.threshold_gap) return lower;
    }
  }
  return kNoBound;
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::GapReached: return "gap_reached";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

SolveReport solve(const TimeExpandedGraph& teg, const RouteSet& fixed_routes,
                  const SolveLimits& limits) {
  const EvacuationNetwork& net = teg.network();
  SearchContext ctx(teg, limits);
  const ObjectiveScale scale = objective_scale(teg);

  SearchNode root;
  root.choice.assign(net.num_nodes(), kFree);
  for (const auto& [v, e] : fixed_routes.successor) {
    if (e < 0 || static_cast<size_t>(e) >= net.num_edges() || net.edge(e).tail != v) {
      throw Error("fixed route successor of '" + net.node(v).id + "' is not an outgoing edge");
    }
    root.choice[static_cast<size_t>(v)] = e;
  }

  SolveReport report;
  Relaxation rel = relax(teg, root.choice);
  if (!rel.feasible) {
    report.status = SolveStatus::Infeasible;
    report.upper_bound = std::numeric_limits<double>::infinity();
    report.lower_bound = std::numeric_limits<double>::infinity();
    report.gap = 0.0;
    report.nodes_explored = 1;
    return report;
  }
  const int64_t root_bound = rel.bound;
  ctx.root_bound = root_bound;
  root.bound = rel.bound;
  root.static_edge_flow = std::move(rel.static_edge_flow);

  int64_t final_lower = kNoBound;
  bool stopped_early = false;

  if (limits.workers <= 1) {
    const int64_t remaining = dfs(ctx, std::move(root));
    stopped_early = remaining != kNoBound || ctx.stop.load();
    final_lower = remaining;
  } else {
    // Seed one task per root child (root itself when it is a leaf), then
    // let workers drain the list. Values match the sequential search;
    // nodes_explored may differ.
    std::vector<SearchNode> tasks;
    const auto split = pick_branch_node(net, root.choice, root.static_edge_flow);
    if (!split) {
      tasks.push_back(std::move(root));
    } else {
      for (const int32_t choice : child_choices(net, root, *split)) {
        SearchNode child;
        child.choice = root.choice;
        child.choice[static_cast<size_t>(split->node)] = choice;
        Relaxation crel = relax(teg, child.choice);
        if (!crel.feasible) continue;
        child.bound = crel.bound;
        child.static_edge_flow = std::move(crel.static_edge_flow);
        tasks.push_back(std::move(child));
      }
      ctx.nodes_explored.fetch_add(1);
    }
    std::atomic<size_t> next{0};
    std::vector<int64_t> task_remaining(tasks.size(), kNoBound);
    auto worker = [&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        task_remaining[i] = dfs(ctx, std::move(tasks[i]));
      }
    };
    std::vector<std::thread> threads;
    const int n_threads = std::max(1, limits.workers);
    threads.reserve(static_cast<size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    for (const int64_t r : task_remaining) final_lower = std::min(final_lower, r);
    stopped_early = final_lower != kNoBound || ctx.stop.load();
  }

  report.nodes_explored = ctx.nodes_explored.load();
  const int64_t upper = ctx.incumbent_value.load();
  int64_t lower;
  if (!stopped_early) {
    lower = upper == kNoBound ? root_bound : upper;
  } else {
    lower = std::min(final_lower == kNoBound ? root_bound : final_lower,
                     upper == kNoBound ? kNoBound : upper);
    lower = std::max(lower, root_bound);
  }

  if (upper == kNoBound) {
    if (stopped_early) {
      report.status = SolveStatus::TimeLimit;
      report.upper_bound = std::numeric_limits<double>::infinity();
      report.lower_bound = static_cast<double>(lower) / static_cast<double>(scale.denominator);
      report.gap = 1.0;
    } else {
      report.status = SolveStatus::Infeasible;
      report.upper_bound = std::numeric_limits<double>::infinity();
      report.lower_bound = std::numeric_limits<double>::infinity();
      report.gap = 0.0;
    }
    return report;
  }

  {
    std::lock_guard<std::mutex> lock(ctx.mutex);
    report.best_plan = ctx.incumbent_plan;
    report.objective = ctx.incumbent_objective;
  }
  report.upper_bound = static_cast<double>(upper) / static_cast<double>(scale.denominator);
  report.lower_bound = static_cast<double>(lower) / static_cast<double>(scale.denominator);
  report.gap = int_gap(upper, lower);
  if (!stopped_early) {
    report.status = SolveStatus::Optimal;
  } else if (ctx.stop.load()) {
    report.status = SolveStatus::TimeLimit;
  } else {
    report.status = SolveStatus::GapReached;
  }
  ctx.record_trace(lower, scale);
  report.trace = std::move(ctx.trace);
  return report;
}

std::vector<RouteSet> enumerate_confluent_routings(const EvacuationNetwork& net, int64_t cap) {
  long double product = 1.0;
  for (size_t v = 0; v < net.num_nodes(); ++v) {
    const Node& node = net.node(static_cast<NodeIndex>(v));
    if (node.kind == NodeKind::Safe) continue;
    const size_t deg = net.out_edges(static_cast<NodeIndex>(v)).size();
    product *= static_cast<long double>(std::max<size_t>(deg, 1));
    if (product > static_cast<long double>(cap)) {
      throw CapExceededError("out-degree product exceeds routing cap " + std::to_string(cap));
    }
  }

  std::vector<RouteSet> out;
  std::map<NodeIndex, EdgeIndex> assigned;
  std::set<NodeIndex> active;  // reachable, unassigned, non-safe
  for (NodeIndex k : net.sources()) active.insert(k);

  // Walks assigned successors from `start`; true if the chain reaches
  // `target` (used to reject cycle-creating assignments).
  auto reaches = [&](NodeIndex start, NodeIndex target) {
    NodeIndex cur = start;
    while (true) {
      if (cur == target) return true;
      auto it = assigned.find(cur);
      if (it == assigned.end()) return false;
      cur = net.edge(it->second).head;
    }
  };

  std::function<void()> recurse = [&] {
    if (static_cast<int64_t>(out.size()) > cap) {
      throw CapExceededError("enumerated routings exceed cap " + std::to_string(cap));
    }
    if (active.empty()) {
      out.push_back(RouteSet{assigned});
      return;
    }
    const NodeIndex v = *active.begin();
    active.erase(active.begin());
    for (EdgeIndex e : net.out_edges(v)) {
      const NodeIndex head = net.edge(e).head;
      if (reaches(head, v)) continue;  // would close a successor cycle
      assigned[v] = e;
      const bool new_active = net.node(head).kind != NodeKind::Safe && !assigned.count(head) &&
                              !active.count(head);
      if (new_active) active.insert(head);
      recurse();
      if (new_active) active.erase(head);
      assigned.erase(v);
    }
    active.insert(v);
  };
  recurse();
  return out;
}

}  // namespace evac
