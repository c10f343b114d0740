#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evac/exact.hpp"
#include "evac/generators.hpp"
#include "evac/schedule.hpp"
#include "test_util.hpp"

using namespace evac;
using evac::testing::brute_force_schedule;

namespace {

std::shared_ptr<const EvacuationNetwork> shared(const EvacuationNetwork& net) {
  return std::make_shared<EvacuationNetwork>(net);
}

RouteSet sample_routes(const EvacuationNetwork& net) {
  RouteSet routes;
  routes.successor[*net.find_node("0")] = 0;  // (0,2)
  routes.successor[*net.find_node("1")] = 1;  // (1,2)
  routes.successor[*net.find_node("2")] = 2;  // (2,A)
  return routes;
}

}  // namespace

TEST_CASE("sample network: canonical optimal schedule") {
  const auto net = shared(sample_network());
  const auto teg = TimeExpandedGraph::expand(net, 3);
  const auto routes = sample_routes(*net);
  const ScheduleResult r = schedule_fixed_routes(teg, routes);

  // Average (2 + 3) / 2 = 2.5 under 0-based arrival cost.
  CHECK(r.objective.kind == ObjectiveKind::Average);
  CHECK(r.objective.numerator == 5);
  CHECK(r.objective.denominator == 2);
  CHECK(r.objective.value() == doctest::Approx(2.5));

  // Source 1 leaves at t=0 and source 0 at t=1.
  const NodeIndex s0 = *net->find_node("0");
  const NodeIndex s1 = *net->find_node("1");
  REQUIRE(r.schedule.departures.size() == 2);
  CHECK(r.schedule.departures.at({s0, 1}) == 1);
  CHECK(r.schedule.departures.at({s1, 0}) == 1);

  // Brute force over all departure assignments agrees.
  const auto brute = brute_force_schedule(*net, routes, TegVariant::Average);
  REQUIRE(brute.feasible);
  CHECK(brute.best == 5);
}

TEST_CASE("single wide route: everyone departs at t=0") {
  NetworkBuilder b;
  b.node("s", NodeKind::Source, 5);
  b.node("m", NodeKind::Transit);
  b.node("f", NodeKind::Safe);
  b.edge("s", "m", 1, 5);
  b.edge("m", "f", 1, 5);
  b.horizon(4);
  const auto net = shared(b.build());
  const auto teg = TimeExpandedGraph::expand(net, 4);
  RouteSet routes;
  routes.successor[0] = 0;
  routes.successor[1] = 1;
  const ScheduleResult r = schedule_fixed_routes(teg, routes);
  CHECK(r.schedule.departures.size() == 1);
  CHECK(r.schedule.departures.at({0, 0}) == 5);
  CHECK(r.objective.numerator == 10);  // five arrivals at t=2

  const auto ct = schedule_fixed_routes(teg.augment_completion(), routes);
  CHECK(ct.objective.kind == ObjectiveKind::CompletionTime);
  CHECK(ct.objective.numerator == 2);
}

TEST_CASE("merge interleaving matches exhaustive enumeration") {
  // Two sources share a capacity-1 merge edge, demands 2/2.
  NetworkBuilder b;
  b.node("s0", NodeKind::Source, 2);
  b.node("s1", NodeKind::Source, 2);
  b.node("m", NodeKind::Transit);
  b.node("f", NodeKind::Safe);
  b.edge("s0", "m", 1, 2);
  b.edge("s1", "m", 1, 2);
  b.edge("m", "f", 1, 1);
  b.horizon(6);
  const auto net = shared(b.build());
  RouteSet routes;
  routes.successor[0] = 0;
  routes.successor[1] = 1;
  routes.successor[2] = 2;

  for (TegVariant variant : {TegVariant::Average, TegVariant::CompletionTime}) {
    auto teg = TimeExpandedGraph::expand(net, 6);
    if (variant == TegVariant::CompletionTime) teg = teg.augment_completion();
    const ScheduleResult r = schedule_fixed_routes(teg, routes);
    const auto brute = brute_force_schedule(*net, routes, variant);
    REQUIRE(brute.feasible);
    CHECK(r.objective.numerator == brute.best);
  }
}

TEST_CASE("min_cost_dynamic_flow: relaxed cost on the sample equals 5") {
  const auto net = shared(sample_network());
  const auto teg = TimeExpandedGraph::expand(net, 3);
  const std::vector<char> all(net->num_edges(), 1);
  const auto flow = min_cost_dynamic_flow(teg, all);
  CHECK(flow.flow == 2);
  CHECK(flow.cost == 5);  // confluence is not binding here

  // Route-restricted filter reproduces schedule_fixed_routes cost.
  std::vector<char> restricted(net->num_edges(), 0);
  for (const auto& [v, e] : sample_routes(*net).successor) {
    restricted[static_cast<size_t>(e)] = 1;
  }
  const auto flow2 = min_cost_dynamic_flow(teg, restricted);
  CHECK(flow2.cost == schedule_fixed_routes(teg, sample_routes(*net)).objective.numerator);
}

TEST_CASE("min_cost_dynamic_flow: empty demand ships zero flow") {
  NetworkBuilder b;
  b.node("s", NodeKind::Source, 0);
  b.node("f", NodeKind::Safe);
  b.edge("s", "f", 1, 1);
  b.horizon(1);
  const auto net = shared(b.build());
  const auto teg = TimeExpandedGraph::expand(net, 1);
  const auto flow = min_cost_dynamic_flow(teg, std::vector<char>(1, 1));
  CHECK(flow.flow == 0);
  CHECK(flow.cost == 0);
}

TEST_CASE("route-restricted cost equals schedule cost on random instances") {
  for (uint64_t seed = 30; seed < 50; ++seed) {
    const auto net = shared(random_network(seed));
    const auto teg = TimeExpandedGraph::expand(net, net->horizon());
    const auto routings = enumerate_confluent_routings(*net, 5000);
    REQUIRE(!routings.empty());
    const RouteSet& routes = routings.front();
    std::vector<char> mask(net->num_edges(), 0);
    for (const auto& [v, e] : routes.successor) mask[static_cast<size_t>(e)] = 1;
    int64_t sched_cost = -1;
    bool sched_feasible = true;
    try {
      sched_cost = schedule_fixed_routes(teg, routes).objective.numerator;
    } catch (const InfeasibleError&) {
      sched_feasible = false;
    }
    try {
      const auto flow = min_cost_dynamic_flow(teg, mask);
      REQUIRE(sched_feasible);
      CHECK(flow.cost == sched_cost);
    } catch (const InfeasibleError&) {
      CHECK(!sched_feasible);
    }
  }
}

TEST_CASE("infeasible when capacity cannot carry the demand in time") {
  // Sample network truncated to H=2: both units need the single (2,A)
  // copy chain; only one can make it.
  const auto net = shared(sample_network());
  const EvacuationNetwork tight(net->nodes(), net->edges(), 2, net->objective());
  const auto teg = TimeExpandedGraph::expand(shared(tight), 2);
  CHECK_THROWS_AS(schedule_fixed_routes(teg, sample_routes(tight)), InfeasibleError);
}

TEST_CASE("completion search is tight and matches brute force") {
  int checked = 0;
  for (uint64_t seed = 60; seed < 90 && checked < 10; ++seed) {
    RandomInstanceParams params;
    params.max_nodes = 6;
    params.max_horizon = 5;
    const auto net = shared(random_network(seed, params));
    if (net->total_demand() > 6) continue;
    const auto teg = TimeExpandedGraph::expand(net, net->horizon()).augment_completion();
    const auto routings = enumerate_confluent_routings(*net, 5000);
    const RouteSet& routes = routings.front();
    std::vector<char> mask(net->num_edges(), 0);
    for (const auto& [v, e] : routes.successor) mask[static_cast<size_t>(e)] = 1;
    const auto t_star = min_feasible_completion(teg, mask);
    const auto brute = brute_force_schedule(*net, routes, TegVariant::CompletionTime);
    REQUIRE(t_star.has_value() == brute.feasible);
    if (!t_star) continue;
    ++checked;
    CHECK(*t_star == brute.best);
    // Tight: the schedule realizes T* and nothing completes earlier.
    const ScheduleResult r = schedule_fixed_routes(teg, routes);
    CHECK(r.objective.numerator == *t_star);
  }
  CHECK(checked >= 6);
}

TEST_CASE("schedule objective never beats the brute-force enumeration") {
  // Property: on enumerable instances the flow optimum equals the
  // brute-force minimum for all three variants.
  int checked = 0;
  for (uint64_t seed = 100; seed < 140 && checked < 12; ++seed) {
    RandomInstanceParams params;
    params.max_nodes = 6;
    params.max_horizon = 5;
    const auto net = shared(random_network(seed, params));
    if (net->total_demand() > 6) continue;
    ++checked;
    const auto routings = enumerate_confluent_routings(*net, 5000);
    REQUIRE(!routings.empty());
    const RouteSet& routes = routings.front();
    for (TegVariant variant :
         {TegVariant::Average, TegVariant::CompletionTime, TegVariant::OutlierAverage}) {
      auto teg = TimeExpandedGraph::expand(net, net->horizon());
      if (variant == TegVariant::CompletionTime) teg = teg.augment_completion();
      if (variant == TegVariant::OutlierAverage) teg = teg.augment_outlier(0.75);
      int64_t got = -1;
      bool feasible = true;
      try {
        got = schedule_fixed_routes(teg, routes).objective.numerator;
      } catch (const InfeasibleError&) {
        feasible = false;
      }
      const auto brute = brute_force_schedule(*net, routes, variant, 0.75);
      CHECK(feasible == brute.feasible);
      if (feasible) CHECK(got == brute.best);
    }
  }
  CHECK(checked >= 8);
}

TEST_CASE("capacity monotonicity for fixed routes") {
  // Raising any single edge capacity never worsens the objective.
  for (uint64_t seed = 150; seed < 162; ++seed) {
    const auto net = shared(random_network(seed));
    const auto routings = enumerate_confluent_routings(*net, 5000);
    const RouteSet& routes = routings.front();
    const auto teg = TimeExpandedGraph::expand(net, net->horizon());
    int64_t base_cost;
    try {
      base_cost = schedule_fixed_routes(teg, routes).objective.numerator;
    } catch (const InfeasibleError&) {
      continue;
    }
    for (size_t e = 0; e < net->num_edges(); ++e) {
      auto edges = net->edges();
      edges[e].capacity += 1;
      const auto bigger =
          shared(EvacuationNetwork(net->nodes(), edges, net->horizon(), net->objective()));
      const auto teg2 = TimeExpandedGraph::expand(bigger, bigger->horizon());
      const int64_t cost2 = schedule_fixed_routes(teg2, routes).objective.numerator;
      CHECK(cost2 <= base_cost);
    }
  }
}

TEST_CASE("evaluate_plan on the sample optimum") {
  const auto net = sample_network();
  EvacuationPlan plan;
  plan.routes = sample_routes(net);
  plan.schedule.departures[{*net.find_node("0"), 1}] = 1;
  plan.schedule.departures[{*net.find_node("1"), 0}] = 1;
  const PlanMetrics m = evaluate_plan(net, plan, 0.5);
  CHECK(m.average() == doctest::Approx(2.5));
  CHECK(m.completion == 3);
  CHECK(m.kept_count == 1);
  CHECK(m.outlier_average() == doctest::Approx(2.0));
}

TEST_CASE("evaluate_plan rejects capacity violations") {
  const auto net = sample_network();
  EvacuationPlan plan;
  plan.routes = sample_routes(net);
  // Both depart at t=0: they collide on edge (2, A) at t=1.
  plan.schedule.departures[{*net.find_node("0"), 0}] = 1;
  plan.schedule.departures[{*net.find_node("1"), 0}] = 1;
  CHECK_THROWS_WITH_AS(evaluate_plan(net, plan, 1.0), doctest::Contains("(2, A)"),
                       CapacityViolationError);
}

TEST_CASE("evaluate_plan flags arrivals past the horizon") {
  const auto net = sample_network();
  EvacuationPlan plan;
  plan.routes = sample_routes(net);
  plan.schedule.departures[{*net.find_node("0"), 2}] = 1;  // would arrive at 4 > 3
  plan.schedule.departures[{*net.find_node("1"), 0}] = 1;
  CHECK_THROWS_AS(evaluate_plan(net, plan, 1.0), CapacityViolationError);
}
