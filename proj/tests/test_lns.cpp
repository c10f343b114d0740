#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evac/generators.hpp"
#include "evac/lns.hpp"
#include "test_util.hpp"

using namespace evac;

namespace {

std::shared_ptr<const EvacuationNetwork> shared(const EvacuationNetwork& net) {
  return std::make_shared<EvacuationNetwork>(net);
}

LnsParams exhaustive_params(uint64_t seed) {
  // p reaches 100 and nothing is time-limited or shrunk, so the last
  // iterations solve the original problem exactly.
  LnsParams params;
  params.iterations = 52;
  params.p = 75.0;
  params.p_inc = 0.5;
  params.threshold_gap = 0.0;
  params.horizon_shrink_threshold = std::numeric_limits<Timestep>::max() / 2;
  params.rng_seed = seed;
  return params;
}

}  // namespace

TEST_CASE("default parameters follow the published configuration") {
  const LnsParams params = default_params();
  CHECK(params.iterations == 30);
  CHECK(params.p == 75.0);
  CHECK(params.p_inc == 0.5);
  CHECK(params.threshold_gap == doctest::Approx(0.05));
  const LnsParams scaling = scaling_study_params();
  CHECK(scaling.p == 80.0);
  CHECK(scaling.threshold_gap == doctest::Approx(0.02));
  CHECK(scaling.p_inc == 0.5);
}

TEST_CASE("initial solution on the sample network") {
  const auto net = shared(sample_network());
  const auto teg = TimeExpandedGraph::expand(net, 3);
  const EvacuationPlan plan = initial_solution(*net, teg);
  const PlanMetrics m = evaluate_plan(*net, plan, 1.0);
  CHECK(m.average() == doctest::Approx(2.5));
  CHECK(m.completion == 3);
}

TEST_CASE("initial solution: sources adjacent to distinct safes depart at 0") {
  NetworkBuilder b;
  b.node("s0", NodeKind::Source, 2);
  b.node("s1", NodeKind::Source, 2);
  b.node("fA", NodeKind::Safe);
  b.node("fB", NodeKind::Safe);
  b.edge("s0", "fA", 1, 2);
  b.edge("s1", "fB", 1, 2);
  b.horizon(3);
  const auto net = shared(b.build());
  const EvacuationPlan plan = initial_solution(*net, TimeExpandedGraph::expand(net, 3));
  CHECK(plan.schedule.departures.at({0, 0}) == 2);
  CHECK(plan.schedule.departures.at({1, 0}) == 2);
}

TEST_CASE("initial solution: larger demand wins a shared transit conflict") {
  // Both sources' shortest routes pass m but disagree about its successor:
  // s_big prefers m->fA, s_small prefers m->fB (via edge costs). The
  // bigger source pins m, the smaller one re-routes around it.
  NetworkBuilder b;
  b.node("s_big", NodeKind::Source, 5);
  b.node("s_small", NodeKind::Source, 1);
  b.node("m", NodeKind::Transit);
  b.node("fA", NodeKind::Safe);
  b.node("fB", NodeKind::Safe);
  b.node("alt", NodeKind::Transit);
  b.edge("s_big", "m", 1, 5);
  b.edge("s_small", "m", 1, 1);
  b.edge("m", "fA", 1, 5);    // shortest for s_big
  b.edge("m", "fB", 3, 1);
  b.edge("s_small", "alt", 2, 1);
  b.edge("alt", "fB", 2, 1);
  b.horizon(8);
  const auto net = shared(b.build());
  const EvacuationPlan plan = initial_solution(*net, TimeExpandedGraph::expand(net, 8));
  CHECK_NOTHROW(require_valid_routes(*net, plan.routes));
  // m belongs to the larger source's shortest route.
  const NodeIndex m = *net->find_node("m");
  CHECK(net->node(net->edge(plan.routes.successor.at(m)).head).id == "fA");
}

TEST_CASE("lns on the sample network returns the unique optimum") {
  LnsParams params;
  params.iterations = 5;
  params.p = 75.0;
  params.p_inc = 0.5;
  params.rng_seed = 1;
  const auto net = shared(sample_network());
  const LnsResult result = run(net, params);
  CHECK(result.report.objective->numerator == 5);
  CHECK(result.report.objective->denominator == 2);
  CHECK(result.report.status == SolveStatus::Optimal);
  const NodeIndex s0 = *net->find_node("0");
  const NodeIndex s1 = *net->find_node("1");
  CHECK(result.plan.schedule.departures.at({s0, 1}) == 1);
  CHECK(result.plan.schedule.departures.at({s1, 0}) == 1);
}

TEST_CASE("lns with p reaching 100 matches the exact optimum") {
  for (uint64_t seed = 40; seed < 52; ++seed) {
    const auto net = shared(random_network(seed));
    const auto teg = TimeExpandedGraph::expand(net, net->horizon());
    const SolveReport exact_report = solve(teg);
    REQUIRE(exact_report.status == SolveStatus::Optimal);
    const LnsResult lns = run(net, exhaustive_params(seed));
    CHECK(lns.report.objective->numerator == exact_report.objective->numerator);
    CHECK(lns.report.status == SolveStatus::Optimal);
  }
}

TEST_CASE("lns trace is monotone and every iterate is feasible") {
  for (uint64_t seed = 60; seed < 66; ++seed) {
    const auto net = shared(random_network(seed));
    LnsParams params = default_params();
    params.rng_seed = seed;
    const LnsResult result = run(net, params);
    REQUIRE(result.trace.rows.size() == static_cast<size_t>(params.iterations) + 1);
    for (size_t i = 1; i < result.trace.rows.size(); ++i) {
      CHECK(result.trace.rows[i].objective <= result.trace.rows[i - 1].objective);
      CHECK(result.trace.rows[i].horizon <= result.trace.rows[i - 1].horizon);
    }
    // Feasibility of the final plan (capacity check throws on violation).
    CHECK_NOTHROW(evaluate_plan(*net, result.plan, 1.0));
  }
}

TEST_CASE("destroy-set size is ceil((100-p)% of sources)") {
  const auto net = shared(random_network(99));
  LnsParams params = default_params();
  params.iterations = 8;
  params.rng_seed = 3;
  const LnsResult result = run(net, params);
  const auto n_sources = static_cast<double>(net->sources().size());
  for (size_t i = 1; i < result.trace.rows.size(); ++i) {
    const auto& row = result.trace.rows[i];
    const int expect =
        static_cast<int>(std::ceil((100.0 - row.p) * n_sources / 100.0));
    CHECK(row.fixed_count == expect);
  }
}

TEST_CASE("lns is reproducible for a fixed seed") {
  const auto net = shared(random_network(123));
  LnsParams params = default_params();
  params.iterations = 10;
  params.rng_seed = 7;
  const LnsResult a = run(net, params);
  const LnsResult b = run(net, params);
  CHECK(a.plan.routes.successor == b.plan.routes.successor);
  CHECK(a.plan.schedule.departures == b.plan.schedule.departures);
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (size_t i = 0; i < a.trace.rows.size(); ++i) {
    CHECK(a.trace.rows[i].objective == b.trace.rows[i].objective);
    CHECK(a.trace.rows[i].inner_status == b.trace.rows[i].inner_status);
  }
}

TEST_CASE("lns propagates infeasibility from the initial solution") {
  // One source, demand 2, single capacity-1 route, horizon too tight.
  NetworkBuilder b;
  b.node("s", NodeKind::Source, 2);
  b.node("f", NodeKind::Safe);
  b.edge("s", "f", 1, 1);
  b.horizon(1);
  const auto net = shared(b.build());
  CHECK_THROWS_AS(run(net, default_params()), InfeasibleError);
}

TEST_CASE("accept-worse variant still reports the best plan") {
  const auto net = shared(random_network(321));
  LnsParams params = default_params();
  params.iterations = 15;
  params.rng_seed = 5;
  params.accept_worse = true;
  const LnsResult result = run(net, params);
  // The returned plan is the best incumbent even if later iterations
  // wandered; it must match the monotone run's final objective or better.
  LnsParams monotone = params;
  monotone.accept_worse = false;
  const LnsResult base = run(net, monotone);
  CHECK(result.report.objective->numerator <= base.report.objective->numerator);
  CHECK_NOTHROW(evaluate_plan(*net, result.plan, 1.0));
}

TEST_CASE("lns handles zero-demand instances without shrinking below t=1") {
  NetworkBuilder b;
  b.node("s", NodeKind::Source, 0);
  b.node("f", NodeKind::Safe);
  b.edge("s", "f", 1, 1);
  b.horizon(6);
  const auto net = shared(b.build());
  LnsParams params = default_params();
  params.iterations = 4;
  const LnsResult result = run(net, params);
  CHECK(result.report.objective->numerator == 0);
  CHECK(result.trace.rows.back().completion == 0);
}
