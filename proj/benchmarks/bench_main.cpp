#include <benchmark/benchmark.h>

#include "evac/generators.hpp"
#include "evac/lns.hpp"
#include "evac/sim.hpp"

namespace {

using namespace evac;

std::shared_ptr<const EvacuationNetwork> bench_grid(int rows, int cols, int sources) {
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const EvacuationNetwork>> cache;
  auto& slot = cache[{rows, cols, sources}];
  if (!slot) {
    slot = std::make_shared<EvacuationNetwork>(grid_network(rows, cols, sources, 7));
  }
  return slot;
}

void BM_TegExpandPrune(benchmark::State& state) {
  const auto net = bench_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 4);
  for (auto _ : state) {
    auto teg = TimeExpandedGraph::expand(net, net->horizon()).prune();
    benchmark::DoNotOptimize(teg.nodes().size());
  }
}
BENCHMARK(BM_TegExpandPrune)->Arg(4)->Arg(6)->Arg(8);

void BM_MinCostDynamicFlow(benchmark::State& state) {
  const auto net = bench_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 4);
  const auto teg = TimeExpandedGraph::expand(net, net->horizon());
  const std::vector<char> all(net->num_edges(), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_cost_dynamic_flow(teg, all).cost);
  }
}
BENCHMARK(BM_MinCostDynamicFlow)->Arg(4)->Arg(6);

void BM_ExactSolve(benchmark::State& state) {
  const auto net = std::make_shared<EvacuationNetwork>(random_network(
      static_cast<uint64_t>(state.range(0))));
  const auto teg = TimeExpandedGraph::expand(net, net->horizon());
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(teg).nodes_explored);
  }
}
BENCHMARK(BM_ExactSolve)->Arg(11)->Arg(42)->Arg(99);

void BM_LnsRun(benchmark::State& state) {
  const auto net = std::make_shared<EvacuationNetwork>(random_network(42));
  LnsParams params = default_params();
  params.iterations = static_cast<int>(state.range(0));
  params.rng_seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(net, params).report.nodes_explored);
  }
}
BENCHMARK(BM_LnsRun)->Arg(5)->Arg(15)->Arg(30);

void BM_Simulate(benchmark::State& state) {
  const auto net = bench_grid(6, 6, 6);
  const auto report = solve(TimeExpandedGraph::expand(net, net->horizon()));
  const auto& plan = *report.best_plan;
  const auto model = PerturbationModel::uniform(0, net->horizon(), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate(*net, plan, model, {}, 4 * net->horizon()).completion_time);
  }
}
BENCHMARK(BM_Simulate);

}  // namespace

BENCHMARK_MAIN();
