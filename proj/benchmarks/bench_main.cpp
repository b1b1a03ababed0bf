#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "cfstp/dyndcop.hpp"
#include "cfstp/scenario.hpp"
#include "cfstp/simulation.hpp"

using namespace cfstp;

namespace {

const std::vector<IncidentRecord>& records() {
  static const auto r = synthesize_records(150 * 20, 1);
  return r;
}

Instance problem(std::size_t agents, std::size_t ratio, ValueKind kind = ValueKind::UcNDCS) {
  SliceOptions o;
  o.values = kind;
  o.seed = 1;
  return slice_problems(records(), agents, ratio, 1, o).front().instance;
}

void BM_ValueLookup(benchmark::State& state) {
  const auto inst = problem(150, 1, static_cast<ValueKind>(state.range(0)));
  std::vector<AgentSet> coalitions;
  for (AgentId a = 0; a + 3 < inst.agent_count(); ++a) coalitions.push_back(AgentSet::of(inst.agent_count(), {a, a + 1, a + 3}));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(inst.value(coalitions[i % coalitions.size()], static_cast<TaskId>(i % inst.task_count())));
    ++i;
  }
}
BENCHMARK(BM_ValueLookup)->Arg(static_cast<int>(ValueKind::NDCS))->Arg(static_cast<int>(ValueKind::UcAgentBased));

void BM_ValueCompute(benchmark::State& state) {
  const auto inst = problem(150, 1, ValueKind::UcNDCS);
  const auto c = AgentSet::of(inst.agent_count(), {1, 5, 9, 40});
  TaskId v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(inst.values().compute(c, v));
    v = (v + 1) % static_cast<TaskId>(inst.task_count());
  }
}
BENCHMARK(BM_ValueCompute);

void BM_EarliestCompletion(benchmark::State& state) {
  const auto inst = problem(150, 1, ValueKind::NDCS);
  const auto k = static_cast<std::size_t>(state.range(0));
  std::vector<ArrivalPlan> plans;
  for (AgentId a = 0; a < k; ++a) plans.push_back({a, static_cast<Tick>(3 * a)});
  std::sort(plans.begin(), plans.end(), plan_before);
  TaskId v = 0;
  for (auto _ : state) {
    const WorkProgress p{inst.task(v).workload, 0.0};
    benchmark::DoNotOptimize(earliest_completion(inst, v, p, 0, plans));
    v = (v + 1) % static_cast<TaskId>(inst.task_count());
  }
}
BENCHMARK(BM_EarliestCompletion)->Arg(1)->Arg(4)->Arg(16);

void BM_Snapshot(benchmark::State& state) {
  const auto inst = problem(150, static_cast<std::size_t>(state.range(0)));
  const auto world = WorldState::initial(inst);
  for (auto _ : state) benchmark::DoNotOptimize(build_snapshot(inst, world, 0));
}
BENCHMARK(BM_Snapshot)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Run(benchmark::State& state, Algorithm alg) {
  const auto ratio = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    // Fresh instance each time so the value memo starts cold.
    const auto inst = problem(150, ratio);
    RunOptions o;
    o.algorithm = alg;
    o.seed = 1;
    state.ResumeTiming();
    benchmark::DoNotOptimize(run(inst, o));
  }
}
BENCHMARK_CAPTURE(BM_Run, dcts, Algorithm::Dcts)->Arg(1)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, dsa_sdp, Algorithm::DsaSdp)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
