#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "cfstp/simulation.hpp"
#include "gen.hpp"

using namespace cfstp;
using namespace cfstp::testing;

namespace {

RunOptions options(Algorithm alg, std::uint64_t seed) {
  RunOptions o;
  o.algorithm = alg;
  o.seed = seed;
  return o;
}

Instance random_instance(std::uint64_t seed) {
  Gen g(seed);
  return compact_instance(seed, static_cast<std::size_t>(g.range(1, 8)), static_cast<std::size_t>(g.range(1, 5)),
                          any_sampled_kind(g), g.coin(0.2) ? WorkStart::AfterArrival : WorkStart::OnArrival);
}

const Algorithm kBoth[] = {Algorithm::Dcts, Algorithm::DsaSdp};

}  // namespace

TEST(Kernel, AlgorithmNames) {
  EXPECT_EQ(parse_algorithm("dcts"), Algorithm::Dcts);
  EXPECT_EQ(parse_algorithm(to_string(Algorithm::DsaSdp)), Algorithm::DsaSdp);
  EXPECT_THROW(parse_algorithm("maxsum"), ConfigError);
}

TEST(Kernel, EmptyInstanceIsVacuouslyComplete) {
  const Instance inst({{0, 0}}, {}, {Agent{0, 1.0}}, TravelModel{}, ValueModelSpec{});
  for (auto alg : kBoth) {
    const auto r = run(inst, options(alg, 0));
    EXPECT_TRUE(r.metrics.vacuous);
    EXPECT_DOUBLE_EQ(r.metrics.completed_pct, 100.0);
    EXPECT_EQ(r.metrics.messages, 0u);
  }
}

TEST(Kernel, ZeroWorkloadTaskCountsAsCompleted) {
  const auto inst = table_instance({{0, 0}, {100, 0}}, {Task{1, 5, 0.0}}, {Agent{0, 1.0}}, {}, 1.0);
  for (auto alg : kBoth) {
    const auto r = run(inst, options(alg, 0));
    EXPECT_EQ(r.solution.completed, (std::vector<TaskId>{0}));
    EXPECT_TRUE(validate(inst, r.solution).feasible());
  }
}

TEST(Kernel, FeasibleAnytimeAndBounded) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto inst = random_instance(seed);
    for (auto alg : kBoth) {
      const auto r = run(inst, options(alg, seed));
      const auto report = validate(inst, r.solution);
      ASSERT_TRUE(report.feasible()) << "seed " << seed << " " << to_string(alg) << ": "
                                     << to_string(report.violations[0].kind);
      EXPECT_LE(r.last_tick, inst.t_max());
      EXPECT_TRUE(std::is_sorted(r.completed_per_tick.begin(), r.completed_per_tick.end()));
      EXPECT_TRUE(std::is_sorted(r.nccc_per_tick.begin(), r.nccc_per_tick.end()));
      EXPECT_EQ(r.metrics.completed, r.solution.completed_count());
      EXPECT_GE(r.metrics.completed_pct, 0.0);
      EXPECT_LE(r.metrics.completed_pct, 100.0);
      if (alg == Algorithm::Dcts) {
        const auto a = inst.agent_count(), v = inst.task_count();
        EXPECT_LE(r.metrics.messages, a * static_cast<std::uint64_t>(inst.t_max()) + v * a) << seed;
      }
    }
  }
}

TEST(Kernel, NeverBeatsTheOptimum) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto inst = micro_instance(7000 + seed);
    if (static_cast<std::int64_t>(inst.agent_count() * inst.task_count()) * std::max<Tick>(inst.t_max(), 1) > 120)
      continue;
    const auto best = solve_optimal(inst, OptimalOptions{120}).completed_count();
    for (auto alg : kBoth) EXPECT_LE(run(inst, options(alg, seed)).solution.completed_count(), best) << seed;
  }
}

TEST(Kernel, Deterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_instance(seed);
    for (auto alg : kBoth) {
      auto o = options(alg, seed);
      o.trace = true;
      const auto a = run(inst, o);
      const auto b = run(inst, o);
      EXPECT_EQ(a.trace, b.trace);
      EXPECT_EQ(a.solution.completed, b.solution.completed);
      EXPECT_EQ(a.solution.assignments.size(), b.solution.assignments.size());
      EXPECT_EQ(a.metrics.messages, b.metrics.messages);
      EXPECT_EQ(a.metrics.bytes, b.metrics.bytes);
      EXPECT_EQ(a.metrics.ncccs, b.metrics.ncccs);
      EXPECT_EQ(a.completed_per_tick, b.completed_per_tick);
    }
  }
}

TEST(Kernel, StepOrderDoesNotMatter) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_instance(seed);
    Gen g(seed + 100);
    std::vector<std::size_t> perm(inst.agent_count() + inst.task_count());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(i) - 1))]);
    for (auto alg : kBoth) {
      const auto base = run(inst, options(alg, seed));
      auto o = options(alg, seed);
      o.step_order = perm;
      const auto shuffled = run(inst, o);
      EXPECT_EQ(base.solution.completed, shuffled.solution.completed) << seed;
      EXPECT_EQ(base.metrics.ncccs, shuffled.metrics.ncccs) << seed;
      EXPECT_EQ(base.metrics.messages, shuffled.metrics.messages) << seed;
    }
  }
}

TEST(Kernel, DegradationRemovesAgentsForGood) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = compact_instance(seed, 8, 3, ValueKind::NDCS);
    DegradationSchedule d;
    d.lambda = 1.0;
    d.removals.assign(static_cast<std::size_t>(inst.t_max()) + 1, 0);
    d.removals[1] = 2;
    d.removals[std::min<std::size_t>(5, d.removals.size() - 1)] += 3;
    for (auto alg : kBoth) {
      auto o = options(alg, seed);
      o.degradation = d;
      const auto r = run(inst, o);
      EXPECT_LE(r.removed_agents, 5u);
      EXPECT_TRUE(validate(inst, r.solution).feasible());
      // Removed agents do no work afterwards: at most 3 agents work after
      // tick 5 when all removals have happened.
      if (r.last_tick >= 5) {
        EXPECT_EQ(r.removed_agents, 5u);
        AgentSet late(inst.agent_count());
        for (const auto& w : r.solution.assignments)
          if (w.tick > 5) w.coalition.for_each([&](AgentId a) { late.insert(a); });
        EXPECT_LE(late.size(), 3u);
      }
    }
  }
}
