#include <gtest/gtest.h>

#include <map>

#include "cfstp/dcts.hpp"
#include "cfstp/simulation.hpp"
#include "gen.hpp"

using namespace cfstp;
using namespace cfstp::testing;

namespace {

std::vector<TaskId> all_tasks(const Instance& inst) {
  std::vector<TaskId> d;
  for (TaskId v = 0; v < inst.task_count(); ++v) d.push_back(v);
  return d;
}

Instance one_task(Tick deadline, double workload, std::vector<ValueTableEntry> table, std::size_t agents) {
  std::vector<Agent> as(agents, Agent{0, 1.0});
  return table_instance({{0, 0}}, {Task{0, deadline, workload}}, as, std::move(table));
}

}  // namespace

TEST(Phase1, EarliestDeadlineFirst) {
  // Both tasks two ticks away.
  const auto inst = table_instance({{0, 0}, {2, 0}, {0, 2}}, {Task{1, 9, 1.0}, Task{2, 5, 1.0}}, {Agent{0, 1.0}}, {}, 1.0);
  const auto d = all_tasks(inst);
  const auto c = dcts::choose_candidate(inst, 0, 0, 1, d, std::vector<char>(2, 0));
  ASSERT_TRUE(c);
  EXPECT_EQ(c->task, 1u);
  EXPECT_EQ(c->travel, 2);
  EXPECT_EQ(c->start, 3);
}

TEST(Phase1, TiesBrokenByTravelThenId) {
  const auto inst = table_instance({{0, 0}, {3, 0}, {1, 0}, {0, 1}},
                                   {Task{1, 9, 1.0}, Task{2, 9, 1.0}, Task{3, 9, 1.0}}, {Agent{0, 1.0}}, {}, 1.0);
  const auto d = all_tasks(inst);
  std::vector<char> skip(3, 0);
  EXPECT_EQ(dcts::choose_candidate(inst, 0, 0, 0, d, skip)->task, 1u);
  skip[1] = 1;
  EXPECT_EQ(dcts::choose_candidate(inst, 0, 0, 0, d, skip)->task, 2u);
  skip[2] = 1;
  EXPECT_EQ(dcts::choose_candidate(inst, 0, 0, 0, d, skip)->task, 0u);
  skip[0] = 1;
  EXPECT_FALSE(dcts::choose_candidate(inst, 0, 0, 0, d, skip));
  EXPECT_FALSE(dcts::choose_candidate(inst, 0, 0, 0, {}, std::vector<char>(3, 0)));
}

TEST(SelectCoalition, EmptyList) {
  const auto inst = one_task(10, 4.0, {}, 1);
  const auto c = dcts::select_coalition(inst, 0, {4.0, 0.0}, 0, {});
  EXPECT_EQ(c.k, 0u);
  EXPECT_TRUE(c.members.empty());
  EXPECT_FALSE(c.completion);
}

TEST(SelectCoalition, SingleAgentSuffices) {
  const auto inst = one_task(3, 4.0, {{{0}, 0, 4.0}, {{0, 1}, 0, 9.0}}, 2);
  const std::vector<ArrivalPlan> pi{{0, 2}, {1, 2}};
  const auto c = dcts::select_coalition(inst, 0, {4.0, 0.0}, 1, pi);
  EXPECT_EQ(c.k, 1u);
  EXPECT_EQ(c.members, (std::vector<ArrivalPlan>{{0, 2}}));
  EXPECT_EQ(c.completion, Tick{2});
  EXPECT_EQ(c.evaluations, 1u);
}

TEST(SelectCoalition, NeedsStaggeredPair) {
  const auto inst = one_task(5, 8.0, {{{0}, 0, 1.0}, {{0, 1}, 0, 5.0}}, 2);
  const std::vector<ArrivalPlan> pi{{0, 1}, {1, 3}};
  const auto c = dcts::select_coalition(inst, 0, {8.0, 0.0}, 0, pi);
  EXPECT_EQ(c.k, 2u);
  EXPECT_EQ(c.members, pi);
  EXPECT_EQ(c.completion, Tick{4});
  EXPECT_EQ(c.evaluations, 2u);
}

TEST(SelectCoalition, CommittedAgentsCount) {
  // Agent 0 already works; agent 1 alone could not finish.
  const auto inst = one_task(5, 8.0, {{{0}, 0, 1.0}, {{1}, 0, 1.0}, {{0, 1}, 0, 5.0}}, 2);
  const std::vector<ArrivalPlan> committed{{0, 1}};
  const std::vector<ArrivalPlan> pi{{1, 3}};
  const auto c = dcts::select_coalition(inst, 0, {8.0, 0.0}, 0, committed, pi);
  EXPECT_EQ(c.k, 1u);
  EXPECT_EQ(c.completion, Tick{4});
  EXPECT_EQ(dcts::select_coalition(inst, 0, {8.0, 0.0}, 0, pi).completion, std::nullopt);
}

TEST(SelectCoalition, NoPrefixWorks) {
  const auto inst = one_task(2, 100.0, {}, 3);
  const std::vector<ArrivalPlan> pi{{0, 0}, {1, 0}, {2, 1}};
  const auto c = dcts::select_coalition(inst, 0, {100.0, 0.0}, 0, pi);
  EXPECT_FALSE(c.completion);
  EXPECT_TRUE(c.members.empty());
  EXPECT_EQ(c.evaluations, 3u);
}

TEST(DctsRun, SingleAgentSingleTask) {
  const auto inst = table_instance({{0, 0}, {2, 0}}, {Task{1, 10, 4.0}}, {Agent{0, 1.0}}, {{{0}, 0, 2.0}});
  RunOptions o;
  o.trace = true;
  const auto r = run(inst, o);
  EXPECT_EQ(r.metrics.messages, 2u);
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.trace[0].force, Force::Assignable);
  EXPECT_EQ(r.trace[0].payload, std::uint32_t{2});
  EXPECT_EQ(r.trace[1].force, Force::Allocate);
  EXPECT_EQ(r.metrics.bytes, 10u + 9u);
  EXPECT_EQ(r.solution.completed, (std::vector<TaskId>{0}));
  EXPECT_TRUE(validate(inst, r.solution).feasible());
}

TEST(DctsRun, PairCoalitionGetsTwoAllocates) {
  const auto inst = table_instance({{0, 0}}, {Task{0, 3, 8.0}}, {Agent{0, 1.0}, Agent{0, 1.0}},
                                   {{{0}, 0, 1.0}, {{1}, 0, 1.0}, {{0, 1}, 0, 3.0}});
  RunOptions o;
  o.trace = true;
  const auto r = run(inst, o);
  std::size_t allocates = 0;
  for (const auto& t : r.trace)
    if (t.force == Force::Allocate) {
      ++allocates;
      EXPECT_EQ(t.bytes, 9u);
    }
  EXPECT_EQ(allocates, 2u);
  EXPECT_EQ(r.solution.completed_count(), 1u);
}

TEST(DctsRun, PerTickSendLimits) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Gen g(seed);
    const auto inst = compact_instance(seed, static_cast<std::size_t>(g.range(1, 8)),
                                       static_cast<std::size_t>(g.range(1, 6)), any_sampled_kind(g));
    RunOptions o;
    o.trace = true;
    o.seed = seed;
    const auto r = run(inst, o);
    std::map<std::pair<Tick, std::uint64_t>, std::size_t> sent;
    for (const auto& t : r.trace) ++sent[{t.tick, t.sender.raw()}];
    for (const auto& [key, n] : sent) {
      const auto sender = NodeAddress::from_raw(key.second);
      if (sender.kind == NodeAddress::Kind::Variable)
        ASSERT_LE(n, 1u);
      else
        ASSERT_LE(n, inst.agent_count());
    }
    EXPECT_EQ(r.protocol_errors, 0u);
  }
}
