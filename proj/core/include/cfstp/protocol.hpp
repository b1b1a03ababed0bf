#pragma once

#include <cstddef>
#include <vector>

#include "cfstp/dyndcop.hpp"
#include "cfstp/messaging.hpp"
#include "cfstp/model.hpp"
#include "cfstp/world.hpp"

namespace cfstp {

// A coalition committed to a task this tick.
struct Allocation {
  TaskId task = 0;
  std::vector<ArrivalPlan> agents;
};

struct TickDecisions {
  std::vector<Allocation> allocations;
  std::vector<TaskId> uncompletable;  // committed agents are released
};

// What a protocol sees during one tick. Node ids for NCCC accounting:
// variables are 0..|A|-1, factors follow at |A| + task id.
struct TickContext {
  const Instance& inst;
  const WorldState& world;
  const FactorGraphSnapshot& snapshot;
  RunMetrics& metrics;
  NcccCounter& nccc;
  std::vector<TraceRecord>* trace = nullptr;
  // Serial order in which nodes are stepped; any permutation must give the
  // same result. Empty means ascending.
  const std::vector<std::size_t>* step_order = nullptr;

  std::size_t factor_node(TaskId v) const { return inst.agent_count() + v; }
};

// Visits 0..n-1 in the context's step order (restricted to indices < n).
template <typename F>
void for_each_in_order(const TickContext& ctx, std::size_t n, F&& f) {
  if (!ctx.step_order || ctx.step_order->empty()) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<char> seen(n, 0);
  for (auto i : *ctx.step_order)
    if (i < n && !seen[i]) {
      seen[i] = 1;
      f(i);
    }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) f(i);
}

}  // namespace cfstp
