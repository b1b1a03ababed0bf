#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "cfstp/model.hpp"
#include "cfstp/world.hpp"

namespace cfstp {

// An agent and the first tick it can work on a task.
struct ArrivalPlan {
  AgentId agent = 0;
  Tick start = 0;

  friend bool operator==(const ArrivalPlan&, const ArrivalPlan&) = default;
};

// Order used for every plan list: start tick, then agent id.
inline bool plan_before(const ArrivalPlan& x, const ArrivalPlan& y) {
  return x.start != y.start ? x.start < y.start : x.agent < y.agent;
}

struct WorkProgress {
  double required = 0.0;
  double done = 0.0;
};

// First tick t' in [now, deadline] at which the accumulated work reaches the
// requirement, when the first k plans work on v and the coalition at tick s
// is every prefix member with start <= s. nullopt when the deadline passes
// first. Plans must be sorted by plan_before. Work already satisfied returns
// `now`.
std::optional<Tick> earliest_completion(const Instance& inst, TaskId v, WorkProgress progress,
                                        Tick now, std::span<const ArrivalPlan> plans,
                                        std::size_t k);

inline std::optional<Tick> earliest_completion(const Instance& inst, TaskId v, WorkProgress progress,
                                               Tick now, std::span<const ArrivalPlan> plans) {
  return earliest_completion(inst, v, progress, now, plans, plans.size());
}

// Plans of the agents already committed to v (working ones start at `now`).
std::vector<ArrivalPlan> committed_plans(const WorldState& world, TaskId v, Tick now);

// The DCOP of one tick as a bipartite factor graph: free agents (variables)
// and open tasks reachable by at least one of them (factors).
struct FactorGraphSnapshot {
  Tick tick = 0;
  std::vector<AgentId> variables;            // free agents, ascending
  std::vector<std::vector<TaskId>> domains;  // per variable, ascending; the empty choice is implicit
  std::vector<TaskId> factors;               // ascending
  std::vector<std::vector<std::size_t>> neighbors;  // per factor, indices into `variables`
  std::vector<TaskId> allocable;             // every open task, ascending

  std::size_t edge_count() const;
  std::vector<std::pair<AgentId, TaskId>> edges() const;

  friend bool operator==(const FactorGraphSnapshot&, const FactorGraphSnapshot&) = default;
};

// Per-agent task lists sorted by latest feasible departure so the reachable
// set at tick t is a prefix. Rebuilt when the agent's location changes; the
// unreachable tail is dropped as time advances and closed tasks are
// compacted lazily.
class DomainCache {
 public:
  explicit DomainCache(const Instance& inst);

  // Appends D_a^t minus the empty choice to `out`, ascending.
  void domain(AgentId a, LocationId from, Tick t, const WorldState& world, std::vector<TaskId>& out);

 private:
  struct Entry {
    Tick slack;  // deadline - travel - start delay
    TaskId task;
  };
  struct List {
    bool built = false;
    LocationId from = 0;
    std::size_t closed = 0;
    std::vector<Entry> entries;
  };

  const Instance& inst_;
  std::vector<List> lists_;
};

// Reference construction: scans every (free agent, open task) pair.
FactorGraphSnapshot build_snapshot(const Instance& inst, const WorldState& world, Tick t);

// Same graph through the cache.
FactorGraphSnapshot build_snapshot(const Instance& inst, const WorldState& world, Tick t,
                                   DomainCache& cache);

// One "x<agent> f<task>" line per edge.
void write_edge_list(std::ostream& out, const FactorGraphSnapshot& snapshot);

}  // namespace cfstp
