#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cfstp/agent_set.hpp"
#include "cfstp/model.hpp"

namespace cfstp {

// Coalition C works on task v at tick t (tau_{v,t,C} = 1).
struct WorkAssignment {
  TaskId task = 0;
  Tick tick = 0;
  AgentSet coalition;
};

// A candidate CFSTP solution: the active work indicators plus the set of
// tasks claimed completed (delta_v = 1).
struct Solution {
  std::vector<WorkAssignment> assignments;
  std::vector<TaskId> completed;  // ascending, no duplicates

  std::size_t completed_count() const { return completed.size(); }

  // The agent's work schedule as (tick, task) pairs in tick order.
  std::vector<std::pair<Tick, TaskId>> schedule_of(AgentId a) const;
};

enum class ViolationKind {
  AfterDeadline,       // work recorded at t > deadline
  EmptyCoalition,
  MultipleCoalitions,  // more than one coalition on (v, t)
  WorkloadNotMet,      // task claimed completed without enough work
  BeforeArrival,       // coalition works before its slowest member can arrive
  TravelConflict,      // consecutive work on two tasks too close in time
  AgentDoubleBooked,   // one agent in two coalitions on the same tick
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  TaskId task = 0;
  Tick tick = 0;
  std::optional<AgentId> agent;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
};

// Checks a solution against the structural, temporal and spatial
// constraints. Unknown task/agent ids or negative ticks throw
// StructuralError; constraint failures are returned in the report.
ValidationReport validate(const Instance& instance, const Solution& solution);

struct OptimalOptions {
  // Refuse instances with |A| * |V| * t_max above this.
  std::int64_t budget = 60;
};

// Exhaustive search for a solution with the maximum number of completed
// tasks. Among optima, the lexicographically smallest completed-id set wins.
Solution solve_optimal(const Instance& instance, OptimalOptions options = {});

}  // namespace cfstp
