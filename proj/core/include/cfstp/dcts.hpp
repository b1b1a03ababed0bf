#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cfstp/protocol.hpp"

namespace cfstp::dcts {

// Phase 1 choice of a free agent.
struct Candidate {
  TaskId task = 0;
  Tick travel = 0;
  Tick start = 0;  // s_i
};

// Lexicographic minimum of (deadline, travel time, task id) over the domain,
// skipping tasks flagged in `skip`. nullopt for an empty choice.
std::optional<Candidate> choose_candidate(const Instance& inst, AgentId a, LocationId from, Tick t,
                                          std::span<const TaskId> domain, const std::vector<char>& skip);

struct CoalitionChoice {
  std::size_t k = 0;                  // prefix length taken from the assignable list
  std::vector<ArrivalPlan> members;   // that prefix; empty when none works
  std::optional<Tick> completion;     // nullopt when no prefix can finish
  std::uint64_t evaluations = 0;      // prefix evaluations spent
};

// Smallest prefix of `assignable` (sorted by plan_before) that, joined with
// the agents already committed to v, completes v by its deadline.
CoalitionChoice select_coalition(const Instance& inst, TaskId v, WorkProgress progress, Tick now,
                                 std::span<const ArrivalPlan> committed,
                                 std::span<const ArrivalPlan> assignable);

inline CoalitionChoice select_coalition(const Instance& inst, TaskId v, WorkProgress progress, Tick now,
                                        std::span<const ArrivalPlan> assignable) {
  return select_coalition(inst, v, progress, now, {}, assignable);
}

struct VariableState {
  std::optional<Candidate> candidate;
  bool allocated = false;  // x_i^t = candidate
};

struct FactorState {
  std::vector<ArrivalPlan> assignable;  // Pi, sorted
  CoalitionChoice choice;
};

// The two-phase protocol. Keeps per-task coverage between ticks: a task is
// covered when its committed agents already finish it on time, and covered
// tasks are not offered to free agents.
class Protocol {
 public:
  explicit Protocol(const Instance& inst);

  TickDecisions step(TickContext& ctx);

  std::uint64_t protocol_errors() const { return protocol_errors_; }

 private:
  bool covered(const TickContext& ctx, TaskId v);

  const Instance& inst_;
  std::vector<std::vector<AgentId>> cover_key_;
  std::vector<std::optional<bool>> cover_value_;
  std::vector<double> cover_done_;
  std::uint64_t protocol_errors_ = 0;
};

}  // namespace cfstp::dcts
