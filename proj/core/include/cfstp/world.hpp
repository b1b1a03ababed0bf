#pragma once

#include <string_view>
#include <vector>

#include "cfstp/model.hpp"

namespace cfstp {

enum class AgentStatus { Free, Traveling, Working, Removed };

// Allocable -> Working -> {Completed | Expired | Uncompletable}; never back.
enum class TaskStatus { Allocable, Working, Completed, Expired, Uncompletable };

std::string_view to_string(AgentStatus s);
std::string_view to_string(TaskStatus s);

struct AgentState {
  AgentStatus status = AgentStatus::Free;
  // Where the agent is (Free, Working) or where it left from (Traveling).
  LocationId location = 0;
  // Meaningful while Traveling or Working.
  TaskId task = 0;
  Tick start = 0;  // first tick it can work on `task`
};

struct TaskState {
  TaskStatus status = TaskStatus::Allocable;
  double done = 0.0;
};

// Mutable simulation state. Owned by the kernel; the protocols read it
// through snapshots and return allocations.
struct WorldState {
  Tick tick = 0;
  std::vector<AgentState> agents;
  std::vector<TaskState> tasks;
  // Agents traveling to or working on each task, ascending ids.
  std::vector<std::vector<AgentId>> committed;

  static WorldState initial(const Instance& inst);

  bool open(TaskId v) const {
    const auto s = tasks[v].status;
    return s == TaskStatus::Allocable || s == TaskStatus::Working;
  }
  bool alive(AgentId a) const { return agents[a].status != AgentStatus::Removed; }
  bool free(AgentId a) const { return agents[a].status == AgentStatus::Free; }
};

}  // namespace cfstp
