#include "cfstp/world.hpp"

namespace cfstp {

std::string_view to_string(AgentStatus s) {
  switch (s) {
    case AgentStatus::Free: return "free";
    case AgentStatus::Traveling: return "traveling";
    case AgentStatus::Working: return "working";
    case AgentStatus::Removed: return "removed";
  }
  return "?";
}

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Allocable: return "allocable";
    case TaskStatus::Working: return "working";
    case TaskStatus::Completed: return "completed";
    case TaskStatus::Expired: return "expired";
    case TaskStatus::Uncompletable: return "uncompletable";
  }
  return "?";
}

WorldState WorldState::initial(const Instance& inst) {
  WorldState w;
  w.agents.resize(inst.agent_count());
  for (AgentId a = 0; a < inst.agent_count(); ++a) w.agents[a].location = inst.agent(a).initial_location;
  w.tasks.resize(inst.task_count());
  w.committed.resize(inst.task_count());
  return w;
}

}  // namespace cfstp
