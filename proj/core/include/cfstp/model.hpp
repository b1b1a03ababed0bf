#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "cfstp/agent_set.hpp"
#include "cfstp/coalition_value.hpp"
#include "cfstp/types.hpp"

namespace cfstp {

// For Haversine instances the coordinates are degrees; for Euclidean ones they
// are plane coordinates in distance units and carry no range restriction.
struct Location {
  double lat = 0.0;
  double lon = 0.0;
};

struct Task {
  LocationId location = 0;
  Tick deadline = 0;
  double workload = 0.0;
};

struct Agent {
  LocationId initial_location = 0;
  double speed = 1.0;
};

enum class DistanceMetric { Euclidean, Haversine };

// Whether an agent can work on the tick it arrives (OnArrival, the default) or
// only from the following tick (AfterArrival). The offset is applied
// uniformly: to start times, reachability, the validator's arrival check and
// the exact solver.
enum class WorkStart { OnArrival, AfterArrival };

std::string_view to_string(DistanceMetric metric);
DistanceMetric parse_metric(std::string_view text);
std::string_view to_string(WorkStart start);
WorkStart parse_work_start(std::string_view text);

inline constexpr double kEarthRadiusMetres = 6'371'000.0;

double haversine_metres(const Location& a, const Location& b);
double euclidean_distance(const Location& a, const Location& b);

struct TravelModel {
  DistanceMetric metric = DistanceMetric::Euclidean;

  double distance(const Location& from, const Location& to) const;
  // ceil(distance / speed); never earlier than physically possible.
  Tick travel_time(double speed, const Location& from, const Location& to) const;
};

// An immutable CFSTP problem.
class Instance {
 public:
  Instance(std::vector<Location> locations, std::vector<Task> tasks, std::vector<Agent> agents,
           TravelModel travel, ValueModelSpec values, WorkStart work_start = WorkStart::OnArrival);

  std::span<const Location> locations() const { return locations_; }
  std::span<const Task> tasks() const { return tasks_; }
  std::span<const Agent> agents() const { return agents_; }
  std::size_t task_count() const { return tasks_.size(); }
  std::size_t agent_count() const { return agents_.size(); }

  const Task& task(TaskId v) const;
  const Agent& agent(AgentId a) const;
  const Location& location(LocationId l) const;

  Tick t_max() const { return t_max_; }
  const TravelModel& travel() const { return travel_; }
  WorkStart work_start() const { return work_start_; }
  // 0 when agents work on their arrival tick, 1 otherwise.
  Tick start_delay() const { return work_start_ == WorkStart::OnArrival ? 0 : 1; }

  Tick travel_time(AgentId a, LocationId from, LocationId to) const;

  // at + travel + start_delay <= deadline.
  bool reachable(AgentId a, LocationId from, Tick at, TaskId v) const;

  // Tick at which an agent free at `from` on tick `at` can first work on v.
  Tick start_tick(AgentId a, LocationId from, Tick at, TaskId v) const {
    return at + travel_time(a, from, task(v).location) + start_delay();
  }

  const CoalitionValueModel& values() const { return *values_; }
  double value(const AgentSet& coalition, TaskId v) const { return values_->value(coalition, v); }
  const ValueModelSpec& value_spec() const { return values_->spec(); }

  AgentSet empty_coalition() const { return AgentSet(agents_.size()); }

 private:
  std::vector<Location> locations_;
  std::vector<Task> tasks_;
  std::vector<Agent> agents_;
  TravelModel travel_;
  WorkStart work_start_;
  Tick t_max_ = 0;
  std::shared_ptr<const CoalitionValueModel> values_;
};

}  // namespace cfstp
