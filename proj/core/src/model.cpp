#include "cfstp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cfstp {

std::string_view to_string(DistanceMetric metric) {
  return metric == DistanceMetric::Haversine ? "haversine" : "euclidean";
}

DistanceMetric parse_metric(std::string_view text) {
  if (text == "haversine") return DistanceMetric::Haversine;
  if (text == "euclidean") return DistanceMetric::Euclidean;
  throw ParseError("unknown distance metric '" + std::string(text) + "'");
}

std::string_view to_string(WorkStart start) {
  return start == WorkStart::OnArrival ? "on_arrival" : "after_arrival";
}

WorkStart parse_work_start(std::string_view text) {
  if (text == "on_arrival") return WorkStart::OnArrival;
  if (text == "after_arrival") return WorkStart::AfterArrival;
  throw ParseError("unknown work_start '" + std::string(text) + "'");
}

double haversine_metres(const Location& a, const Location& b) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double phi1 = a.lat * kDeg;
  const double phi2 = b.lat * kDeg;
  const double dphi = (b.lat - a.lat) * kDeg;
  const double dlambda = (b.lon - a.lon) * kDeg;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusMetres * std::asin(std::min(1.0, std::sqrt(h)));
}

double euclidean_distance(const Location& a, const Location& b) {
  return std::hypot(a.lat - b.lat, a.lon - b.lon);
}

double TravelModel::distance(const Location& from, const Location& to) const {
  return metric == DistanceMetric::Haversine ? haversine_metres(from, to)
                                             : euclidean_distance(from, to);
}

Tick TravelModel::travel_time(double speed, const Location& from, const Location& to) const {
  const double d = distance(from, to);
  if (d <= 0.0) return 0;
  return static_cast<Tick>(std::ceil(d / speed));
}

Instance::Instance(std::vector<Location> locations, std::vector<Task> tasks,
                   std::vector<Agent> agents, TravelModel travel, ValueModelSpec values,
                   WorkStart work_start)
    : locations_(std::move(locations)),
      tasks_(std::move(tasks)),
      agents_(std::move(agents)),
      travel_(travel),
      work_start_(work_start) {
  for (const auto& l : locations_) {
    if (!std::isfinite(l.lat) || !std::isfinite(l.lon))
      throw StructuralError("location coordinates must be finite");
    if (travel_.metric == DistanceMetric::Haversine &&
        (l.lat < -90.0 || l.lat > 90.0 || l.lon < -180.0 || l.lon > 180.0))
      throw StructuralError("latitude/longitude out of range");
  }
  for (std::size_t v = 0; v < tasks_.size(); ++v) {
    const auto& t = tasks_[v];
    if (t.location >= locations_.size())
      throw StructuralError("task " + std::to_string(v) + " references unknown location");
    if (t.deadline < 0) throw StructuralError("task " + std::to_string(v) + " has a negative deadline");
    if (!(t.workload >= 0.0) || !std::isfinite(t.workload))
      throw StructuralError("task " + std::to_string(v) + " has an invalid workload");
    t_max_ = std::max(t_max_, t.deadline);
  }
  for (std::size_t a = 0; a < agents_.size(); ++a) {
    const auto& ag = agents_[a];
    if (ag.initial_location >= locations_.size())
      throw StructuralError("agent " + std::to_string(a) + " references unknown location");
    if (!(ag.speed > 0.0) || !std::isfinite(ag.speed))
      throw StructuralError("agent " + std::to_string(a) + " must have a positive speed");
  }
  std::vector<Tick> deadlines;
  deadlines.reserve(tasks_.size());
  for (const auto& t : tasks_) deadlines.push_back(t.deadline);
  values_ = std::make_shared<const CoalitionValueModel>(std::move(values), std::move(deadlines),
                                                        agents_.size());
}

const Task& Instance::task(TaskId v) const {
  if (v >= tasks_.size()) throw StructuralError("unknown task id " + std::to_string(v));
  return tasks_[v];
}

const Agent& Instance::agent(AgentId a) const {
  if (a >= agents_.size()) throw StructuralError("unknown agent id " + std::to_string(a));
  return agents_[a];
}

const Location& Instance::location(LocationId l) const {
  if (l >= locations_.size()) throw StructuralError("unknown location id " + std::to_string(l));
  return locations_[l];
}

Tick Instance::travel_time(AgentId a, LocationId from, LocationId to) const {
  const auto& ag = agent(a);
  if (from == to) return 0;
  return travel_.travel_time(ag.speed, location(from), location(to));
}

bool Instance::reachable(AgentId a, LocationId from, Tick at, TaskId v) const {
  const auto& t = task(v);
  return at + travel_time(a, from, t.location) + start_delay() <= t.deadline;
}

}  // namespace cfstp
