#include "cfstp/dyndcop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cfstp {

std::optional<Tick> earliest_completion(const Instance& inst, TaskId v, WorkProgress progress,
                                        Tick now, std::span<const ArrivalPlan> plans,
                                        std::size_t k) {
  if (work_satisfied(progress.done, progress.required)) return now;
  k = std::min(k, plans.size());
  if (k == 0) return std::nullopt;

  const Tick deadline = inst.task(v).deadline;
  const double scale = std::max(1.0, progress.required);
  const double threshold = progress.required - kWorkTolerance * scale;

  AgentSet coalition(inst.agent_count());
  double acc = progress.done;
  std::size_t next = 0;
  Tick t = std::max(now, plans[0].start);
  while (t <= deadline) {
    while (next < k && plans[next].start <= t) coalition.insert(plans[next++].agent);
    const Tick seg_end = next < k ? std::min(deadline, plans[next].start - 1) : deadline;
    const double rate = inst.value(coalition, v);
    if (rate > 0.0) {
      // Smallest n >= 1 with acc + n * rate reaching the threshold.
      auto n = static_cast<Tick>(std::ceil((threshold - acc) / rate));
      n = std::max<Tick>(n, 1);
      while (n > 1 && acc + static_cast<double>(n - 1) * rate >= threshold) --n;
      while (acc + static_cast<double>(n) * rate < threshold) ++n;
      if (t + n - 1 <= seg_end) return t + n - 1;
      acc += static_cast<double>(seg_end - t + 1) * rate;
    }
    if (next >= k) break;
    t = plans[next].start;
  }
  return std::nullopt;
}

std::vector<ArrivalPlan> committed_plans(const WorldState& world, TaskId v, Tick now) {
  std::vector<ArrivalPlan> plans;
  plans.reserve(world.committed[v].size());
  for (auto a : world.committed[v]) plans.push_back({a, std::max(now, world.agents[a].start)});
  std::sort(plans.begin(), plans.end(), plan_before);
  return plans;
}

std::size_t FactorGraphSnapshot::edge_count() const {
  std::size_t n = 0;
  for (const auto& d : domains) n += d.size();
  return n;
}

std::vector<std::pair<AgentId, TaskId>> FactorGraphSnapshot::edges() const {
  std::vector<std::pair<AgentId, TaskId>> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < variables.size(); ++i)
    for (auto v : domains[i]) out.emplace_back(variables[i], v);
  return out;
}

DomainCache::DomainCache(const Instance& inst) : inst_(inst), lists_(inst.agent_count()) {}

void DomainCache::domain(AgentId a, LocationId from, Tick t, const WorldState& world,
                         std::vector<TaskId>& out) {
  auto& list = lists_[a];
  if (!list.built || list.from != from) {
    list.built = true;
    list.from = from;
    list.closed = 0;
    list.entries.clear();
    for (TaskId v = 0; v < inst_.task_count(); ++v) {
      if (!world.open(v)) continue;
      const auto& task = inst_.task(v);
      const Tick slack = task.deadline - inst_.travel_time(a, from, task.location) - inst_.start_delay();
      if (slack >= t) list.entries.push_back({slack, v});
    }
    std::sort(list.entries.begin(), list.entries.end(),
              [](const Entry& x, const Entry& y) { return x.slack != y.slack ? x.slack > y.slack : x.task < y.task; });
  }
  while (!list.entries.empty() && list.entries.back().slack < t) list.entries.pop_back();

  const std::size_t first = out.size();
  std::size_t closed = 0;
  for (const auto& e : list.entries) {
    if (world.open(e.task))
      out.push_back(e.task);
    else
      ++closed;
  }
  if (closed * 2 > list.entries.size()) {
    std::erase_if(list.entries, [&](const Entry& e) { return !world.open(e.task); });
  }
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
}

namespace {

void finish(FactorGraphSnapshot& s, const WorldState& world) {
  for (TaskId v = 0; v < world.tasks.size(); ++v)
    if (world.open(v)) s.allocable.push_back(v);

  std::vector<std::vector<std::size_t>> by_task(world.tasks.size());
  for (std::size_t i = 0; i < s.variables.size(); ++i)
    for (auto v : s.domains[i]) by_task[v].push_back(i);
  for (TaskId v = 0; v < by_task.size(); ++v) {
    if (by_task[v].empty()) continue;
    s.factors.push_back(v);
    s.neighbors.push_back(std::move(by_task[v]));
  }
}

}  // namespace

FactorGraphSnapshot build_snapshot(const Instance& inst, const WorldState& world, Tick t) {
  FactorGraphSnapshot s;
  s.tick = t;
  for (AgentId a = 0; a < world.agents.size(); ++a) {
    if (!world.free(a)) continue;
    s.variables.push_back(a);
    auto& d = s.domains.emplace_back();
    for (TaskId v = 0; v < inst.task_count(); ++v)
      if (world.open(v) && inst.reachable(a, world.agents[a].location, t, v)) d.push_back(v);
  }
  finish(s, world);
  return s;
}

FactorGraphSnapshot build_snapshot(const Instance& inst, const WorldState& world, Tick t,
                                   DomainCache& cache) {
  (void)inst;
  FactorGraphSnapshot s;
  s.tick = t;
  for (AgentId a = 0; a < world.agents.size(); ++a) {
    if (!world.free(a)) continue;
    s.variables.push_back(a);
    cache.domain(a, world.agents[a].location, t, world, s.domains.emplace_back());
  }
  finish(s, world);
  return s;
}

void write_edge_list(std::ostream& out, const FactorGraphSnapshot& snapshot) {
  for (const auto& [a, v] : snapshot.edges()) out << 'x' << a << " f" << v << '\n';
}

}  // namespace cfstp
