#include "cfstp/dcts.hpp"

#include <algorithm>
#include <tuple>

namespace cfstp::dcts {

std::optional<Candidate> choose_candidate(const Instance& inst, AgentId a, LocationId from, Tick t,
                                          std::span<const TaskId> domain, const std::vector<char>& skip) {
  std::optional<Candidate> best;
  Tick best_deadline = 0;
  for (auto v : domain) {
    if (v < skip.size() && skip[v]) continue;
    const auto& task = inst.task(v);
    const Tick travel = inst.travel_time(a, from, task.location);
    if (!best || std::tie(task.deadline, travel, v) < std::tie(best_deadline, best->travel, best->task)) {
      best = Candidate{v, travel, t + travel + inst.start_delay()};
      best_deadline = task.deadline;
    }
  }
  return best;
}

CoalitionChoice select_coalition(const Instance& inst, TaskId v, WorkProgress progress, Tick now,
                                 std::span<const ArrivalPlan> committed,
                                 std::span<const ArrivalPlan> assignable) {
  CoalitionChoice out;
  std::vector<ArrivalPlan> merged(committed.begin(), committed.end());
  for (std::size_t k = 0; k <= assignable.size(); ++k) {
    if (k > 0) {
      const auto& p = assignable[k - 1];
      merged.insert(std::upper_bound(merged.begin(), merged.end(), p, plan_before), p);
    }
    if (merged.empty()) continue;
    ++out.evaluations;
    if (auto done = earliest_completion(inst, v, progress, now, merged)) {
      out.k = k;
      out.members.assign(assignable.begin(), assignable.begin() + static_cast<std::ptrdiff_t>(k));
      out.completion = done;
      return out;
    }
  }
  return out;
}

Protocol::Protocol(const Instance& inst)
    : inst_(inst), cover_key_(inst.task_count()), cover_value_(inst.task_count()) {}

bool Protocol::covered(const TickContext& ctx, TaskId v) {
  const auto& members = ctx.world.committed[v];
  if (members.empty()) return false;
  // The committed coalition follows its plan, so the verdict only changes
  // when its membership does.
  if (cover_value_[v] && cover_key_[v] == members) return *cover_value_[v];
  const auto plans = committed_plans(ctx.world, v, ctx.snapshot.tick);
  const WorkProgress progress{inst_.task(v).workload, ctx.world.tasks[v].done};
  ctx.nccc.add(ctx.factor_node(v), 1);
  const bool ok = earliest_completion(inst_, v, progress, ctx.snapshot.tick, plans).has_value();
  cover_key_[v] = members;
  cover_value_[v] = ok;
  return ok;
}

TickDecisions Protocol::step(TickContext& ctx) {
  const auto& snap = ctx.snapshot;
  const Tick t = snap.tick;
  TickDecisions decisions;

  std::vector<char> skip(inst_.task_count(), 0);
  for (auto v : snap.factors) skip[v] = covered(ctx, v) ? 1 : 0;

  // Sub-round 1: every free agent offers itself to its Phase 1 task.
  MessageBus bus;
  std::vector<VariableState> vars(snap.variables.size());
  for_each_in_order(ctx, snap.variables.size(), [&](std::size_t i) {
    const AgentId a = snap.variables[i];
    auto cand = choose_candidate(inst_, a, ctx.world.agents[a].location, t, snap.domains[i], skip);
    if (!cand) return;
    vars[i].candidate = cand;
    Envelope e;
    e.sender = NodeAddress::variable(a);
    e.receiver = NodeAddress::factor(cand->task);
    e.force = Force::Assignable;
    e.payload = static_cast<std::uint32_t>(cand->start);
    e.nccc = ctx.nccc.at(a);
    bus.post(e);
  });

  std::vector<TaskId> tasks;
  std::vector<FactorState> factors;
  for (const auto& e : bus.deliver(t, ctx.metrics, ctx.trace)) {
    const TaskId v = e.receiver.index;
    if (tasks.empty() || tasks.back() != v) {
      tasks.push_back(v);
      factors.emplace_back();
    }
    ctx.nccc.receive(ctx.factor_node(v), e.nccc);
    factors.back().assignable.push_back({e.sender.index, static_cast<Tick>(*e.payload)});
  }

  // Sub-round 2: each factor picks the smallest sufficient prefix.
  std::vector<char> dead(tasks.size(), 0);
  for_each_in_order(ctx, tasks.size(), [&](std::size_t j) {
    const TaskId v = tasks[j];
    auto& f = factors[j];
    std::sort(f.assignable.begin(), f.assignable.end(), plan_before);
    const auto committed = committed_plans(ctx.world, v, t);
    const WorkProgress progress{inst_.task(v).workload, ctx.world.tasks[v].done};
    f.choice = select_coalition(inst_, v, progress, t, committed, f.assignable);
    const std::size_t node = ctx.factor_node(v);
    ctx.nccc.add(node, f.choice.evaluations);
    if (!f.choice.completion) {
      // Nobody is allocated this tick. The task is dead only if every agent
      // that could still reach it, joined with the committed ones, cannot
      // finish it either.
      std::vector<ArrivalPlan> everyone = committed;
      const auto it = std::lower_bound(snap.factors.begin(), snap.factors.end(), v);
      if (it != snap.factors.end() && *it == v) {
        for (auto i : snap.neighbors[static_cast<std::size_t>(it - snap.factors.begin())]) {
          const AgentId a = snap.variables[i];
          everyone.push_back({a, inst_.start_tick(a, ctx.world.agents[a].location, t, v)});
        }
      }
      std::sort(everyone.begin(), everyone.end(), plan_before);
      ctx.nccc.add(node, 1);
      if (!earliest_completion(inst_, v, progress, t, everyone)) dead[j] = 1;
      return;
    }
    for (const auto& p : f.choice.members) {
      Envelope e;
      e.sender = NodeAddress::factor(v);
      e.receiver = NodeAddress::variable(p.agent);
      e.force = Force::Allocate;
      e.nccc = ctx.nccc.at(node);
      bus.post(e);
    }
  });

  std::vector<std::size_t> var_index(inst_.agent_count(), snap.variables.size());
  for (std::size_t i = 0; i < snap.variables.size(); ++i) var_index[snap.variables[i]] = i;
  for (const auto& e : bus.deliver(t, ctx.metrics, ctx.trace)) {
    const AgentId a = e.receiver.index;
    const std::size_t i = var_index[a];
    ctx.nccc.receive(a, e.nccc);
    if (i >= vars.size() || !vars[i].candidate || vars[i].candidate->task != e.sender.index) {
      ++protocol_errors_;
      continue;
    }
    vars[i].allocated = true;
  }

  for (std::size_t j = 0; j < tasks.size(); ++j) {
    if (dead[j]) {
      decisions.uncompletable.push_back(tasks[j]);
      continue;
    }
    Allocation alloc{tasks[j], {}};
    for (const auto& p : factors[j].choice.members)
      if (vars[var_index[p.agent]].allocated) alloc.agents.push_back(p);
    if (!alloc.agents.empty()) decisions.allocations.push_back(std::move(alloc));
  }
  return decisions;
}

}  // namespace cfstp::dcts
