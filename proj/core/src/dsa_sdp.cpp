#include "cfstp/dsa_sdp.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace cfstp::dsa {

double acceptance_probability(Cost current, Cost best, const SdpParams& p) {
  if (best.infeasible < current.infeasible) return p.pD;
  if (best.infeasible > current.infeasible) return 0.0;
  if (best.ticks < current.ticks) {
    const double gain = current.ticks > 0 ? static_cast<double>(current.ticks - best.ticks) /
                                                static_cast<double>(current.ticks)
                                          : 1.0;
    return p.pB + std::min(1.0, gain) * (p.pD - p.pB);
  }
  if (best.ticks == current.ticks) return p.pA * p.pC;
  return 0.0;
}

bool sdp_accept(Cost current, Cost best, const SdpParams& params, Rng& rng) {
  const double prob = acceptance_probability(current, best, params);
  if (prob <= 0.0) return false;
  if (prob >= 1.0) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < prob;
}

namespace {

constexpr std::uint64_t kDsaStream = 0xD5A;
constexpr TaskId kNone = std::numeric_limits<TaskId>::max();

struct Participant {
  AgentId agent = 0;
  std::vector<TaskId> domain;
  std::vector<Tick> start;  // aligned with domain
  std::vector<std::size_t> neighbors;
  TaskId choice = kNone;
  std::size_t choice_slot = 0;
  // Cost of the task's current set with this agent toggled, per domain slot.
  std::vector<std::uint64_t> toggled_version;
  std::vector<Cost> toggled_cost;
};

struct TaskSet {
  std::uint64_t version = 1;
  std::vector<ArrivalPlan> members;  // DSA choices, sorted by plan_before
  std::uint64_t cost_version = 0;
  Cost cost;
};

}  // namespace

Protocol::Protocol(const Instance& inst, std::uint64_t seed, Options options)
    : inst_(inst), options_(options) {
  rngs_.reserve(inst.agent_count());
  for (AgentId a = 0; a < inst.agent_count(); ++a) rngs_.emplace_back(derive_seed(seed, {kDsaStream, a}));
}

TickDecisions Protocol::step(TickContext& ctx) {
  const auto& snap = ctx.snapshot;
  const Tick t = snap.tick;
  TickDecisions decisions;

  std::vector<Participant> parts;
  for (std::size_t i = 0; i < snap.variables.size(); ++i) {
    if (snap.domains[i].empty()) continue;
    Participant p;
    p.agent = snap.variables[i];
    p.domain = snap.domains[i];
    const auto from = ctx.world.agents[p.agent].location;
    for (auto v : p.domain) p.start.push_back(inst_.start_tick(p.agent, from, t, v));
    p.toggled_version.assign(p.domain.size(), 0);
    p.toggled_cost.assign(p.domain.size(), Cost{});
    parts.push_back(std::move(p));
  }
  if (parts.empty()) return decisions;

  // Neighbors share at least one task.
  {
    std::vector<std::vector<std::size_t>> by_task(inst_.task_count());
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (auto v : parts[i].domain) by_task[v].push_back(i);
    std::vector<std::size_t> mark(parts.size(), parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      for (auto v : parts[i].domain)
        for (auto j : by_task[v])
          if (j != i && mark[j] != i) {
            mark[j] = i;
            parts[i].neighbors.push_back(j);
          }
      std::sort(parts[i].neighbors.begin(), parts[i].neighbors.end());
    }
  }

  std::vector<TaskSet> sets(inst_.task_count());
  std::vector<std::vector<ArrivalPlan>> committed(inst_.task_count());
  std::vector<char> committed_ready(inst_.task_count(), 0);

  auto committed_of = [&](TaskId v) -> const std::vector<ArrivalPlan>& {
    if (!committed_ready[v]) {
      committed[v] = committed_plans(ctx.world, v, t);
      committed_ready[v] = 1;
    }
    return committed[v];
  };

  auto evaluate = [&](TaskId v, const std::vector<ArrivalPlan>& members, const ArrivalPlan* add,
                      std::optional<AgentId> drop) -> Cost {
    std::vector<ArrivalPlan> plans = committed_of(v);
    for (const auto& m : members)
      if (!drop || m.agent != *drop) plans.push_back(m);
    if (add) plans.push_back(*add);
    if (plans.empty()) return Cost{1, 0};
    std::sort(plans.begin(), plans.end(), plan_before);
    const WorkProgress progress{inst_.task(v).workload, ctx.world.tasks[v].done};
    if (auto done = earliest_completion(inst_, v, progress, t, plans)) return Cost{0, *done};
    return Cost{1, 0};
  };

  auto set_cost = [&](TaskId v) -> Cost {
    auto& s = sets[v];
    if (s.cost_version != s.version) {
      s.cost = evaluate(v, s.members, nullptr, std::nullopt);
      s.cost_version = s.version;
    }
    return s.cost;
  };

  auto toggled = [&](Participant& p, std::size_t slot) -> Cost {
    const TaskId v = p.domain[slot];
    auto& s = sets[v];
    if (p.toggled_version[slot] != s.version) {
      if (p.choice == v) {
        p.toggled_cost[slot] = evaluate(v, s.members, nullptr, p.agent);
      } else {
        const ArrivalPlan self{p.agent, p.start[slot]};
        p.toggled_cost[slot] = evaluate(v, s.members, &self, std::nullopt);
      }
      p.toggled_version[slot] = s.version;
    }
    return p.toggled_cost[slot];
  };

  const std::size_t iterations = options_.iterations.value_or(snap.allocable.size());
  std::uint64_t per_iteration_messages = 0;
  for (const auto& p : parts) per_iteration_messages += p.neighbors.size();

  std::vector<std::uint64_t> sent(parts.size(), 0);
  struct Move {
    std::size_t part;
    TaskId to;
    std::size_t slot;
  };
  std::vector<Move> moves;
  bool settled = false;  // nothing moved and no random draw: later iterations repeat

  for (std::size_t it = 0; it < iterations; ++it) {
    account_messages(ctx.metrics, per_iteration_messages, kDsaMessageBytes);
    if (ctx.trace) {
      for (const auto& p : parts)
        for (auto j : p.neighbors)
          ctx.trace->push_back(TraceRecord{t, NodeAddress::variable(p.agent),
                                           NodeAddress::variable(parts[j].agent), Force::Assignment,
                                           std::nullopt, kDsaMessageBytes});
    }
    // Counters travel with the broadcast, then each agent evaluates its
    // whole domain plus the empty choice.
    for (std::size_t i = 0; i < parts.size(); ++i) sent[i] = ctx.nccc.at(parts[i].agent);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      for (auto j : parts[i].neighbors) ctx.nccc.receive(parts[i].agent, sent[j]);
      ctx.nccc.add(parts[i].agent, parts[i].domain.size() + 1);
    }
    if (settled) continue;

    moves.clear();
    bool drew = false;
    for_each_in_order(ctx, parts.size(), [&](std::size_t i) {
      auto& p = parts[i];
      // Cost of the current choice's factor with and without this agent.
      Cost with_c{}, without_c{};
      if (p.choice != kNone) {
        with_c = set_cost(p.choice);
        without_c = toggled(p, p.choice_slot);
      }
      bool have = false;
      TaskId best_to = kNone;
      std::size_t best_slot = 0;
      Cost best_cur{}, best_alt{};
      auto consider = [&](TaskId to, std::size_t slot, Cost cur, Cost alt) {
        if (!have || alt - cur < best_alt - best_cur) {
          have = true;
          best_to = to;
          best_slot = slot;
          best_cur = cur;
          best_alt = alt;
        }
      };
      if (p.choice != kNone) consider(kNone, 0, with_c, without_c);
      for (std::size_t s = 0; s < p.domain.size(); ++s) {
        const TaskId x = p.domain[s];
        if (x == p.choice) continue;
        const Cost without_x = set_cost(x);
        const Cost with_x = toggled(p, s);
        consider(x, s, with_c + without_x, without_c + with_x);
      }
      if (!have) return;
      if (acceptance_probability(best_cur, best_alt, options_.params) > 0.0) drew = true;
      if (sdp_accept(best_cur, best_alt, options_.params, rngs_[p.agent])) moves.push_back({i, best_to, best_slot});
    });

    if (moves.empty() && !drew) {
      settled = true;
      continue;
    }
    std::sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) { return a.part < b.part; });
    for (const auto& m : moves) {
      auto& p = parts[m.part];
      if (p.choice != kNone) {
        auto& s = sets[p.choice];
        std::erase_if(s.members, [&](const ArrivalPlan& x) { return x.agent == p.agent; });
        ++s.version;
      }
      p.choice = m.to;
      p.choice_slot = m.slot;
      if (m.to != kNone) {
        auto& s = sets[m.to];
        const ArrivalPlan self{p.agent, p.start[m.slot]};
        s.members.insert(std::upper_bound(s.members.begin(), s.members.end(), self, plan_before), self);
        ++s.version;
      }
    }
  }

  // Commit every final choice whose coalition can finish its task.
  std::vector<TaskId> chosen;
  for (const auto& p : parts)
    if (p.choice != kNone) chosen.push_back(p.choice);
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  for (auto v : chosen) {
    if (set_cost(v).infeasible != 0) continue;
    decisions.allocations.push_back(Allocation{v, sets[v].members});
  }
  return decisions;
}

}  // namespace cfstp::dsa
