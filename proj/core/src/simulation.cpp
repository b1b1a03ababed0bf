#include "cfstp/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <string>

#include "cfstp/dcts.hpp"

namespace cfstp {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Dcts: return "dcts";
    case Algorithm::DsaSdp: return "dsa-sdp";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "dcts" || text == "D-CTS") return Algorithm::Dcts;
  if (text == "dsa-sdp" || text == "dsa_sdp" || text == "DSA-SDP") return Algorithm::DsaSdp;
  throw ConfigError("unknown algorithm '" + std::string(text) + "'");
}

namespace {

[[noreturn]] void breach(Tick t, const std::string& what) {
  throw InvariantError("tick " + std::to_string(t) + ": " + what);
}

class Kernel {
 public:
  Kernel(const Instance& inst, const RunOptions& options)
      : inst_(inst),
        options_(options),
        world_(WorldState::initial(inst)),
        cache_(inst),
        nccc_(inst.agent_count() + inst.task_count()),
        removal_rng_(derive_seed(options.seed, {0xDE7})) {
    if (options.algorithm == Algorithm::Dcts)
      dcts_.emplace(inst);
    else
      dsa_.emplace(inst, options.seed, options.dsa);
  }

  RunResult run() {
    RunResult result;
    // Nothing to do on a zero workload: done before any agent moves.
    for (TaskId v = 0; v < inst_.task_count(); ++v)
      if (work_satisfied(0.0, inst_.task(v).workload)) {
        world_.tasks[v].status = TaskStatus::Completed;
        ++completed_;
      }
    for (Tick t = 0; t <= inst_.t_max(); ++t) {
      world_.tick = t;
      degrade(t, result);

      const auto snapshot = build_snapshot(inst_, world_, t, cache_);
      TickContext ctx{inst_, world_, snapshot, result.metrics, nccc_,
                      options_.trace ? &result.trace : nullptr,
                      options_.step_order.empty() ? nullptr : &options_.step_order};
      const TickDecisions decisions = dcts_ ? dcts_->step(ctx) : dsa_->step(ctx);

      apply(t, decisions);
      move(t);
      work(t, result.solution);
      expire(t);
      check(t);

      result.completed_per_tick.push_back(completed_);
      result.nccc_per_tick.push_back(nccc_.global());
      result.last_tick = t;
      if (idle()) break;
    }

    for (TaskId v = 0; v < inst_.task_count(); ++v)
      if (world_.tasks[v].status == TaskStatus::Completed) result.solution.completed.push_back(v);
    result.metrics.ncccs = nccc_.global();
    result.metrics.tasks = inst_.task_count();
    result.metrics.completed = result.solution.completed.size();
    if (inst_.task_count() == 0) {
      result.metrics.vacuous = true;
      result.metrics.completed_pct = 100.0;
    } else {
      result.metrics.completed_pct =
          100.0 * static_cast<double>(result.metrics.completed) / static_cast<double>(inst_.task_count());
    }
    if (dcts_) result.protocol_errors = dcts_->protocol_errors();
    return result;
  }

 private:
  void leave_task(AgentId a) {
    auto& s = world_.agents[a];
    if (s.status != AgentStatus::Traveling && s.status != AgentStatus::Working) return;
    std::erase(world_.committed[s.task], a);
  }

  void free_at(AgentId a, LocationId where) {
    auto& s = world_.agents[a];
    s.status = AgentStatus::Free;
    s.location = where;
  }

  void degrade(Tick t, RunResult& result) {
    if (!options_.degradation) return;
    std::uint32_t n = options_.degradation->at(t);
    while (n-- > 0) {
      std::vector<AgentId> alive;
      for (AgentId a = 0; a < inst_.agent_count(); ++a)
        if (world_.alive(a)) alive.push_back(a);
      if (alive.empty()) return;
      std::uniform_int_distribution<std::size_t> pick(0, alive.size() - 1);
      const AgentId a = alive[pick(removal_rng_)];
      leave_task(a);
      world_.agents[a].status = AgentStatus::Removed;
      ++result.removed_agents;
    }
  }

  void apply(Tick t, const TickDecisions& d) {
    for (auto v : d.uncompletable) {
      if (!world_.open(v)) breach(t, "task " + std::to_string(v) + " declared uncompletable twice");
      world_.tasks[v].status = TaskStatus::Uncompletable;
      release(v);
    }
    for (const auto& alloc : d.allocations) {
      const TaskId v = alloc.task;
      if (!world_.open(v)) breach(t, "allocation to closed task " + std::to_string(v));
      for (const auto& p : alloc.agents) {
        auto& s = world_.agents[p.agent];
        if (s.status != AgentStatus::Free) breach(t, "allocation of busy agent " + std::to_string(p.agent));
        if (p.start < t) breach(t, "allocation starting in the past");
        s.task = v;
        s.start = p.start;
        s.status = AgentStatus::Traveling;
        auto& c = world_.committed[v];
        c.insert(std::upper_bound(c.begin(), c.end(), p.agent), p.agent);
      }
      if (!alloc.agents.empty()) world_.tasks[v].status = TaskStatus::Working;
    }
  }

  // Committed agents stop: those on site become free there, travelers are
  // freed when they arrive.
  void release(TaskId v) {
    const LocationId where = inst_.task(v).location;
    for (auto a : world_.committed[v])
      if (world_.agents[a].status == AgentStatus::Working) free_at(a, where);
    world_.committed[v].clear();
  }

  void move(Tick t) {
    for (AgentId a = 0; a < inst_.agent_count(); ++a) {
      auto& s = world_.agents[a];
      if (s.status != AgentStatus::Traveling || s.start > t) continue;
      const LocationId where = inst_.task(s.task).location;
      const bool still_mine = world_.open(s.task) &&
                              std::binary_search(world_.committed[s.task].begin(),
                                                 world_.committed[s.task].end(), a);
      if (still_mine) {
        s.status = AgentStatus::Working;
        s.location = where;
      } else {
        free_at(a, where);
      }
    }
  }

  void work(Tick t, Solution& solution) {
    for (TaskId v = 0; v < inst_.task_count(); ++v) {
      if (world_.tasks[v].status != TaskStatus::Working) continue;
      AgentSet coalition(inst_.agent_count());
      for (auto a : world_.committed[v])
        if (world_.agents[a].status == AgentStatus::Working) coalition.insert(a);
      if (coalition.empty()) continue;
      if (t > inst_.task(v).deadline) breach(t, "work after the deadline of task " + std::to_string(v));
      world_.tasks[v].done += inst_.value(coalition, v);
      solution.assignments.push_back(WorkAssignment{v, t, std::move(coalition)});
      if (work_satisfied(world_.tasks[v].done, inst_.task(v).workload)) {
        world_.tasks[v].status = TaskStatus::Completed;
        ++completed_;
        release(v);
      }
    }
  }

  void expire(Tick t) {
    for (TaskId v = 0; v < inst_.task_count(); ++v) {
      if (!world_.open(v) || t < inst_.task(v).deadline) continue;
      world_.tasks[v].status = TaskStatus::Expired;
      release(v);
    }
  }

  void check(Tick t) {
    for (AgentId a = 0; a < inst_.agent_count(); ++a) {
      const auto& s = world_.agents[a];
      if (s.status == AgentStatus::Traveling && s.start <= t) breach(t, "traveler past its start tick");
      if (s.status == AgentStatus::Working && s.location != inst_.task(s.task).location)
        breach(t, "working agent away from its task");
    }
    for (TaskId v = 0; v < inst_.task_count(); ++v) {
      const auto& ts = world_.tasks[v];
      if (ts.status == TaskStatus::Completed && !work_satisfied(ts.done, inst_.task(v).workload))
        breach(t, "completed task below its workload");
      if (!world_.open(v) && !world_.committed[v].empty()) breach(t, "closed task still has agents");
    }
  }

  bool idle() const {
    for (TaskId v = 0; v < inst_.task_count(); ++v)
      if (world_.open(v)) return false;
    for (const auto& s : world_.agents)
      if (s.status == AgentStatus::Traveling || s.status == AgentStatus::Working) return false;
    return true;
  }

  const Instance& inst_;
  const RunOptions& options_;
  WorldState world_;
  DomainCache cache_;
  NcccCounter nccc_;
  Rng removal_rng_;
  std::optional<dcts::Protocol> dcts_;
  std::optional<dsa::Protocol> dsa_;
  std::size_t completed_ = 0;
};

}  // namespace

RunResult run(const Instance& inst, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  RunResult result = Kernel(inst, options).run();
  result.metrics.cpu_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace cfstp
