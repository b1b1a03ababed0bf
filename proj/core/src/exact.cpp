#include "cfstp/exact.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace cfstp {

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::AfterDeadline: return "after_deadline";
    case ViolationKind::EmptyCoalition: return "empty_coalition";
    case ViolationKind::MultipleCoalitions: return "multiple_coalitions";
    case ViolationKind::WorkloadNotMet: return "workload_not_met";
    case ViolationKind::BeforeArrival: return "before_arrival";
    case ViolationKind::TravelConflict: return "travel_conflict";
    case ViolationKind::AgentDoubleBooked: return "agent_double_booked";
  }
  return "?";
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
}

std::vector<std::pair<Tick, TaskId>> Solution::schedule_of(AgentId a) const {
  std::vector<std::pair<Tick, TaskId>> out;
  for (const auto& w : assignments)
    if (w.coalition.contains(a)) out.emplace_back(w.tick, w.task);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// validate

namespace {

void check_structure(const Instance& inst, const Solution& sol) {
  for (const auto& w : sol.assignments) {
    if (w.task >= inst.task_count())
      throw StructuralError("assignment references unknown task " + std::to_string(w.task));
    if (w.tick < 0) throw StructuralError("assignment has a negative tick");
    w.coalition.for_each([&](AgentId a) {
      if (a >= inst.agent_count())
        throw StructuralError("assignment references unknown agent " + std::to_string(a));
    });
  }
  for (auto v : sol.completed)
    if (v >= inst.task_count())
      throw StructuralError("completed set references unknown task " + std::to_string(v));
}

}  // namespace

ValidationReport validate(const Instance& inst, const Solution& sol) {
  check_structure(inst, sol);
  ValidationReport report;
  auto add = [&](ViolationKind k, TaskId v, Tick t, std::optional<AgentId> a, std::string d) {
    report.violations.push_back(Violation{k, v, t, a, std::move(d)});
  };

  // Deadline bound on the indicator variables and non-empty coalitions.
  for (const auto& w : sol.assignments) {
    if (w.tick > inst.task(w.task).deadline)
      add(ViolationKind::AfterDeadline, w.task, w.tick, std::nullopt, "work after deadline");
    if (w.coalition.empty())
      add(ViolationKind::EmptyCoalition, w.task, w.tick, std::nullopt, "empty coalition");
  }

  // (a) at most one coalition per (task, tick).
  std::map<std::pair<TaskId, Tick>, std::size_t> per_slot;
  for (const auto& w : sol.assignments) ++per_slot[{w.task, w.tick}];
  for (const auto& [slot, n] : per_slot)
    if (n > 1)
      add(ViolationKind::MultipleCoalitions, slot.first, slot.second, std::nullopt,
          std::to_string(n) + " coalitions on one task and tick");

  // (b) completed tasks received at least their workload, summed in tick order.
  {
    std::vector<std::vector<const WorkAssignment*>> by_task(inst.task_count());
    for (const auto& w : sol.assignments) by_task[w.task].push_back(&w);
    std::vector<TaskId> completed = sol.completed;
    std::sort(completed.begin(), completed.end());
    completed.erase(std::unique(completed.begin(), completed.end()), completed.end());
    for (auto v : completed) {
      auto& list = by_task[v];
      std::stable_sort(list.begin(), list.end(),
                       [](const WorkAssignment* x, const WorkAssignment* y) { return x->tick < y->tick; });
      double done = 0.0;
      for (const auto* w : list) done += inst.value(w->coalition, v);
      if (!work_satisfied(done, inst.task(v).workload))
        add(ViolationKind::WorkloadNotMet, v, inst.task(v).deadline, std::nullopt,
            "work " + std::to_string(done) + " < workload " + std::to_string(inst.task(v).workload));
    }
  }

  // (c) nobody works before the slowest member of the coalition can have
  // arrived from its initial location.
  for (const auto& w : sol.assignments) {
    const auto dest = inst.task(w.task).location;
    Tick lambda = 0;
    std::optional<AgentId> slowest;
    w.coalition.for_each([&](AgentId a) {
      const Tick r = inst.travel_time(a, inst.agent(a).initial_location, dest);
      if (!slowest || r > lambda) {
        lambda = r;
        slowest = a;
      }
    });
    if (slowest && w.tick < lambda + inst.start_delay())
      add(ViolationKind::BeforeArrival, w.task, w.tick, slowest,
          "work at " + std::to_string(w.tick) + " before arrival at " + std::to_string(lambda));
  }

  // (d)/(e) per agent: no two coalitions on one tick, and consecutive work on
  // different tasks leaves room to travel. Checking at each switch point
  // against the latest earlier tick of every other visited task covers all
  // ordered pairs.
  {
    std::vector<std::vector<std::pair<Tick, TaskId>>> entries(inst.agent_count());
    for (const auto& w : sol.assignments)
      w.coalition.for_each([&](AgentId a) { entries[a].emplace_back(w.tick, w.task); });
    for (AgentId a = 0; a < inst.agent_count(); ++a) {
      auto& list = entries[a];
      if (list.empty()) continue;
      std::sort(list.begin(), list.end());
      for (std::size_t i = 1; i < list.size(); ++i)
        if (list[i].first == list[i - 1].first)
          add(ViolationKind::AgentDoubleBooked, list[i].second, list[i].first, a,
              "agent in two coalitions on one tick");

      std::vector<std::pair<TaskId, Tick>> last;  // task -> latest tick seen
      for (std::size_t i = 0; i < list.size(); ++i) {
        const auto [t2, v2] = list[i];
        const bool switch_point = i == 0 || list[i - 1].second != v2;
        if (switch_point) {
          for (const auto& [v1, t1] : last) {
            if (v1 == v2 || t1 >= t2) continue;
            const Tick rho = inst.travel_time(a, inst.task(v1).location, inst.task(v2).location);
            if (t1 + rho >= t2)
              add(ViolationKind::TravelConflict, v2, t2, a,
                  "task " + std::to_string(v1) + " at " + std::to_string(t1) + " then task " +
                      std::to_string(v2) + " at " + std::to_string(t2) + " with travel " +
                      std::to_string(rho));
          }
        }
        auto it = std::find_if(last.begin(), last.end(), [v = v2](const auto& p) { return p.first == v; });
        if (it == last.end())
          last.emplace_back(v2, t2);
        else
          it->second = t2;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// solve_optimal

namespace {

constexpr Tick kFar = std::numeric_limits<Tick>::min() / 4;

struct AgentPos {
  int loc = -1;     // -1: initial location, else index into the target subset
  Tick last = kFar; // last work tick (meaningless at the initial location)
};

class SubsetSearch {
 public:
  SubsetSearch(const Instance& inst, std::vector<TaskId> targets)
      : inst_(inst), targets_(std::move(targets)), n_(inst.agent_count()), m_(targets_.size()) {
    origin_.assign(n_ * m_, 0);
    hop_.assign(n_ * m_ * m_, 0);
    max_hop_.assign(n_ * m_, 0);
    for (std::size_t a = 0; a < n_; ++a) {
      const auto home = inst.agent(static_cast<AgentId>(a)).initial_location;
      for (std::size_t j = 0; j < m_; ++j) {
        const auto lj = inst.task(targets_[j]).location;
        origin_[a * m_ + j] = inst.travel_time(static_cast<AgentId>(a), home, lj) + inst.start_delay();
        for (std::size_t k = 0; k < m_; ++k) {
          const Tick r = inst.travel_time(static_cast<AgentId>(a), lj, inst.task(targets_[k]).location);
          hop_[(a * m_ + j) * m_ + k] = r;
          max_hop_[a * m_ + j] = std::max(max_hop_[a * m_ + j], r);
        }
      }
    }
    upper_rate_.assign(m_, 0.0);
    for (std::size_t j = 0; j < m_; ++j) {
      for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n_); ++mask) {
        AgentSet c(n_);
        for (std::size_t a = 0; a < n_; ++a)
          if (mask >> a & 1U) c.insert(static_cast<AgentId>(a));
        upper_rate_[j] = std::max(upper_rate_[j], inst.value(c, targets_[j]));
      }
    }
  }

  // Finds a schedule completing every target, or returns false.
  bool run(std::vector<WorkAssignment>& out) {
    std::vector<AgentPos> pos(n_);
    std::vector<double> done(m_, 0.0);
    path_.clear();
    failed_.clear();
    if (!dfs(0, pos, done, 0)) return false;
    for (const auto& [t, choice] : path_) {
      for (std::size_t j = 0; j < m_; ++j) {
        AgentSet c(n_);
        for (std::size_t a = 0; a < n_; ++a)
          if (choice[a] == static_cast<int>(j)) c.insert(static_cast<AgentId>(a));
        if (!c.empty()) out.push_back(WorkAssignment{targets_[j], t, std::move(c)});
      }
    }
    return true;
  }

 private:
  Tick earliest(std::size_t a, const AgentPos& p, std::size_t j) const {
    if (p.loc < 0) return origin_[a * m_ + j];
    return p.last + hop_[(a * m_ + static_cast<std::size_t>(p.loc)) * m_ + j] + 1;
  }

  std::string key(Tick t, const std::vector<AgentPos>& pos, const std::vector<double>& done,
                  std::uint64_t mask) const {
    std::string k;
    auto put = [&k](std::uint64_t x) { k.append(reinterpret_cast<const char*>(&x), sizeof x); };
    put(static_cast<std::uint64_t>(t));
    put(mask);
    for (std::size_t a = 0; a < n_; ++a) {
      const auto& p = pos[a];
      Tick last = p.last;
      if (p.loc < 0 || t > p.last + max_hop_[a * m_ + static_cast<std::size_t>(p.loc)]) last = kFar;
      put(static_cast<std::uint64_t>(p.loc));
      put(static_cast<std::uint64_t>(last));
    }
    for (std::size_t j = 0; j < m_; ++j)
      if (!(mask >> j & 1U)) put(std::bit_cast<std::uint64_t>(done[j]));
    return k;
  }

  bool dfs(Tick t, std::vector<AgentPos>& pos, std::vector<double>& done, std::uint64_t mask) {
    const std::uint64_t all = (std::uint64_t{1} << m_) - 1;
    if (mask == all) return true;
    for (std::size_t j = 0; j < m_; ++j) {
      if (mask >> j & 1U) continue;
      const auto& task = inst_.task(targets_[j]);
      if (t > task.deadline) return false;
      const double horizon = static_cast<double>(task.deadline - t + 1);
      // Sound bound: the best rate any coalition reaches, every remaining tick.
      if (!work_satisfied(done[j] + horizon * upper_rate_[j] * (1.0 + 1e-12), task.workload)) return false;
    }
    auto k = key(t, pos, done, mask);
    if (failed_.count(k)) return false;

    // Options per agent: tasks it can work on now, then idle (-1).
    std::vector<std::vector<int>> options(n_);
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t j = 0; j < m_; ++j) {
        if (mask >> j & 1U) continue;
        if (t > inst_.task(targets_[j]).deadline) continue;
        if (earliest(a, pos[a], j) <= t) options[a].push_back(static_cast<int>(j));
      }
      options[a].push_back(-1);
    }

    std::vector<int> choice(n_, -1);
    bool found = false;
    enumerate(0, options, choice, [&](const std::vector<int>& c) {
      std::vector<AgentPos> next_pos = pos;
      std::vector<double> next_done = done;
      std::uint64_t next_mask = mask;
      for (std::size_t j = 0; j < m_; ++j) {
        AgentSet coalition(n_);
        for (std::size_t a = 0; a < n_; ++a)
          if (c[a] == static_cast<int>(j)) coalition.insert(static_cast<AgentId>(a));
        if (coalition.empty()) continue;
        next_done[j] += inst_.value(coalition, targets_[j]);
        if (work_satisfied(next_done[j], inst_.task(targets_[j]).workload)) next_mask |= std::uint64_t{1} << j;
      }
      for (std::size_t a = 0; a < n_; ++a)
        if (c[a] >= 0) next_pos[a] = AgentPos{c[a], t};
      path_.emplace_back(t, c);
      if (dfs(t + 1, next_pos, next_done, next_mask)) return true;
      path_.pop_back();
      return false;
    }, found);
    if (!found) failed_.insert(std::move(k));
    return found;
  }

  template <typename Visit>
  void enumerate(std::size_t a, const std::vector<std::vector<int>>& options, std::vector<int>& choice,
                 Visit&& visit, bool& found) {
    if (found) return;
    if (a == n_) {
      if (visit(choice)) found = true;
      return;
    }
    for (int o : options[a]) {
      choice[a] = o;
      enumerate(a + 1, options, choice, visit, found);
      if (found) return;
    }
  }

  const Instance& inst_;
  std::vector<TaskId> targets_;
  std::size_t n_;
  std::size_t m_;
  std::vector<Tick> origin_;
  std::vector<Tick> hop_;
  std::vector<Tick> max_hop_;
  std::vector<double> upper_rate_;
  std::vector<std::pair<Tick, std::vector<int>>> path_;
  std::unordered_set<std::string> failed_;
};

// Subsets of {0..n-1} of a given size in lexicographic order.
template <typename Visit>
bool for_each_subset(std::size_t n, std::size_t size, Visit&& visit) {
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  while (true) {
    if (visit(idx)) return true;
    std::size_t i = size;
    while (i > 0 && idx[i - 1] == n - size + (i - 1)) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
}

constexpr std::size_t kMaxAgents = 16;
constexpr std::size_t kMaxCandidates = 24;

}  // namespace

Solution solve_optimal(const Instance& inst, OptimalOptions options) {
  const auto size = static_cast<std::int64_t>(inst.agent_count()) *
                    static_cast<std::int64_t>(inst.task_count()) * std::max<Tick>(inst.t_max(), 1);
  if (size > options.budget)
    throw BudgetExceeded("instance size |A|*|V|*t_max = " + std::to_string(size) +
                         " exceeds the exact-solver budget " + std::to_string(options.budget));
  if (inst.agent_count() > kMaxAgents)
    throw BudgetExceeded("exact solver handles at most " + std::to_string(kMaxAgents) + " agents");

  Solution best;
  std::vector<TaskId> trivial;
  std::vector<TaskId> candidates;
  for (TaskId v = 0; v < inst.task_count(); ++v) {
    if (work_satisfied(0.0, inst.task(v).workload))
      trivial.push_back(v);
    else
      candidates.push_back(v);
  }

  // Drop tasks that cannot be completed even alone.
  std::vector<TaskId> feasible_alone;
  for (auto v : candidates) {
    std::vector<WorkAssignment> scratch;
    if (SubsetSearch(inst, {v}).run(scratch)) feasible_alone.push_back(v);
  }
  if (feasible_alone.size() > kMaxCandidates)
    throw BudgetExceeded("exact solver handles at most " + std::to_string(kMaxCandidates) +
                         " individually completable tasks");

  std::vector<WorkAssignment> schedule;
  std::vector<TaskId> chosen;
  for (std::size_t s = feasible_alone.size(); s > 0; --s) {
    const bool hit = for_each_subset(feasible_alone.size(), s, [&](const std::vector<std::size_t>& idx) {
      std::vector<TaskId> subset;
      for (auto i : idx) subset.push_back(feasible_alone[i]);
      std::vector<WorkAssignment> out;
      if (!SubsetSearch(inst, subset).run(out)) return false;
      schedule = std::move(out);
      chosen = std::move(subset);
      return true;
    });
    if (hit) break;
  }

  best.assignments = std::move(schedule);
  best.completed = trivial;
  best.completed.insert(best.completed.end(), chosen.begin(), chosen.end());
  std::sort(best.completed.begin(), best.completed.end());
  std::sort(best.assignments.begin(), best.assignments.end(), [](const auto& x, const auto& y) {
    return std::tie(x.tick, x.task) < std::tie(y.tick, y.task);
  });
  return best;
}

}  // namespace cfstp
