#include "cfstp/coalition_value.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace cfstp {

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::NDCS: return "NDCS";
    case ValueKind::AgentBased: return "AgentBased";
    case ValueKind::UcNDCS: return "UC_NDCS";
    case ValueKind::UcAgentBased: return "UC_AgentBased";
    case ValueKind::Table: return "table";
  }
  return "?";
}

ValueKind parse_value_kind(std::string_view text) {
  if (text == "NDCS") return ValueKind::NDCS;
  if (text == "AgentBased" || text == "Agent-based") return ValueKind::AgentBased;
  if (text == "UC_NDCS") return ValueKind::UcNDCS;
  if (text == "UC_AgentBased" || text == "UC_Agent-based") return ValueKind::UcAgentBased;
  if (text == "table") return ValueKind::Table;
  throw ParseError("unknown coalition value kind '" + std::string(text) + "'");
}

namespace {

std::uint64_t coalition_seed(std::uint64_t seed, std::uint64_t stream, const AgentSet& c) {
  return combine_seed(derive_seed(seed, {stream}), c.hash());
}

}  // namespace

CoalitionValueModel::CoalitionValueModel(ValueModelSpec spec, std::vector<Tick> deadlines,
                                         std::size_t agent_count)
    : spec_(std::move(spec)), deadlines_(std::move(deadlines)), agent_count_(agent_count) {
  for (auto d : deadlines_) t_max_ = std::max(t_max_, d);

  performance_.assign(agent_count_, 0.0);
  if (spec_.kind == ValueKind::AgentBased || spec_.kind == ValueKind::UcAgentBased) {
    Rng rng(derive_seed(spec_.seed, {value_streams::kAgentPerformance}));
    std::uniform_real_distribution<double> perf(0.0, 10.0);
    for (auto& p : performance_) p = perf(rng);
  }

  if (spec_.kind == ValueKind::Table) {
    for (const auto& e : spec_.table) {
      if (e.task >= deadlines_.size()) throw StructuralError("value table references unknown task");
      if (e.value < 0.0 || !std::isfinite(e.value))
        throw StructuralError("value table entries must be finite and non-negative");
      AgentSet c(agent_count_);
      for (auto a : e.agents) {
        if (a >= agent_count_) throw StructuralError("value table references unknown agent");
        c.insert(a);
      }
      table_[Key{e.task, std::move(c)}] = e.value;
    }
    if (spec_.default_rate < 0.0) throw StructuralError("default_rate must be non-negative");
  }
}

double CoalitionValueModel::agent_performance(AgentId a) const {
  return a < performance_.size() ? performance_[a] : 0.0;
}

std::size_t CoalitionValueModel::cached_entries() const {
  std::lock_guard lock(memo_mutex_);
  return memo_.size();
}

double CoalitionValueModel::value(const AgentSet& coalition, TaskId task) const {
  if (coalition.empty()) return 0.0;
  Key key{task, coalition};
  {
    std::lock_guard lock(memo_mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  const double v = compute(coalition, task);
  std::lock_guard lock(memo_mutex_);
  memo_.emplace(std::move(key), v);
  return v;
}

double CoalitionValueModel::table_value(const AgentSet& coalition, TaskId task) const {
  if (auto it = table_.find(Key{task, coalition}); it != table_.end()) return it->second;
  return spec_.default_rate * static_cast<double>(coalition.size());
}

double CoalitionValueModel::base_value(const AgentSet& coalition, TaskId task) const {
  const auto n = static_cast<double>(coalition.size());
  switch (spec_.kind) {
    case ValueKind::NDCS:
    case ValueKind::UcNDCS: {
      Rng rng(combine_seed(coalition_seed(spec_.seed, value_streams::kNdcs, coalition), task));
      std::normal_distribution<double> draw(n, std::pow(n, 0.25));
      return std::max(0.0, draw(rng));
    }
    case ValueKind::AgentBased:
    case ValueKind::UcAgentBased: {
      // p_a^C depends on the coalition only; one stream per coalition, drawn
      // in ascending member order.
      Rng rng(coalition_seed(spec_.seed, value_streams::kCoalitionPerformance, coalition));
      double sum = 0.0;
      coalition.for_each([&](AgentId a) {
        std::uniform_real_distribution<double> draw(0.0, 2.0 * performance_[a]);
        sum += draw(rng);
      });
      return sum;
    }
    case ValueKind::Table:
      return table_value(coalition, task);
  }
  return 0.0;
}

double CoalitionValueModel::compute(const AgentSet& coalition, TaskId task) const {
  if (coalition.empty()) return 0.0;
  if (task >= deadlines_.size()) throw StructuralError("coalition value queried for unknown task");
  const double mu = base_value(coalition, task);
  if (spec_.kind != ValueKind::UcNDCS && spec_.kind != ValueKind::UcAgentBased) return mu;

  // Urgent: probability gamma_v / (t_max + 1). Congested: |C| / (|A| + 1).
  // Both decrements are drawn relative to the unperturbed value and are part
  // of the memoized value.
  Rng rng(combine_seed(coalition_seed(spec_.seed, value_streams::kPerturbation, coalition), task));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> cut(mu / 10.0, mu / 4.0);
  const double p_urgent =
      static_cast<double>(deadlines_[task]) / static_cast<double>(t_max_ + 1);
  const double p_congested =
      static_cast<double>(coalition.size()) / static_cast<double>(agent_count_ + 1);

  double value = mu;
  const double c1 = coin(rng);
  const double r = cut(rng);
  if (c1 < p_urgent) value -= r;
  const double c2 = coin(rng);
  const double q = cut(rng);
  if (c2 < p_congested) value -= q;
  return std::max(0.0, value);
}

}  // namespace cfstp
