#pragma once

#include <cstdint>
#include <mutex>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cfstp/agent_set.hpp"
#include "cfstp/types.hpp"

namespace cfstp {

enum class ValueKind { NDCS, AgentBased, UcNDCS, UcAgentBased, Table };

std::string_view to_string(ValueKind kind);
ValueKind parse_value_kind(std::string_view text);

struct ValueTableEntry {
  std::vector<AgentId> agents;
  TaskId task = 0;
  double value = 0.0;
};

struct ValueModelSpec {
  ValueKind kind = ValueKind::NDCS;
  std::uint64_t seed = 0;
  // Table kind only. Coalitions missing from the table are worth
  // default_rate * |C|.
  std::vector<ValueTableEntry> table;
  double default_rate = 0.0;
};

// u(C, v): per-tick work coalition C performs on task v.
//
// Sampled kinds are pure functions of (seed, C, v): each value is drawn from
// a generator seeded by hashing the tuple, so the memo table is only a cache
// and query order never changes a value. The full table over P(A) x V is never
// materialized.
class CoalitionValueModel {
 public:
  CoalitionValueModel(ValueModelSpec spec, std::vector<Tick> deadlines, std::size_t agent_count);

  CoalitionValueModel(const CoalitionValueModel&) = delete;
  CoalitionValueModel& operator=(const CoalitionValueModel&) = delete;

  double value(const AgentSet& coalition, TaskId task) const;

  // Same value, bypassing the memo.
  double compute(const AgentSet& coalition, TaskId task) const;

  const ValueModelSpec& spec() const { return spec_; }
  std::size_t agent_count() const { return agent_count_; }

  // Individual performance p_a of the agent-based kinds (0 for other kinds).
  double agent_performance(AgentId a) const;

  std::size_t cached_entries() const;

 private:
  struct Key {
    TaskId task;
    AgentSet coalition;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(combine_seed(k.coalition.hash(), k.task));
    }
  };

  double base_value(const AgentSet& coalition, TaskId task) const;
  double table_value(const AgentSet& coalition, TaskId task) const;

  ValueModelSpec spec_;
  std::vector<Tick> deadlines_;
  Tick t_max_ = 0;
  std::size_t agent_count_ = 0;
  std::vector<double> performance_;
  std::unordered_map<Key, double, KeyHash> table_;

  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<Key, double, KeyHash> memo_;
};

namespace value_streams {
// Stream tags used to derive per-draw seeds; exposed so tests can replay a
// draw by hand.
inline constexpr std::uint64_t kNdcs = 1;
inline constexpr std::uint64_t kAgentPerformance = 2;
inline constexpr std::uint64_t kCoalitionPerformance = 3;
inline constexpr std::uint64_t kPerturbation = 4;
}  // namespace value_streams

}  // namespace cfstp
