#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cfstp {

using AgentId = std::uint32_t;
using TaskId = std::uint32_t;
using LocationId = std::uint32_t;

// Discrete time. Ticks start at 0; every duration in the model is a whole
// number of ticks.
using Tick = std::int64_t;

// Completion tolerance on accumulated work. A task counts as completed when
// done >= required - kWorkTolerance * max(1, required). The same test is used
// by the simulator, the validator and the exact solver, so per-tick summation
// order never decides feasibility on its own.
inline constexpr double kWorkTolerance = 1e-9;

inline bool work_satisfied(double done, double required) {
  const double scale = required > 1.0 ? required : 1.0;
  return done >= required - kWorkTolerance * scale;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dangling ids, out-of-range coordinates, malformed instance data.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Input files and configuration that cannot be parsed or fail a schema check.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// The exact solver refuses instances above its enumeration budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// A simulation reached a state its own invariants forbid. Never recoverable.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace cfstp
