#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cfstp/dsa_sdp.hpp"
#include "cfstp/exact.hpp"
#include "cfstp/messaging.hpp"
#include "cfstp/scenario.hpp"

namespace cfstp {

enum class Algorithm { Dcts, DsaSdp };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view text);

struct RunOptions {
  Algorithm algorithm = Algorithm::Dcts;
  std::uint64_t seed = 0;
  std::optional<DegradationSchedule> degradation;
  bool trace = false;
  // Permutation used to step nodes within each sub-round (testing hook).
  std::vector<std::size_t> step_order;
  dsa::Options dsa;
};

struct RunResult {
  Solution solution;
  RunMetrics metrics;
  std::vector<std::size_t> completed_per_tick;  // after each simulated tick
  std::vector<std::uint64_t> nccc_per_tick;
  std::vector<TraceRecord> trace;
  Tick last_tick = -1;          // last simulated tick
  std::size_t removed_agents = 0;
  std::uint64_t protocol_errors = 0;
};

// Runs one problem from tick 0 to t_max (or until nothing is left to do).
// Each tick: degradation, snapshot, protocol, allocation, movement, work,
// expiry, metrics. Throws InvariantError if the world ever reaches a state
// its own rules forbid.
RunResult run(const Instance& inst, const RunOptions& options);

}  // namespace cfstp
