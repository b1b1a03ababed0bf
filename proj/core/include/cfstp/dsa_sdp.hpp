#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "cfstp/protocol.hpp"
#include "cfstp/random.hpp"

namespace cfstp::dsa {

struct SdpParams {
  double pA = 0.6;
  double pB = 0.15;
  double pC = 0.4;
  double pD = 0.8;
};

// Local cost over a set of task factors, compared lexicographically: first
// the number of tasks that cannot finish, then the sum of the completion
// ticks of those that can.
struct Cost {
  std::int64_t infeasible = 0;
  std::int64_t ticks = 0;

  friend auto operator<=>(const Cost&, const Cost&) = default;
  friend Cost operator+(Cost a, Cost b) { return {a.infeasible + b.infeasible, a.ticks + b.ticks}; }
  friend Cost operator-(Cost a, Cost b) { return {a.infeasible - b.infeasible, a.ticks - b.ticks}; }
};

// Probability of moving from `current` to `best`:
//   fewer infeasible tasks      -> pD
//   same count, earlier finish  -> pB + gain * (pD - pB), gain = relative time saved
//   equal                       -> pA * pC
//   worse                       -> 0
double acceptance_probability(Cost current, Cost best, const SdpParams& params);
bool sdp_accept(Cost current, Cost best, const SdpParams& params, Rng& rng);

struct Options {
  SdpParams params;
  // Iterations per tick; default is the number of open tasks.
  std::optional<std::size_t> iterations;
};

class Protocol {
 public:
  Protocol(const Instance& inst, std::uint64_t seed, Options options = {});

  TickDecisions step(TickContext& ctx);

  const Options& options() const { return options_; }

 private:
  const Instance& inst_;
  Options options_;
  std::vector<Rng> rngs_;  // one stream per agent
};

}  // namespace cfstp::dsa
