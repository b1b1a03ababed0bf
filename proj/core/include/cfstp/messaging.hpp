#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "cfstp/types.hpp"

namespace cfstp {

// Node addresses are 8 bytes on the wire: kind in the high word, index low.
struct NodeAddress {
  enum class Kind : std::uint32_t { Variable = 1, Factor = 2, None = 0xFFFFFFFF };
  Kind kind = Kind::None;
  std::uint32_t index = 0;

  static NodeAddress variable(AgentId a) { return {Kind::Variable, a}; }
  static NodeAddress factor(TaskId v) { return {Kind::Factor, v}; }
  static NodeAddress none() { return {Kind::None, 0xFFFFFFFF}; }

  std::uint64_t raw() const { return (std::uint64_t{static_cast<std::uint32_t>(kind)} << 32) | index; }
  static NodeAddress from_raw(std::uint64_t raw);

  friend auto operator<=>(const NodeAddress&, const NodeAddress&) = default;
};

std::ostream& operator<<(std::ostream& os, const NodeAddress& a);

// assignable/allocate belong to D-CTS; assignment is the DSA-SDP value
// broadcast, which carries only the chosen task's address.
enum class Force : std::uint8_t { Assignable = 1, Allocate = 2, Assignment = 3 };

std::string_view to_string(Force f);

struct Envelope {
  NodeAddress sender;
  NodeAddress receiver;
  Force force = Force::Allocate;
  std::optional<std::uint32_t> payload;  // s_i for assignable
  NodeAddress subject;                   // chosen task for assignment
  std::uint64_t nccc = 0;                // piggybacked counter, not on the wire
};

// LEB128; 1 byte below 2^7, at most 4 bytes. Larger values are refused.
inline constexpr std::uint32_t kMaxVarint = (1U << 28) - 1;
std::size_t varint_size(std::uint32_t value);
void encode_varint(std::uint32_t value, std::vector<std::uint8_t>& out);
std::uint32_t decode_varint(std::span<const std::uint8_t> in, std::size_t& pos);

// Bytes of the encoded message (validates the envelope).
std::size_t wire_size(const Envelope& e);
std::vector<std::uint8_t> encode(const Envelope& e);
// Inverse of encode for the wire fields; the receiver is supplied by the
// transport.
Envelope decode(std::span<const std::uint8_t> bytes, NodeAddress receiver);

inline constexpr std::size_t kAddressBytes = 8;
inline constexpr std::size_t kDsaMessageBytes = kAddressBytes;

struct TraceRecord {
  Tick tick = 0;
  NodeAddress sender;
  NodeAddress receiver;
  Force force = Force::Allocate;
  std::optional<std::uint32_t> payload;
  std::size_t bytes = 0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// tick sender receiver force payload bytes ("-" for no payload).
void write_trace(std::ostream& out, std::span<const TraceRecord> trace);

struct RunMetrics {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  std::uint64_t ncccs = 0;
  double completed_pct = 0.0;
  double cpu_ms = 0.0;
  std::size_t completed = 0;
  std::size_t tasks = 0;
  bool vacuous = false;  // no tasks: completion reported as 100%
};

void account_message(RunMetrics& metrics, const Envelope& e);
// Bulk form for protocols that count messages without materializing them.
void account_messages(RunMetrics& metrics, std::uint64_t count, std::size_t bytes_each);

// Non-concurrent constraint checks: each node counts its own checks; a
// receiver synchronizes to max(own, piggyback) and the run total is the
// maximum over nodes.
class NcccCounter {
 public:
  explicit NcccCounter(std::size_t nodes = 0) : counts_(nodes, 0) {}

  void resize(std::size_t nodes) { counts_.resize(nodes, 0); }
  void add(std::size_t node, std::uint64_t checks) { counts_[node] += checks; }
  void receive(std::size_t node, std::uint64_t piggyback) {
    if (piggyback > counts_[node]) counts_[node] = piggyback;
  }
  std::uint64_t at(std::size_t node) const { return counts_[node]; }
  std::uint64_t global() const;

 private:
  std::vector<std::uint64_t> counts_;
};

// Synchronous one-round transport: everything posted in a sub-round is
// delivered together, ordered by (receiver, sender) so the step order of
// the senders never shows.
class MessageBus {
 public:
  void post(Envelope e) { outbox_.push_back(std::move(e)); }

  // Accounts, optionally traces and returns the round's messages sorted.
  std::vector<Envelope> deliver(Tick tick, RunMetrics& metrics, std::vector<TraceRecord>* trace);

  bool empty() const { return outbox_.empty(); }

 private:
  std::vector<Envelope> outbox_;
};

}  // namespace cfstp
