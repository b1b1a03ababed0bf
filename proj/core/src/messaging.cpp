#include "cfstp/messaging.hpp"

#include <algorithm>
#include <string>

namespace cfstp {

NodeAddress NodeAddress::from_raw(std::uint64_t raw) {
  NodeAddress a;
  const auto kind = static_cast<std::uint32_t>(raw >> 32);
  a.index = static_cast<std::uint32_t>(raw & 0xFFFFFFFFULL);
  switch (kind) {
    case 1: a.kind = Kind::Variable; break;
    case 2: a.kind = Kind::Factor; break;
    case 0xFFFFFFFF: a.kind = Kind::None; break;
    default: throw ParseError("unknown node address kind " + std::to_string(kind));
  }
  return a;
}

std::ostream& operator<<(std::ostream& os, const NodeAddress& a) {
  switch (a.kind) {
    case NodeAddress::Kind::Variable: return os << 'x' << a.index;
    case NodeAddress::Kind::Factor: return os << 'f' << a.index;
    case NodeAddress::Kind::None: return os << "none";
  }
  return os;
}

std::string_view to_string(Force f) {
  switch (f) {
    case Force::Assignable: return "assignable";
    case Force::Allocate: return "allocate";
    case Force::Assignment: return "assignment";
  }
  return "?";
}

std::size_t varint_size(std::uint32_t value) {
  if (value > kMaxVarint) throw Error("varint payload " + std::to_string(value) + " exceeds 4 bytes");
  std::size_t n = 1;
  while (value >= 0x80) {
    value >>= 7;
    ++n;
  }
  return n;
}

void encode_varint(std::uint32_t value, std::vector<std::uint8_t>& out) {
  (void)varint_size(value);
  while (value >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(value | 0x80));
    value >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(value));
}

std::uint32_t decode_varint(std::span<const std::uint8_t> in, std::size_t& pos) {
  std::uint32_t value = 0;
  for (int shift = 0; shift < 28; shift += 7) {
    if (pos >= in.size()) throw ParseError("truncated varint");
    const std::uint8_t b = in[pos++];
    value |= static_cast<std::uint32_t>(b & 0x7F) << shift;
    if ((b & 0x80) == 0) return value;
  }
  throw ParseError("varint longer than 4 bytes");
}

namespace {

void check(const Envelope& e) {
  switch (e.force) {
    case Force::Assignable:
      if (!e.payload) throw Error("assignable message without payload");
      break;
    case Force::Allocate:
      if (e.payload) throw Error("allocate message with payload");
      break;
    case Force::Assignment:
      if (e.payload) throw Error("assignment message with payload");
      break;
  }
}

void put_address(std::uint64_t raw, std::vector<std::uint8_t>& out) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(raw >> (8 * i)));
}

std::uint64_t get_address(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw ParseError("truncated address");
  std::uint64_t raw = 0;
  for (int i = 0; i < 8; ++i) raw |= std::uint64_t{in[pos + static_cast<std::size_t>(i)]} << (8 * i);
  pos += 8;
  return raw;
}

}  // namespace

std::size_t wire_size(const Envelope& e) {
  check(e);
  if (e.force == Force::Assignment) return kDsaMessageBytes;
  return kAddressBytes + 1 + (e.payload ? varint_size(*e.payload) : 0);
}

std::vector<std::uint8_t> encode(const Envelope& e) {
  check(e);
  std::vector<std::uint8_t> out;
  if (e.force == Force::Assignment) {
    put_address(e.subject.raw(), out);
    return out;
  }
  put_address(e.sender.raw(), out);
  out.push_back(static_cast<std::uint8_t>(e.force));
  if (e.payload) encode_varint(*e.payload, out);
  return out;
}

Envelope decode(std::span<const std::uint8_t> bytes, NodeAddress receiver) {
  Envelope e;
  e.receiver = receiver;
  std::size_t pos = 0;
  const auto raw = get_address(bytes, pos);
  if (bytes.size() == kDsaMessageBytes) {
    e.force = Force::Assignment;
    e.subject = NodeAddress::from_raw(raw);
    return e;
  }
  e.sender = NodeAddress::from_raw(raw);
  if (pos >= bytes.size()) throw ParseError("missing force flag");
  const auto flag = bytes[pos++];
  if (flag == static_cast<std::uint8_t>(Force::Assignable)) {
    e.force = Force::Assignable;
    e.payload = decode_varint(bytes, pos);
  } else if (flag == static_cast<std::uint8_t>(Force::Allocate)) {
    e.force = Force::Allocate;
  } else {
    throw ParseError("unknown force flag " + std::to_string(flag));
  }
  if (pos != bytes.size()) throw ParseError("trailing bytes after message");
  return e;
}

void write_trace(std::ostream& out, std::span<const TraceRecord> trace) {
  for (const auto& r : trace) {
    out << r.tick << ' ' << r.sender << ' ' << r.receiver << ' ' << to_string(r.force) << ' ';
    if (r.payload)
      out << *r.payload;
    else
      out << '-';
    out << ' ' << r.bytes << '\n';
  }
}

void account_message(RunMetrics& metrics, const Envelope& e) {
  metrics.messages += 1;
  metrics.bytes += wire_size(e);
}

void account_messages(RunMetrics& metrics, std::uint64_t count, std::size_t bytes_each) {
  metrics.messages += count;
  metrics.bytes += count * bytes_each;
}

std::uint64_t NcccCounter::global() const {
  std::uint64_t m = 0;
  for (auto c : counts_) m = std::max(m, c);
  return m;
}

std::vector<Envelope> MessageBus::deliver(Tick tick, RunMetrics& metrics, std::vector<TraceRecord>* trace) {
  std::vector<Envelope> round;
  round.swap(outbox_);
  std::stable_sort(round.begin(), round.end(), [](const Envelope& x, const Envelope& y) {
    if (x.receiver != y.receiver) return x.receiver < y.receiver;
    return x.sender < y.sender;
  });
  for (const auto& e : round) {
    account_message(metrics, e);
    if (trace) trace->push_back(TraceRecord{tick, e.sender, e.receiver, e.force, e.payload, wire_size(e)});
  }
  return round;
}

}  // namespace cfstp
