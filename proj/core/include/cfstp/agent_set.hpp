#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cfstp/random.hpp"
#include "cfstp/types.hpp"

namespace cfstp {

// A coalition: a set of agents stored as a dynamic bitset. Capacity is fixed
// at construction (the instance's agent count); two sets compare equal when
// they hold the same members, whatever their capacity.
class AgentSet {
 public:
  AgentSet() = default;
  explicit AgentSet(std::size_t capacity) : words_((capacity + 63) / 64, 0) {}

  static AgentSet of(std::size_t capacity, std::initializer_list<AgentId> members) {
    AgentSet s(capacity);
    for (auto a : members) s.insert(a);
    return s;
  }

  void insert(AgentId a) {
    grow(a);
    words_[a / 64] |= (std::uint64_t{1} << (a % 64));
  }

  void erase(AgentId a) {
    if (a / 64 < words_.size()) words_[a / 64] &= ~(std::uint64_t{1} << (a % 64));
  }

  bool contains(AgentId a) const {
    return a / 64 < words_.size() && (words_[a / 64] >> (a % 64)) & 1U;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool empty() const {
    for (auto w : words_)
      if (w != 0) return false;
    return true;
  }

  void clear() {
    for (auto& w : words_) w = 0;
  }

  // Members in ascending id order.
  std::vector<AgentId> members() const {
    std::vector<AgentId> out;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w != 0) {
        const int bit = std::countr_zero(w);
        out.push_back(static_cast<AgentId>(i * 64 + static_cast<std::size_t>(bit)));
        w &= w - 1;
      }
    }
    return out;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w != 0) {
        const int bit = std::countr_zero(w);
        f(static_cast<AgentId>(i * 64 + static_cast<std::size_t>(bit)));
        w &= w - 1;
      }
    }
  }

  bool intersects(const AgentSet& other) const {
    const std::size_t n = words_.size() < other.words_.size() ? words_.size() : other.words_.size();
    for (std::size_t i = 0; i < n; ++i)
      if (words_[i] & other.words_[i]) return true;
    return false;
  }

  // Hash over member ids only, so it does not depend on capacity.
  std::uint64_t hash() const {
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] != 0) h = combine_seed(h, combine_seed(i, words_[i]));
    return h;
  }

  friend bool operator==(const AgentSet& a, const AgentSet& b) {
    const auto& small = a.words_.size() <= b.words_.size() ? a.words_ : b.words_;
    const auto& large = a.words_.size() <= b.words_.size() ? b.words_ : a.words_;
    for (std::size_t i = 0; i < small.size(); ++i)
      if (small[i] != large[i]) return false;
    for (std::size_t i = small.size(); i < large.size(); ++i)
      if (large[i] != 0) return false;
    return true;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  void grow(AgentId a) {
    if (a / 64 >= words_.size()) words_.resize(a / 64 + 1, 0);
  }

  std::vector<std::uint64_t> words_;
};

struct AgentSetHash {
  std::size_t operator()(const AgentSet& s) const { return static_cast<std::size_t>(s.hash()); }
};

}  // namespace cfstp
