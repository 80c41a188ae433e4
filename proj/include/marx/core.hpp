#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace marx {

/// Zero-based agent index. Displayed one-based (r1, robotI, Robot I).
using AgentId = int;
/// Index into the environment's ordered task list.
using TaskId = int;

inline constexpr int kMaxAgents = 64;

/// A set of agents, stored as a bitmask over agent indices.
class Coalition {
 public:
  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint64_t mask) : mask_(mask) {}
  Coalition(std::initializer_list<AgentId> agents) {
    for (AgentId a : agents) insert(a);
  }

  static Coalition of(const std::vector<AgentId>& agents) {
    Coalition c;
    for (AgentId a : agents) c.insert(a);
    return c;
  }

  constexpr void insert(AgentId a) { mask_ |= std::uint64_t{1} << a; }
  constexpr void erase(AgentId a) { mask_ &= ~(std::uint64_t{1} << a); }
  constexpr bool contains(AgentId a) const {
    return a >= 0 && a < kMaxAgents && ((mask_ >> a) & 1U) != 0;
  }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr std::uint64_t mask() const { return mask_; }

  /// Largest agent index + 1, or 0 when empty.
  constexpr int extent() const { return 64 - std::countl_zero(mask_); }

  std::vector<AgentId> members() const {
    std::vector<AgentId> out;
    for (std::uint64_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }

  constexpr Coalition operator|(Coalition o) const { return Coalition(mask_ | o.mask_); }
  constexpr Coalition operator&(Coalition o) const { return Coalition(mask_ & o.mask_); }
  constexpr Coalition minus(Coalition o) const { return Coalition(mask_ & ~o.mask_); }
  constexpr bool disjoint(Coalition o) const { return (mask_ & o.mask_) == 0; }

  friend constexpr bool operator==(Coalition, Coalition) = default;
  /// Orders by ascending member list (the order a sorted set would give).
  friend std::strong_ordering operator<=>(Coalition a, Coalition b) {
    return a.members() <=> b.members();
  }

 private:
  std::uint64_t mask_ = 0;
};

/// A task realized by an exact coalition on one transition.
struct CompletionEvent {
  TaskId task = 0;
  Coalition coalition;

  friend bool operator==(const CompletionEvent&, const CompletionEvent&) = default;
  friend auto operator<=>(const CompletionEvent&, const CompletionEvent&) = default;
};

/// Events of one step, sorted by task; at most one event per task.
using EventSet = std::vector<CompletionEvent>;

std::string roman_numeral(int value);

}  // namespace marx
