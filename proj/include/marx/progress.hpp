#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "marx/core.hpp"

namespace marx {

/// N x |G| completion matrix packed into one word. Bit (i, g) lives at the
/// flat index i * |G| + g, which is also the variable index used when the
/// matrix is handed to Boolean minimization.
class ProgressMatrix {
 public:
  ProgressMatrix() = default;
  ProgressMatrix(int agents, int tasks, std::uint64_t bits = 0);

  int agents() const { return agents_; }
  int tasks() const { return tasks_; }
  int width() const { return agents_ * tasks_; }
  std::uint64_t bits() const { return bits_; }

  int index(AgentId a, TaskId g) const { return a * tasks_ + g; }
  bool bit(AgentId a, TaskId g) const { return ((bits_ >> index(a, g)) & 1U) != 0; }
  void set(AgentId a, TaskId g) { bits_ |= std::uint64_t{1} << index(a, g); }

  Coalition completers(TaskId g) const;
  bool task_done(TaskId g) const { return !completers(g).empty(); }
  bool all_done() const;
  /// Bitwise <=: every bit set here is set in `other`.
  bool below(const ProgressMatrix& other) const { return (bits_ & ~other.bits_) == 0; }

  ProgressMatrix with(const EventSet& events) const;

  /// Flat bit string, e.g. "000100100".
  std::string to_string() const;
  static ProgressMatrix from_string(int agents, int tasks, std::string_view bits);

  friend bool operator==(const ProgressMatrix&, const ProgressMatrix&) = default;

 private:
  int agents_ = 0;
  int tasks_ = 0;
  std::uint64_t bits_ = 0;
};

/// Newly completed tasks between two matrices, one event per task whose
/// completer set grew. Throws NonMonotone if any bit is cleared.
EventSet events_of(const ProgressMatrix& source, const ProgressMatrix& target);

}  // namespace marx

template <>
struct std::hash<marx::ProgressMatrix> {
  std::size_t operator()(const marx::ProgressMatrix& m) const noexcept {
    return std::hash<std::uint64_t>{}(m.bits()) ^ (static_cast<std::size_t>(m.tasks()) << 58);
  }
};
