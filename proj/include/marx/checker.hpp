#pragma once

#include <compare>
#include <map>
#include <optional>
#include <vector>

#include "marx/abstraction.hpp"
#include "marx/query.hpp"

namespace marx {

/// Number of query items matched so far, or Bottom once the path violated
/// the query. Bottom is absorbing.
class MonitorIndex {
 public:
  constexpr MonitorIndex() = default;
  constexpr explicit MonitorIndex(int value) : value_(value) {}
  static constexpr MonitorIndex bottom() { return MonitorIndex(kBottom); }

  constexpr bool is_bottom() const { return value_ == kBottom; }
  constexpr int value() const { return value_; }

  friend constexpr auto operator<=>(MonitorIndex, MonitorIndex) = default;

 private:
  static constexpr int kBottom = -1;
  int value_ = 0;
};

/// Greedy monitor transition: advance over every consecutive next item
/// realized by `events`, then fall to Bottom if any remaining item's task
/// was completed in this step. Events on unqueried tasks are neutral.
MonitorIndex monitor_step(MonitorIndex j, const EventSet& events, const TemporalQuery& query);

/// Nondeterministic variant: the greedy result plus every shorter advance
/// (each judged by the same violation rule). Deduplicated, ascending.
std::vector<MonitorIndex> monitor_successors(MonitorIndex j, const EventSet& events,
                                             const TemporalQuery& query);

struct ProductNode {
  StateId state = 0;
  MonitorIndex monitor;
  friend constexpr auto operator<=>(const ProductNode&, const ProductNode&) = default;
};

struct WitnessEdge {
  StateId src = 0;
  StateId dst = 0;
  EventSet events;
  friend bool operator==(const WitnessEdge&, const WitnessEdge&) = default;
};

struct FeasibilityResult {
  bool feasible = false;
  /// Present iff feasible.
  std::optional<std::vector<WitnessEdge>> witness;
};

/// Throws Error(InvalidQuery) when `query` does not fit the Mmdp's shape.
void require_compatible(const Mmdp& mmdp, const TemporalQuery& query);

/// Reachability of (s, |query|) from (initial, 0) over non-self edges with
/// count >= 1, stepping the monitor nondeterministically. The witness is a
/// shortest such path.
FeasibilityResult check_feasible(const Mmdp& mmdp, const TemporalQuery& query);

/// Every product node reachable under the greedy monitor. Bottom nodes are
/// included but not expanded. Sorted.
std::vector<ProductNode> reachable_nodes(const Mmdp& mmdp, const TemporalQuery& query);

struct Annotation {
  int umax = 0;
  /// Best non-Bottom monitor index per state; states reached only at
  /// Bottom are absent.
  std::map<StateId, int> nodeU;
};

Annotation annotate(const Mmdp& mmdp, const TemporalQuery& query);

}  // namespace marx
