#pragma once

#include <cstdint>
#include <vector>

#include "marx/abstraction.hpp"
#include "marx/query.hpp"

namespace marx {

struct RolloutParams {
  int rolloutNum = 10;
  int depthLimit = 50;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidArgument) unless rolloutNum >= 0 and depthLimit >= 1.
  void validate() const;
};

/// States with a non-Bottom conformance value, by U descending, then
/// visit count ascending, then id.
std::vector<StateId> frontier(const Mmdp& mmdp, const TemporalQuery& query);

struct RolloutResult {
  /// Frontier states popped, in order.
  std::vector<StateId> expanded;
  std::vector<Trajectory> trajectories;
  std::size_t steps = 0;
};

/// Pops up to rolloutNum frontier states (computed once, no re-enqueue),
/// replays the policy from a uniformly drawn stored joint state of each for
/// at most depthLimit steps, and folds every trajectory into `mmdp`.
/// Errors: EmptySampleMap when a popped state has no stored joint state.
RolloutResult guided_rollout(Mmdp& mmdp, Environment& env, const PolicyOracle& policy,
                             const TemporalQuery& query, const RolloutParams& params);

}  // namespace marx
