#pragma once

#include <cstdint>
#include <memory>

#include "marx/abstraction.hpp"
#include "marx/envsim.hpp"

// Small reference scenarios shared by the tests, the acceptance suite and
// the sample data.
namespace marx::fixtures {

/// Three robots, tasks fire / obstacle / victim, each needing two robots.
EnvConfig search_rescue_3();

/// Robots II+III fight the fire, I+II remove the obstacle, I+III rescue the
/// victim. Deterministic when epsilon is 0.
ScriptedPolicy search_rescue_3_policy(double epsilon = 0.0);

/// The four-state chain s0 -> s1 -> s2 -> s3 of the walkthrough, built by
/// hand with the given self-loop and forward counts. Each state stores one
/// search-rescue joint state consistent with its progress.
Mmdp walkthrough_mmdp();

/// One agent works through ten warm-up tasks along a corridor, then reaches a
/// hub where it turns to task `a` with probability 0.7 or task `b` with 0.3.
struct TwoOrderings {
  EnvConfig env;
  std::shared_ptr<TabularPolicy> policy;
  /// Seed whose single episode visits `a` first.
  std::uint64_t episodeSeed = 0;
};
TwoOrderings two_orderings();

/// Five agents, five two-agent tasks on a 7x7 grid.
EnvConfig desk_5x5();
ScriptedPolicy desk_5x5_policy(double epsilon = 0.1);

}  // namespace marx::fixtures
