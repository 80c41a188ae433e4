#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "marx/abstraction.hpp"
#include "marx/qm.hpp"
#include "marx/query.hpp"

// Independent reference implementations and random generators for tests.
namespace marx::testing {

struct RandomMmdpSpec {
  int maxAgents = 3;
  int maxTasks = 3;
  int maxStates = 12;
};

/// Random monotone abstraction: every edge completes a non-empty set of
/// undone tasks with pairwise disjoint coalitions, some states carry
/// self-loops, every state has one stored sample.
Mmdp random_mmdp(std::mt19937_64& rng, const RandomMmdpSpec& spec = {});

/// Distinct tasks, non-empty coalitions, 1..maxItems items.
TemporalQuery random_query(std::mt19937_64& rng, int numAgents, int numTasks, int maxItems);

/// Query drawn from the events actually present in `mmdp`, so items are
/// plausible but their order and combination may still be infeasible.
TemporalQuery random_observed_query(std::mt19937_64& rng, const Mmdp& mmdp, int maxItems);

/// Every event sequence along a path from the initial state, self-loops
/// skipped, including every prefix.
std::vector<std::vector<EventSet>> enumerate_paths(const Mmdp& mmdp);

/// True when the first `k` items occur in order (same step allowed), each
/// with its exact coalition.
bool sequence_matches(const std::vector<EventSet>& steps, const TemporalQuery& query, std::size_t k);

/// Some path matches the first `k` items.
bool brute_force_matchable(const Mmdp& mmdp, const TemporalQuery& query, std::size_t k);
bool brute_force_feasible(const Mmdp& mmdp, const TemporalQuery& query);

/// Some path prefix realizes the first `k` items or more without having
/// completed the task of any item it has not realized.
bool brute_force_conforming(const Mmdp& mmdp, const TemporalQuery& query, std::size_t k);

/// ON-set sized as the QM suites draw it.
std::vector<BitAssignment> random_on_set(std::mt19937_64& rng, int numVars);

/// Empty when `terms` is a cover of `onSet` made of primes that touch no
/// OFF assignment; otherwise the first problem found.
std::string truth_table_problem(const std::vector<Implicant>& terms, const std::vector<BitAssignment>& onSet,
                                int numVars);

/// Size of a minimum cover by exhaustive search over all cubes (n <= 6).
std::size_t exhaustive_min_cover_size(const std::vector<BitAssignment>& onSet, int numVars);

}  // namespace marx::testing
