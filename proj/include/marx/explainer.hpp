#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "marx/abstraction.hpp"
#include "marx/qm.hpp"
#include "marx/query.hpp"

namespace marx {

/// `beforeTask` cannot happen until `task` was completed by `coalition`.
struct PrecedenceClause {
  TaskId task = 0;
  Coalition coalition;
  TaskId beforeTask = 0;
  friend bool operator==(const PrecedenceClause&, const PrecedenceClause&) = default;
};

/// `task` was only ever observed with `required`, never with `queried`.
struct CoalitionClause {
  TaskId task = 0;
  Coalition queried;
  Coalition required;
  friend bool operator==(const CoalitionClause&, const CoalitionClause&) = default;
};

/// `task` never completes (optionally: never after `after` completed).
struct NeverObservedClause {
  TaskId task = 0;
  std::optional<TaskId> after;
  friend bool operator==(const NeverObservedClause&, const NeverObservedClause&) = default;
};

using ClausePayload = std::variant<PrecedenceClause, CoalitionClause, NeverObservedClause>;

struct ExplanationClause {
  ClausePayload payload;
  std::string text;

  /// "precedence", "coalition" or "never_observed".
  std::string kind() const;
  friend bool operator==(const ExplanationClause&, const ExplanationClause&) = default;
};

/// Sentence for a payload. Pure: equal inputs give equal text.
std::string render(const ClausePayload& payload, const EnvConfig& env);

/// "Robot I", "Robot I and Robot III", "Robot I, Robot II and Robot III".
std::string list_agents(Coalition coalition, const EnvConfig& env);

struct FailureReport {
  /// 1-based position of the failed item in `query`.
  std::size_t index = 0;
  QueryItem item;
  /// The query as it stood when this failure was found.
  TemporalQuery query;
  std::vector<ExplanationClause> clauses;
  /// Selected term and its witness state; absent for NeverObserved.
  std::optional<Implicant> term;
  std::optional<StateId> witness;
  bool removed = false;
  /// translate produced nothing and a fallback clause was substituted.
  bool flagged = false;
};

struct ExplanationReport {
  std::vector<FailureReport> failures;
  TemporalQuery finalQuery;
  bool finalFeasible = false;
  bool flagged = false;
};

struct ExplainOptions {
  QmOptions qm;
};

/// Every state entered by a sampled edge that completes `task`, by any coalition.
std::set<StateId> target_states(const Mmdp& mmdp, TaskId task);

/// Closest term to the query: +1 per positive literal (g, i) whose task is
/// queried with i in the coalition, -1 when queried without i. Ties go to
/// the smaller encoding. `failedIdx` is 1-based.
Implicant select_term(const std::vector<Implicant>& terms, const TemporalQuery& query,
                      std::size_t failedIdx, int numTasks);

/// Clauses for item `failedIdx` (1-based) drawn from the term's positive
/// literals; tasks of earlier items are skipped.
std::vector<ExplanationClause> translate(const Implicant& term, const TemporalQuery& query,
                                         std::size_t failedIdx, const EnvConfig& env);

/// Fixes item `failedIdx` (1-based) using the term's positive literals.
///
/// Without `completionOrder`: the failed item takes the term's coalition and
/// every other task in the term (tasks of earlier items excepted) is moved or
/// inserted immediately before it, in task-list order.
///
/// With `completionOrder` (tasks of the term in the order a witness path
/// completed them): those tasks become the leading items in that order with
/// the term's coalitions, followed by the untouched remaining items.
TemporalQuery repair_query(const TemporalQuery& query, std::size_t failedIdx, const Implicant& term,
                           int numTasks, std::span<const TaskId> completionOrder = {});

/// Locates, explains and repairs failures until the query is feasible.
/// Errors: RepairDiverged past |G| x (|query| + 1) iterations,
/// TooManyVariables from minimization.
ExplanationReport explain(const Mmdp& mmdp, const TemporalQuery& query, const EnvConfig& env,
                          const ExplainOptions& options = {});

}  // namespace marx
