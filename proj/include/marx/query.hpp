#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "marx/core.hpp"
#include "marx/envsim.hpp"

namespace marx {

/// A task the user wants realized by exactly `coalition`.
struct QueryItem {
  TaskId task = 0;
  Coalition coalition;

  friend bool operator==(const QueryItem&, const QueryItem&) = default;
};

/// Ordered sequence of items; unlisted tasks are unconstrained.
struct TemporalQuery {
  std::vector<QueryItem> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  /// Position (0-based) of the item naming `task`, or npos.
  std::size_t position_of(TaskId task) const;

  friend bool operator==(const TemporalQuery&, const TemporalQuery&) = default;
};

/// Grammar (whitespace-insensitive):
///   query := item ( "->" item )*
///   item  := taskName ":" agent ( "," agent )*
/// Agents are written r1..rN or as atom names (robotII).
/// Errors: ParseError (with byte offset), UnknownTask, UnknownAgent.
TemporalQuery parse_query(std::string_view text, const EnvConfig& env);

/// Canonical text, e.g. "fire:r2,r3 -> victim:r1,r3".
std::string render(const TemporalQuery& query, const EnvConfig& env);

/// "fire_robotII_robotIII"
std::string atom_name(TaskId task, Coalition coalition, const EnvConfig& env);

enum class ViolationKind { DuplicateTask, EmptyCoalition, AgentOutOfRange, UnknownTask };

struct Violation {
  ViolationKind kind;
  std::size_t index;  // 0-based item position
  TaskId task;
  std::string message;
};

std::vector<Violation> validate(const TemporalQuery& query, const EnvConfig& env);
/// Throws Error(InvalidQuery) carrying the first violation.
void require_valid(const TemporalQuery& query, const EnvConfig& env);

/// Nested sequencing formula, e.g.
/// "P>0 [ F (fire_robotII_robotIII & F (victim_robotI_robotIII)) ]".
std::string to_pctl(const TemporalQuery& query, const EnvConfig& env);

}  // namespace marx
