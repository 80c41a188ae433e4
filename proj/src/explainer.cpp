#include "marx/explainer.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "marx/checker.hpp"
#include "marx/error.hpp"

namespace marx {
namespace {

constexpr const char* kModule = "explainer";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string subject(const EnvConfig& env) { return "The " + env.agents_plural(); }

/// Positive literals of `term` grouped into per-task coalitions.
std::map<TaskId, Coalition> groups_of(const Implicant& term, int numTasks) {
  std::map<TaskId, Coalition> out;
  for (int v : term.positives()) out[v % numTasks].insert(v / numTasks);
  return out;
}

/// Groups minus tasks already established by items before `failedIdx`.
std::map<TaskId, Coalition> open_groups(const Implicant& term, const TemporalQuery& query,
                                        std::size_t failedIdx, int numTasks) {
  auto groups = groups_of(term, numTasks);
  for (std::size_t i = 0; i + 1 < failedIdx; ++i) groups.erase(query.items[i].task);
  return groups;
}

void check_index(const TemporalQuery& query, std::size_t failedIdx) {
  if (failedIdx < 1 || failedIdx > query.size()) {
    throw Error(ErrorCode::InvalidArgument, kModule, "failed index " + std::to_string(failedIdx) + " outside the query");
  }
}

struct PrefixSearch {
  std::set<StateId> ok;
  /// Path (as edges) for each state in `ok`, first one found in BFS order.
  std::map<StateId, std::vector<WitnessEdge>> paths;
};

/// States completing `task` right after a path that realizes `prefix`.
PrefixSearch search_prefix(const Mmdp& mmdp, const TemporalQuery& prefix, TaskId task) {
  const int goal = static_cast<int>(prefix.size());
  struct Visit {
    ProductNode parent;
    WitnessEdge via;
    bool root;
  };
  std::map<ProductNode, Visit> seen;
  std::deque<ProductNode> queue;
  ProductNode root{mmdp.initial(), MonitorIndex(0)};
  seen.emplace(root, Visit{root, {}, true});
  queue.push_back(root);

  PrefixSearch out;
  while (!queue.empty()) {
    ProductNode node = queue.front();
    queue.pop_front();
    for (StateId dst : mmdp.successors(node.state)) {
      EventSet events = mmdp.edge_events(node.state, dst);
      if (node.monitor.value() == goal && !out.ok.count(dst)) {
        bool completes = std::any_of(events.begin(), events.end(), [&](const CompletionEvent& e) { return e.task == task; });
        if (completes) {
          std::vector<WitnessEdge> path{{node.state, dst, events}};
          for (ProductNode cur = node; !seen.at(cur).root; cur = seen.at(cur).parent) path.push_back(seen.at(cur).via);
          std::reverse(path.begin(), path.end());
          out.ok.insert(dst);
          out.paths.emplace(dst, std::move(path));
        }
      }
      MonitorIndex next = monitor_step(node.monitor, events, prefix);
      if (next.is_bottom()) continue;
      ProductNode child{dst, next};
      if (seen.emplace(child, Visit{node, {node.state, dst, events}, false}).second) queue.push_back(child);
    }
  }
  return out;
}

/// Tasks done at the end of `path`, ordered by the step that completed them.
/// Within one step: earlier query items first, then task-list order, with
/// the failed item's task last.
std::vector<TaskId> completion_order(const std::vector<WitnessEdge>& path, const TemporalQuery& query,
                                     std::size_t j0) {
  const TaskId failedTask = query.items[j0].task;
  std::map<TaskId, std::size_t> step;
  for (std::size_t k = 0; k < path.size(); ++k) {
    for (const CompletionEvent& e : path[k].events) step.try_emplace(e.task, k);
  }
  auto rank = [&](TaskId g) -> std::pair<int, int> {
    if (g == failedTask) return {2, 0};
    std::size_t pos = query.position_of(g);
    if (pos < j0) return {0, static_cast<int>(pos)};
    return {1, g};
  };
  std::vector<TaskId> order;
  for (const auto& [g, k] : step) order.push_back(g);
  std::stable_sort(order.begin(), order.end(), [&](TaskId a, TaskId b) {
    if (step[a] != step[b]) return step[a] < step[b];
    return rank(a) < rank(b);
  });
  return order;
}

ExplanationClause make_clause(ClausePayload payload, const EnvConfig& env) {
  std::string text = render(payload, env);
  return ExplanationClause{std::move(payload), std::move(text)};
}

}  // namespace

std::string ExplanationClause::kind() const {
  return std::visit(Overloaded{[](const PrecedenceClause&) { return std::string("precedence"); },
                               [](const CoalitionClause&) { return std::string("coalition"); },
                               [](const NeverObservedClause&) { return std::string("never_observed"); }},
                    payload);
}

std::string list_agents(Coalition coalition, const EnvConfig& env) {
  std::vector<AgentId> members = coalition.members();
  std::string out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i > 0) out += i + 1 == members.size() ? " and " : ", ";
    out += env.agent_display(members[i]);
  }
  return out;
}

std::string render(const ClausePayload& payload, const EnvConfig& env) {
  return std::visit(
      Overloaded{
          [&](const PrecedenceClause& p) {
            return subject(env) + " cannot " + env.verb(p.beforeTask) + " because " + env.gerund(p.task) +
                   " must be completed before " + env.gerund(p.beforeTask) + ".";
          },
          [&](const CoalitionClause& c) {
            std::string head = subject(env) + " cannot " + env.verb(c.task) + " because ";
            Coalition missing = c.required.minus(c.queried);
            Coalition extra = c.queried.minus(c.required);
            if (extra.empty()) {
              return head + list_agents(c.queried, env) + (c.queried.size() == 1 ? " needs " : " need ") +
                     list_agents(missing, env) + " to help " + env.verb(c.task) + ".";
            }
            if (missing.empty()) {
              return head + list_agents(c.required, env) + " must " + env.verb(c.task) + " without " +
                     list_agents(extra, env) + ".";
            }
            return head + list_agents(c.required, env) + " must " + env.verb(c.task) + " instead of " +
                   list_agents(c.queried, env) + ".";
          },
          [&](const NeverObservedClause& n) {
            std::string after = n.after ? " after " + env.gerund(*n.after) : "";
            return subject(env) + " never " + env.verb(n.task) + after + " in any observed execution.";
          }},
      payload);
}

std::set<StateId> target_states(const Mmdp& mmdp, TaskId task) {
  std::set<StateId> out;
  for (std::size_t s = 0; s < mmdp.num_states(); ++s) {
    StateId src = static_cast<StateId>(s);
    for (StateId dst : mmdp.successors(src)) {
      for (const CompletionEvent& e : mmdp.edge_events(src, dst)) {
        if (e.task == task) out.insert(dst);
      }
    }
  }
  return out;
}

Implicant select_term(const std::vector<Implicant>& terms, const TemporalQuery& query,
                      std::size_t /*failedIdx*/, int numTasks) {
  if (terms.empty()) throw Error(ErrorCode::InvalidArgument, kModule, "no terms to select from");
  auto score = [&](const Implicant& t) {
    int s = 0;
    for (int v : t.positives()) {
      std::size_t pos = query.position_of(v % numTasks);
      if (pos >= query.size()) continue;
      s += query.items[pos].coalition.contains(v / numTasks) ? 1 : -1;
    }
    return s;
  };
  const Implicant* best = &terms.front();
  int bestScore = score(*best);
  std::string bestCode = best->encode();
  for (std::size_t i = 1; i < terms.size(); ++i) {
    int s = score(terms[i]);
    std::string code = terms[i].encode();
    if (s > bestScore || (s == bestScore && code < bestCode)) {
      best = &terms[i];
      bestScore = s;
      bestCode = std::move(code);
    }
  }
  return *best;
}

std::vector<ExplanationClause> translate(const Implicant& term, const TemporalQuery& query,
                                         std::size_t failedIdx, const EnvConfig& env) {
  check_index(query, failedIdx);
  const QueryItem& failed = query.items[failedIdx - 1];
  std::vector<ExplanationClause> out;
  auto groups = open_groups(term, query, failedIdx, env.num_tasks());
  auto own = groups.find(failed.task);
  if (own != groups.end() && own->second != failed.coalition) {
    out.push_back(make_clause(CoalitionClause{failed.task, failed.coalition, own->second}, env));
  }
  for (const auto& [g, coalition] : groups) {
    if (g == failed.task) continue;
    out.push_back(make_clause(PrecedenceClause{g, coalition, failed.task}, env));
  }
  return out;
}

TemporalQuery repair_query(const TemporalQuery& query, std::size_t failedIdx, const Implicant& term,
                           int numTasks, std::span<const TaskId> completionOrder) {
  check_index(query, failedIdx);
  const std::size_t j0 = failedIdx - 1;
  TemporalQuery out;

  if (!completionOrder.empty()) {
    auto groups = groups_of(term, numTasks);
    std::set<TaskId> placed;
    for (TaskId g : completionOrder) {
      auto it = groups.find(g);
      if (it == groups.end() || !placed.insert(g).second) continue;
      out.items.push_back({g, it->second});
    }
    for (const QueryItem& item : query.items) {
      if (!placed.count(item.task)) out.items.push_back(item);
    }
    return out;
  }

  auto groups = open_groups(term, query, failedIdx, numTasks);
  QueryItem failed = query.items[j0];
  if (auto own = groups.find(failed.task); own != groups.end()) failed.coalition = own->second;
  out.items.assign(query.items.begin(), query.items.begin() + static_cast<std::ptrdiff_t>(j0));
  for (const auto& [g, coalition] : groups) {
    if (g != failed.task) out.items.push_back({g, coalition});
  }
  out.items.push_back(failed);
  for (std::size_t i = j0 + 1; i < query.items.size(); ++i) {
    if (!groups.count(query.items[i].task)) out.items.push_back(query.items[i]);
  }
  return out;
}

ExplanationReport explain(const Mmdp& mmdp, const TemporalQuery& query, const EnvConfig& env,
                          const ExplainOptions& options) {
  require_compatible(mmdp, query);
  if (env.num_tasks() != mmdp.num_tasks() || env.numAgents != mmdp.num_agents()) {
    throw Error(ErrorCode::InvalidArgument, kModule, "environment does not match the abstraction");
  }
  const int numTasks = mmdp.num_tasks();
  const int numVars = mmdp.num_agents() * numTasks;
  const std::size_t cap = static_cast<std::size_t>(numTasks) * (query.size() + 1);

  ExplanationReport report;
  TemporalQuery q = query;
  for (std::size_t iteration = 0; !check_feasible(mmdp, q).feasible; ++iteration) {
    if (iteration >= cap) {
      throw Error(ErrorCode::RepairDiverged, kModule,
                  "query still infeasible after " + std::to_string(cap) + " repairs: " + render(q, env));
    }
    const std::size_t j0 = static_cast<std::size_t>(annotate(mmdp, q).umax);
    FailureReport failure;
    failure.index = j0 + 1;
    failure.item = q.items[j0];
    failure.query = q;
    const TaskId task = failure.item.task;

    std::optional<TaskId> previous;
    if (j0 > 0) previous = q.items[j0 - 1].task;
    PrefixSearch found;
    bool observed = !target_states(mmdp, task).empty();
    if (observed) {
      TemporalQuery prefix;
      prefix.items.assign(q.items.begin(), q.items.begin() + static_cast<std::ptrdiff_t>(j0));
      found = search_prefix(mmdp, prefix, task);
    }
    if (found.ok.empty()) {
      NeverObservedClause clause{task, observed ? previous : std::nullopt};
      failure.clauses.push_back(make_clause(clause, env));
      failure.removed = true;
      q.items.erase(q.items.begin() + static_cast<std::ptrdiff_t>(j0));
      report.failures.push_back(std::move(failure));
      continue;
    }

    std::vector<BitAssignment> onSet;
    for (StateId s : found.ok) onSet.push_back(mmdp.progress(s).bits());
    Implicant term = select_term(minimal_dnf(onSet, numVars, options.qm), q, failure.index, numTasks);
    auto witness = mmdp.find(ProgressMatrix(mmdp.num_agents(), numTasks, term.care & term.value));
    if (!witness || !found.ok.count(*witness)) {
      throw Error(ErrorCode::InvalidArgument, kModule, "selected term has no witness state");
    }
    failure.term = term;
    failure.witness = *witness;
    failure.clauses = translate(term, q, failure.index, env);
    if (failure.clauses.empty()) {
      if (previous) failure.clauses.push_back(make_clause(PrecedenceClause{*previous, q.items[j0 - 1].coalition, task}, env));
      failure.flagged = true;
      report.flagged = true;
    }
    std::vector<TaskId> order = completion_order(found.paths.at(*witness), q, j0);
    q = repair_query(q, failure.index, term, numTasks, order);
    report.failures.push_back(std::move(failure));
  }
  report.finalQuery = q;
  report.finalFeasible = true;
  return report;
}

}  // namespace marx
