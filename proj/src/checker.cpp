#include "marx/checker.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "marx/error.hpp"

namespace marx {
namespace {

bool realizes(const EventSet& events, const QueryItem& item) {
  return std::any_of(events.begin(), events.end(), [&](const CompletionEvent& e) {
    return e.task == item.task && e.coalition == item.coalition;
  });
}

bool touches_pending(const EventSet& events, const TemporalQuery& query, int matched) {
  for (std::size_t m = static_cast<std::size_t>(matched); m < query.items.size(); ++m) {
    for (const CompletionEvent& e : events) {
      if (e.task == query.items[m].task) return true;
    }
  }
  return false;
}

int greedy_advance(int j, const EventSet& events, const TemporalQuery& query) {
  const int n = static_cast<int>(query.size());
  while (j < n && realizes(events, query.items[static_cast<std::size_t>(j)])) ++j;
  return j;
}

struct EdgeCache {
  explicit EdgeCache(const Mmdp& mmdp) : out(mmdp.num_states()) {
    for (std::size_t s = 0; s < mmdp.num_states(); ++s) {
      StateId src = static_cast<StateId>(s);
      for (StateId dst : mmdp.successors(src)) out[s].push_back({src, dst, mmdp.edge_events(src, dst)});
    }
  }
  std::vector<std::vector<WitnessEdge>> out;
};

}  // namespace

MonitorIndex monitor_step(MonitorIndex j, const EventSet& events, const TemporalQuery& query) {
  if (j.is_bottom()) return j;
  int next = greedy_advance(j.value(), events, query);
  if (touches_pending(events, query, next)) return MonitorIndex::bottom();
  return MonitorIndex(next);
}

std::vector<MonitorIndex> monitor_successors(MonitorIndex j, const EventSet& events,
                                             const TemporalQuery& query) {
  if (j.is_bottom()) return {j};
  int full = greedy_advance(j.value(), events, query);
  std::set<MonitorIndex> out;
  for (int k = j.value(); k <= full; ++k) {
    out.insert(touches_pending(events, query, k) ? MonitorIndex::bottom() : MonitorIndex(k));
  }
  return {out.begin(), out.end()};
}

void require_compatible(const Mmdp& mmdp, const TemporalQuery& query) {
  std::set<TaskId> seen;
  for (const QueryItem& it : query.items) {
    if (it.task < 0 || it.task >= mmdp.num_tasks()) {
      throw Error(ErrorCode::InvalidQuery, "checker", "query names task index " + std::to_string(it.task) + " outside the abstraction");
    }
    if (!seen.insert(it.task).second) {
      throw Error(ErrorCode::InvalidQuery, "checker", "task '" + mmdp.tasks()[static_cast<std::size_t>(it.task)] + "' appears more than once");
    }
    if (it.coalition.empty() || it.coalition.extent() > mmdp.num_agents()) {
      throw Error(ErrorCode::InvalidQuery, "checker", "coalition for '" + mmdp.tasks()[static_cast<std::size_t>(it.task)] + "' is empty or out of range");
    }
  }
}

FeasibilityResult check_feasible(const Mmdp& mmdp, const TemporalQuery& query) {
  require_compatible(mmdp, query);
  const int goal = static_cast<int>(query.size());
  if (goal == 0) return {true, std::vector<WitnessEdge>{}};

  EdgeCache edges(mmdp);
  struct Visit {
    ProductNode parent;
    const WitnessEdge* via;
  };
  std::map<ProductNode, Visit> seen;
  std::deque<ProductNode> queue;
  ProductNode root{mmdp.initial(), MonitorIndex(0)};
  seen.emplace(root, Visit{root, nullptr});
  queue.push_back(root);

  while (!queue.empty()) {
    ProductNode node = queue.front();
    queue.pop_front();
    if (node.monitor.value() == goal) {
      std::vector<WitnessEdge> path;
      for (ProductNode cur = node; seen.at(cur).via != nullptr; cur = seen.at(cur).parent) {
        path.push_back(*seen.at(cur).via);
      }
      std::reverse(path.begin(), path.end());
      return {true, std::move(path)};
    }
    for (const WitnessEdge& e : edges.out[static_cast<std::size_t>(node.state)]) {
      for (MonitorIndex next : monitor_successors(node.monitor, e.events, query)) {
        if (next.is_bottom()) continue;
        ProductNode child{e.dst, next};
        if (seen.emplace(child, Visit{node, &e}).second) queue.push_back(child);
      }
    }
  }
  return {false, std::nullopt};
}

std::vector<ProductNode> reachable_nodes(const Mmdp& mmdp, const TemporalQuery& query) {
  require_compatible(mmdp, query);
  EdgeCache edges(mmdp);
  std::set<ProductNode> seen;
  std::vector<ProductNode> stack{{mmdp.initial(), MonitorIndex(0)}};
  seen.insert(stack.front());
  while (!stack.empty()) {
    ProductNode node = stack.back();
    stack.pop_back();
    if (node.monitor.is_bottom()) continue;
    for (const WitnessEdge& e : edges.out[static_cast<std::size_t>(node.state)]) {
      ProductNode child{e.dst, monitor_step(node.monitor, e.events, query)};
      if (seen.insert(child).second) stack.push_back(child);
    }
  }
  return {seen.begin(), seen.end()};
}

Annotation annotate(const Mmdp& mmdp, const TemporalQuery& query) {
  Annotation out;
  for (const ProductNode& n : reachable_nodes(mmdp, query)) {
    if (n.monitor.is_bottom()) continue;
    int& best = out.nodeU.try_emplace(n.state, n.monitor.value()).first->second;
    best = std::max(best, n.monitor.value());
    out.umax = std::max(out.umax, n.monitor.value());
  }
  return out;
}

}  // namespace marx
