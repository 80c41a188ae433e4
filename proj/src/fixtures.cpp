#include "marx/fixtures.hpp"

#include <algorithm>

namespace marx::fixtures {
namespace {

TaskSpec task(std::string name, Cell at, int k, std::string verb = "", std::string gerund = "") {
  return TaskSpec{std::move(name), at, k, std::move(verb), std::move(gerund)};
}

int step_towards(Cell here, Cell goal) {
  if (here == goal) return GridTaskEnv::Act;
  if (here.x != goal.x) return here.x < goal.x ? GridTaskEnv::Right : GridTaskEnv::Left;
  return here.y < goal.y ? GridTaskEnv::Down : GridTaskEnv::Up;
}

/// Whichever of `x` and `y` the trajectory completes first, or -1.
TaskId first_of(const Trajectory& t, TaskId x, TaskId y) {
  for (const TrajectoryStep& step : t) {
    for (const CompletionEvent& e : step.outcome.events) {
      if (e.task == x || e.task == y) return e.task;
    }
  }
  return -1;
}

}  // namespace

EnvConfig search_rescue_3() {
  EnvConfig c;
  c.kind = EnvKind::SearchRescue;
  c.numAgents = 3;
  c.gridWidth = 5;
  c.gridHeight = 5;
  c.agentNoun = "robot";
  c.tasks = {task("fire", {4, 0}, 2, "fight the fire", "fighting the fire"),
             task("obstacle", {2, 2}, 2, "remove the obstacle", "removing the obstacle"),
             task("victim", {0, 4}, 2, "rescue the victim", "rescuing the victim")};
  c.agentsStart = {{0, 0}, {4, 4}, {2, 0}};
  c.validate();
  return c;
}

ScriptedPolicy search_rescue_3_policy(double epsilon) {
  return ScriptedPolicy(search_rescue_3(), {{1, 2}, {0, 1}, {0, 2}}, epsilon);
}

Mmdp walkthrough_mmdp() {
  Mmdp m(3, {"fire", "obstacle", "victim"});
  StateId s0 = m.initial();
  StateId s1 = m.intern(ProgressMatrix::from_string(3, 3, "000100100"));
  StateId s2 = m.intern(ProgressMatrix::from_string(3, 3, "010110100"));
  StateId s3 = m.intern(ProgressMatrix::from_string(3, 3, "011110101"));
  m.add_transition(s0, "right,left,right", s0, 6);
  m.add_transition(s0, "right,act,act", s1, 2);
  m.add_transition(s1, "down,left,down", s1, 4);
  m.add_transition(s1, "act,act,down", s2, 1);
  m.add_transition(s2, "left,stay,left", s2, 5);
  m.add_transition(s2, "act,stay,act", s3, 1);
  const std::pair<StateId, const char*> visits[] = {
      {s0, "0,0;4,4;2,0|000"}, {s1, "0,0;4,0;4,0|100"}, {s2, "2,2;2,2;0,4|110"}, {s3, "0,4;2,2;0,4|111"}};
  for (const auto& [s, joint] : visits) {
    std::uint64_t steps = 0;
    for (const auto& [dst, count] : m.out_counts(s)) steps += count;
    for (std::uint64_t k = 0; k < std::max<std::uint64_t>(steps, 1); ++k) m.record_sample(s, joint);
  }
  return m;
}

TwoOrderings two_orderings() {
  constexpr int kWarmups = 10;
  constexpr int kHubX = kWarmups;
  EnvConfig c;
  c.kind = EnvKind::SearchRescue;
  c.numAgents = 1;
  c.gridWidth = kWarmups + 1;
  c.gridHeight = 3;
  for (int w = 0; w < kWarmups; ++w) c.tasks.push_back(task("w" + std::to_string(w + 1), {w, 1}, 1));
  const TaskId a = kWarmups;
  const TaskId b = kWarmups + 1;
  c.tasks.push_back(task("a", {kHubX, 0}, 1));
  c.tasks.push_back(task("b", {kHubX, 2}, 1));
  c.agentsStart = {{0, 1}};
  c.validate();

  auto rule = [c, a, b](const JointState& s) -> PolicyOracle::Distribution {
    Cell here = GridTaskEnv::position(s, 0);
    auto go = [](int action) { return PolicyOracle::Distribution{{JointAction{{action}}, 1.0}}; };
    for (TaskId g = 0; g < kWarmups; ++g) {
      if (!s.taskDone[static_cast<std::size_t>(g)]) return go(step_towards(here, c.tasks[static_cast<std::size_t>(g)].location));
    }
    bool aDone = s.taskDone[static_cast<std::size_t>(a)];
    bool bDone = s.taskDone[static_cast<std::size_t>(b)];
    if (!aDone && !bDone && here == Cell{kHubX, 1}) {
      return {{JointAction{{GridTaskEnv::Up}}, 0.7}, {JointAction{{GridTaskEnv::Down}}, 0.3}};
    }
    if (!aDone && !bDone) return go(here.x < kHubX ? GridTaskEnv::Right : GridTaskEnv::Act);
    if (!aDone) return go(step_towards(here, c.tasks[static_cast<std::size_t>(a)].location));
    if (!bDone) return go(step_towards(here, c.tasks[static_cast<std::size_t>(b)].location));
    return go(GridTaskEnv::Stay);
  };

  GridTaskEnv env(c);
  JointState start = env.reset(0);
  auto policy = std::make_shared<TabularPolicy>(TabularPolicy::from_rule(env, start, rule));

  TwoOrderings out{c, policy, 0};
  for (std::uint64_t seed = 1;; ++seed) {
    if (first_of(run_episode(env, *policy, c.maxEpisodeSteps, seed), a, b) == a) {
      out.episodeSeed = seed;
      return out;
    }
  }
}

EnvConfig desk_5x5() {
  EnvConfig c;
  c.kind = EnvKind::SearchRescue;
  c.numAgents = 5;
  c.gridWidth = 7;
  c.gridHeight = 7;
  c.agentNoun = "robot";
  c.tasks = {task("a", {1, 1}, 2), task("b", {5, 1}, 2), task("c", {1, 5}, 2), task("d", {3, 3}, 2),
             task("e", {5, 5}, 2)};
  c.agentsStart = {{0, 0}, {0, 3}, {6, 0}, {6, 3}, {3, 6}};
  c.validate();
  return c;
}

ScriptedPolicy desk_5x5_policy(double epsilon) {
  // a: agents 1,2  b: 3,4  c: 2,5  d: 1,3  e: 4,5 (1-based)
  return ScriptedPolicy(desk_5x5(), {{0, 3}, {0, 2}, {1, 3}, {1, 4}, {2, 4}}, epsilon);
}

}  // namespace marx::fixtures
