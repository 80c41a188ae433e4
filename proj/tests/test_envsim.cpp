#include <gtest/gtest.h>

#include <random>

#include "marx/envsim.hpp"
#include "marx/error.hpp"
#include "marx/fixtures.hpp"
#include "marx/json_io.hpp"

using namespace marx;

namespace {

EnvConfig two_agent_config() {
  EnvConfig c;
  c.numAgents = 2;
  c.gridWidth = 3;
  c.gridHeight = 3;
  c.agentsStart = {{0, 0}, {1, 0}};
  c.tasks = {TaskSpec{"box", {1, 0}, 2, "", ""}, TaskSpec{"lamp", {0, 0}, 1, "", ""}};
  c.agentNoun = "robot";
  return c;
}

JointAction act(std::initializer_list<int> a) { return JointAction{std::vector<int>(a)}; }

}  // namespace

TEST(EnvConfig, RejectsBrokenInvariants) {
  EnvConfig c = two_agent_config();
  EXPECT_NO_THROW(c.validate());

  EnvConfig dup = c;
  dup.tasks[1].name = "box";
  EXPECT_THROW(dup.validate(), Error);

  EnvConfig big = c;
  big.tasks[0].requiredCoalitionSize = 3;
  EXPECT_THROW(big.validate(), Error);

  EnvConfig zero = c;
  zero.tasks[0].requiredCoalitionSize = 0;
  EXPECT_THROW(zero.validate(), Error);

  EnvConfig starts = c;
  starts.agentsStart.pop_back();
  EXPECT_THROW(starts.validate(), Error);
}

TEST(EnvConfig, AgentNames) {
  EnvConfig c = fixtures::search_rescue_3();
  EXPECT_EQ(c.agent_token(1), "r2");
  EXPECT_EQ(c.agent_atom(2), "robotIII");
  EXPECT_EQ(c.agent_display(0), "Robot I");
  EXPECT_EQ(c.agents_plural(), "robots");
  EXPECT_EQ(c.agent_index("r3"), 2);
  EXPECT_EQ(c.agent_index("robotII"), 1);
  EXPECT_FALSE(c.agent_index("r4").has_value());
  EXPECT_EQ(c.verb(0), "fight the fire");

  EnvConfig plain = EnvConfig::minimal(2, {"x"});
  EXPECT_EQ(plain.verb(0), "complete x");
  EXPECT_EQ(plain.gerund(0), "completing x");
}

TEST(GridTaskEnv, TaskNeedsEnoughActingAgentsOnItsCell) {
  GridTaskEnv env(two_agent_config());
  JointState s = env.reset(0);

  StepOutcome lone = env.step(s, act({GridTaskEnv::Stay, GridTaskEnv::Act}));
  EXPECT_TRUE(lone.events.empty());
  EXPECT_EQ(lone.rewards, (std::vector<double>{0.0, 0.0}));

  // Agent 0 walks onto the box cell; both act.
  StepOutcome moved = env.step(s, act({GridTaskEnv::Right, GridTaskEnv::Stay}));
  StepOutcome done = env.step(moved.nextState, act({GridTaskEnv::Act, GridTaskEnv::Act}));
  ASSERT_EQ(done.events.size(), 1U);
  EXPECT_EQ(done.events[0].task, 0);
  EXPECT_EQ(done.events[0].coalition, (Coalition{0, 1}));
  EXPECT_EQ(done.rewards, (std::vector<double>{1.0, 1.0}));
  EXPECT_TRUE(done.nextState.taskDone[0]);

  // Completed tasks never complete again.
  StepOutcome again = env.step(done.nextState, act({GridTaskEnv::Act, GridTaskEnv::Act}));
  EXPECT_TRUE(again.events.empty());
  EXPECT_TRUE(again.nextState.taskDone[0]);
}

TEST(GridTaskEnv, CoalitionIsEveryActingAgentOnTheCell) {
  EnvConfig c = two_agent_config();
  c.tasks[0].requiredCoalitionSize = 1;
  c.agentsStart = {{1, 0}, {1, 0}};
  GridTaskEnv env(c);
  StepOutcome out = env.step(env.reset(0), act({GridTaskEnv::Act, GridTaskEnv::Act}));
  ASSERT_EQ(out.events.size(), 1U);
  EXPECT_EQ(out.events[0].coalition, (Coalition{0, 1}));
}

TEST(GridTaskEnv, MovesStayInsideTheGrid) {
  GridTaskEnv env(two_agent_config());
  JointState s = env.reset(0);
  StepOutcome out = env.step(s, act({GridTaskEnv::Up, GridTaskEnv::Down}));
  EXPECT_EQ(GridTaskEnv::position(out.nextState, 0), (Cell{0, 0}));
  EXPECT_EQ(GridTaskEnv::position(out.nextState, 1), (Cell{1, 1}));
  EXPECT_EQ(env.current(), out.nextState);
}

TEST(GridTaskEnv, RejectsBadActionsAndStates) {
  GridTaskEnv env(two_agent_config());
  JointState s = env.reset(0);
  EXPECT_THROW(env.step(s, act({GridTaskEnv::Stay})), Error);
  EXPECT_THROW(env.step(s, act({GridTaskEnv::Stay, 17})), Error);
  JointState bad = s;
  bad.perAgent[0] = {9, 9};
  EXPECT_THROW(env.inject_state(bad), Error);
}

TEST(GridTaskEnv, PressurePlateGatesBlockUntilDone) {
  EnvConfig c;
  c.kind = EnvKind::PressurePlate;
  c.numAgents = 1;
  c.gridWidth = 4;
  c.gridHeight = 1;
  c.agentsStart = {{1, 0}};
  c.tasks = {TaskSpec{"plate", {1, 0}, 1, "", ""}};
  GridTaskEnv env(c);
  JointState s = env.reset(0);
  StepOutcome blocked = env.step(s, act({GridTaskEnv::Right}));
  EXPECT_EQ(GridTaskEnv::position(blocked.nextState, 0), (Cell{1, 0}));
  StepOutcome pressed = env.step(s, act({GridTaskEnv::Act}));
  StepOutcome through = env.step(pressed.nextState, act({GridTaskEnv::Right}));
  EXPECT_EQ(GridTaskEnv::position(through.nextState, 0), (Cell{2, 0}));
}

TEST(JointState, SerializationRoundTrips) {
  GridTaskEnv env(fixtures::search_rescue_3());
  JointState s = env.reset(0);
  s.taskDone[1] = true;
  EXPECT_EQ(parse_joint_state(serialize(s)), s);
  EXPECT_THROW(parse_joint_state("garbage"), Error);
}

TEST(ActionKey, RoundTrips) {
  GridTaskEnv env(two_agent_config());
  JointAction a = act({GridTaskEnv::Act, GridTaskEnv::Left});
  EXPECT_EQ(env.action_key(a), "act,left");
  EXPECT_EQ(env.parse_action_key("act,left"), a);
  EXPECT_THROW(env.parse_action_key("act,fly"), Error);
}

// Properties over many noisy episodes of the sample fixtures.
class EpisodeProperties : public ::testing::TestWithParam<int> {};

TEST_P(EpisodeProperties, MonotoneDisjointAndRewardConsistent) {
  EnvConfig c = GetParam() == 0 ? fixtures::search_rescue_3() : fixtures::desk_5x5();
  ScriptedPolicy policy = GetParam() == 0 ? fixtures::search_rescue_3_policy(0.3) : fixtures::desk_5x5_policy(0.3);
  auto env = make_environment(c);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Trajectory t = run_episode(*env, policy, 400, seed);
    ASSERT_FALSE(t.empty());
    for (std::size_t k = 0; k < t.size(); ++k) {
      const StepOutcome& o = t[k].outcome;
      if (k + 1 < t.size()) {
        EXPECT_EQ(o.nextState, t[k + 1].state);
      }
      for (std::size_t g = 0; g < o.nextState.taskDone.size(); ++g) {
        if (t[k].state.taskDone[g]) {
          EXPECT_TRUE(o.nextState.taskDone[g]);
        }
      }
      Coalition seen;
      for (const CompletionEvent& e : o.events) {
        EXPECT_TRUE(seen.disjoint(e.coalition));
        EXPECT_GE(e.coalition.size(), c.tasks[static_cast<std::size_t>(e.task)].requiredCoalitionSize);
        seen = seen | e.coalition;
      }
      for (AgentId i = 0; i < c.numAgents; ++i) {
        EXPECT_EQ(o.rewards[static_cast<std::size_t>(i)] > 0.0, seen.contains(i));
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Fixtures, EpisodeProperties, ::testing::Values(0, 1));

TEST(Episodes, SeededReproducibility) {
  EnvConfig c = fixtures::search_rescue_3();
  ScriptedPolicy policy = fixtures::search_rescue_3_policy(0.5);
  auto a = make_environment(c);
  auto b = make_environment(c);
  for (std::uint64_t seed : {1U, 2U, 99U}) {
    Trajectory x = run_episode(*a, policy, 300, seed);
    Trajectory y = run_episode(*b, policy, 300, seed);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      EXPECT_EQ(x[k].state, y[k].state);
      EXPECT_EQ(x[k].action, y[k].action);
    }
  }
}

TEST(Episodes, NoiselessScriptCompletesInPlannedOrder) {
  EnvConfig c = fixtures::search_rescue_3();
  auto env = make_environment(c);
  Trajectory t = run_episode(*env, fixtures::search_rescue_3_policy(0.0), 10000, 0);
  std::vector<CompletionEvent> events;
  for (const TrajectoryStep& s : t) {
    for (const CompletionEvent& e : s.outcome.events) events.push_back(e);
  }
  ASSERT_EQ(events.size(), 3U);
  EXPECT_EQ(events[0], (CompletionEvent{0, Coalition{1, 2}}));
  EXPECT_EQ(events[1], (CompletionEvent{1, Coalition{0, 1}}));
  EXPECT_EQ(events[2], (CompletionEvent{2, Coalition{0, 2}}));
  EXPECT_TRUE(t.back().outcome.nextState.taskDone == std::vector<bool>({true, true, true}));
}

TEST(Policies, ScriptedDistributionOnlyWhenNoiseless) {
  EnvConfig c = fixtures::search_rescue_3();
  GridTaskEnv env(c);
  JointState s = env.reset(0);
  ScriptedPolicy exact = fixtures::search_rescue_3_policy(0.0);
  auto d = exact.distribution(s);
  ASSERT_TRUE(d.has_value());
  ASSERT_EQ(d->size(), 1U);
  EXPECT_EQ(d->front().first, exact.nominal(s));
  EXPECT_DOUBLE_EQ(d->front().second, 1.0);
  EXPECT_FALSE(fixtures::search_rescue_3_policy(0.2).distribution(s).has_value());
}

TEST(Policies, TabularFromRuleAndJsonRoundTrip) {
  fixtures::TwoOrderings f = fixtures::two_orderings();
  auto env = make_environment(f.env);
  Json j = policy_to_json(*f.policy, *env);
  auto back = policy_from_json(j, *env);
  std::mt19937_64 r1(4);
  std::mt19937_64 r2(4);
  JointState s = env->reset(0);
  for (int k = 0; k < 50; ++k) {
    EXPECT_EQ(f.policy->sample(s, r1), back->sample(s, r2));
  }
}

TEST(EnvConfigJson, RoundTripsAndRejectsMalformed) {
  EnvConfig c = fixtures::desk_5x5();
  EXPECT_EQ(env_config_to_json(env_config_from_json(env_config_to_json(c))), env_config_to_json(c));
  Json bad = env_config_to_json(c);
  bad.erase("tasks");
  EXPECT_THROW(env_config_from_json(bad), Error);
  Json kind = env_config_to_json(c);
  kind["kind"] = "volcano";
  EXPECT_THROW(env_config_from_json(kind), Error);
}
