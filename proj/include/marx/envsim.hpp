#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "marx/core.hpp"

namespace marx {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct TaskSpec {
  std::string name;
  Cell location;
  int requiredCoalitionSize = 1;
  /// Base-form verb phrase ("fight the fire"); empty means "complete <name>".
  std::string verb;
  /// Gerund phrase ("fighting the fire"); empty means "completing <name>".
  std::string gerund;
};

enum class EnvKind {
  SearchRescue,
  /// Corridor variant: an undone task bars agents from crossing past its column.
  PressurePlate,
};

struct EnvConfig {
  EnvKind kind = EnvKind::SearchRescue;
  int numAgents = 1;
  std::vector<TaskSpec> tasks;
  int gridWidth = 1;
  int gridHeight = 1;
  std::vector<Cell> agentsStart;
  int maxEpisodeSteps = 10000;
  /// Used for atom names (robotII), sentences (Robot II, "The robots").
  std::string agentNoun = "agent";

  /// Throws Error(InvalidArgument) on any broken invariant.
  void validate() const;

  int num_tasks() const { return static_cast<int>(tasks.size()); }
  std::optional<TaskId> task_index(std::string_view name) const;
  std::optional<AgentId> agent_index(std::string_view token) const;

  std::string agent_token(AgentId a) const;    // r2
  std::string agent_atom(AgentId a) const;     // robotII
  std::string agent_display(AgentId a) const;  // Robot II
  std::string agents_plural() const;           // robots
  std::string verb(TaskId g) const;
  std::string gerund(TaskId g) const;

  /// Vocabulary-only config (no grid) for contexts that only know names.
  static EnvConfig minimal(int numAgents, std::vector<std::string> taskNames);
};

using AgentLocalState = std::vector<std::int32_t>;

struct JointState {
  std::vector<AgentLocalState> perAgent;
  std::vector<bool> taskDone;

  friend bool operator==(const JointState&, const JointState&) = default;
};

/// Compact text form, e.g. "0,1;2,0|010". Round-trips through parse_joint_state.
std::string serialize(const JointState& state);
JointState parse_joint_state(std::string_view text);

struct JointStateHash {
  std::size_t operator()(const JointState& s) const;
};

struct JointAction {
  std::vector<int> perAgent;
  friend bool operator==(const JointAction&, const JointAction&) = default;
};

struct StepOutcome {
  JointState nextState;
  std::vector<double> rewards;
  EventSet events;
};

struct TrajectoryStep {
  JointState state;
  JointAction action;
  StepOutcome outcome;
};

using Trajectory = std::vector<TrajectoryStep>;

/// A stateful multi-agent task environment. Not thread-safe; use clone()
/// to obtain independent instances.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvConfig& config() const = 0;
  virtual JointState reset(std::uint64_t seed) = 0;
  /// Transition from `state` under `action`; the environment's current
  /// state becomes the returned next state.
  virtual StepOutcome step(const JointState& state, const JointAction& action) = 0;
  virtual void inject_state(const JointState& state) = 0;
  virtual const JointState& current() const = 0;

  virtual int num_actions() const = 0;
  virtual std::string_view action_name(int action) const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  StepOutcome step(const JointAction& action) { return step(current(), action); }
  std::optional<int> action_id(std::string_view name) const;
  /// "act,act,stay" style key used on abstraction edges.
  std::string action_key(const JointAction& action) const;
  JointAction parse_action_key(std::string_view key) const;
};

/// Gridworld with co-located cooperative tasks. A task completes when at
/// least requiredCoalitionSize agents standing on its cell choose `act` in
/// the same step; the coalition is every acting agent on that cell.
class GridTaskEnv final : public Environment {
 public:
  enum Action : int { Stay = 0, Up, Down, Left, Right, Act, kNumActions };

  explicit GridTaskEnv(EnvConfig config);

  const EnvConfig& config() const override { return config_; }
  JointState reset(std::uint64_t seed) override;
  StepOutcome step(const JointState& state, const JointAction& action) override;
  void inject_state(const JointState& state) override;
  const JointState& current() const override { return current_; }
  int num_actions() const override { return kNumActions; }
  std::string_view action_name(int action) const override;
  std::unique_ptr<Environment> clone() const override;

  static Cell position(const JointState& s, AgentId a);

 private:
  void check_state(const JointState& s) const;
  Cell move(const JointState& s, Cell from, int action) const;

  EnvConfig config_;
  JointState current_;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& config);

/// Samples joint actions from a (fixed) multi-agent policy. Implementations
/// are immutable after construction so one instance can serve concurrent
/// samplers that each own their RNG stream.
class PolicyOracle {
 public:
  using Distribution = std::vector<std::pair<JointAction, double>>;

  virtual ~PolicyOracle() = default;
  virtual JointAction sample(const JointState& state, std::mt19937_64& rng) const = 0;
  virtual std::optional<Distribution> distribution(const JointState&) const {
    return std::nullopt;
  }
};

/// Each agent works through an ordered list of tasks: walk to the first
/// undone one (x first, then y), then `act` until it is done. With
/// probability epsilon an agent instead takes a uniformly random action.
class ScriptedPolicy final : public PolicyOracle {
 public:
  ScriptedPolicy(EnvConfig config, std::vector<std::vector<TaskId>> scripts, double epsilon);

  JointAction sample(const JointState& state, std::mt19937_64& rng) const override;
  /// A point mass on nominal() when epsilon is 0; absent otherwise.
  std::optional<Distribution> distribution(const JointState& state) const override;
  JointAction nominal(const JointState& state) const;

  double epsilon() const { return epsilon_; }
  const std::vector<std::vector<TaskId>>& scripts() const { return scripts_; }

 private:
  EnvConfig config_;
  std::vector<std::vector<TaskId>> scripts_;
  double epsilon_;
};

/// Explicit action distributions keyed by serialized joint state, with a
/// fallback distribution for states missing from the table.
class TabularPolicy final : public PolicyOracle {
 public:
  TabularPolicy(std::unordered_map<std::string, Distribution> table, Distribution fallback);

  /// Tabulates `rule` over every state reachable from `start` under the
  /// rule's positive-probability actions.
  static TabularPolicy from_rule(Environment& env, const JointState& start,
                                 const std::function<Distribution(const JointState&)>& rule);

  JointAction sample(const JointState& state, std::mt19937_64& rng) const override;
  std::optional<Distribution> distribution(const JointState& state) const override;

  const std::unordered_map<std::string, Distribution>& table() const { return table_; }
  const Distribution& fallback() const { return fallback_; }

 private:
  std::unordered_map<std::string, Distribution> table_;
  Distribution fallback_;
};

/// Runs the policy from the environment's current state for at most
/// `depth` steps, stopping early once every task is done.
Trajectory rollout(Environment& env, const PolicyOracle& policy, int depth, std::mt19937_64& rng);

Trajectory run_episode(Environment& env, const PolicyOracle& policy, int maxSteps,
                       std::uint64_t seed);
/// Same, drawing from a caller-owned RNG stream (reset uses a value drawn from it).
Trajectory run_episode(Environment& env, const PolicyOracle& policy, int maxSteps,
                       std::mt19937_64& rng);

}  // namespace marx
