#include "marx/envsim.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_set>

#include "marx/error.hpp"

namespace marx {
namespace {

constexpr std::string_view kModule = "envsim";

[[noreturn]] void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(kModule), message);
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

bool in_grid(const EnvConfig& c, Cell p) {
  return p.x >= 0 && p.y >= 0 && p.x < c.gridWidth && p.y < c.gridHeight;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool all_done(const JointState& s) {
  return std::all_of(s.taskDone.begin(), s.taskDone.end(), [](bool b) { return b; });
}

}  // namespace

// ---------------------------------------------------------------------------
// EnvConfig

void EnvConfig::validate() const {
  if (numAgents < 1 || numAgents > kMaxAgents) {
    fail(ErrorCode::InvalidArgument, "numAgents must be in [1, 64]");
  }
  if (tasks.empty()) fail(ErrorCode::InvalidArgument, "at least one task is required");
  if (static_cast<long>(numAgents) * num_tasks() > 64) {
    fail(ErrorCode::InvalidArgument, "numAgents * |tasks| must not exceed 64");
  }
  if (gridWidth < 1 || gridHeight < 1) fail(ErrorCode::InvalidArgument, "grid must be non-empty");
  if (maxEpisodeSteps < 1) fail(ErrorCode::InvalidArgument, "maxEpisodeSteps must be >= 1");
  if (static_cast<int>(agentsStart.size()) != numAgents) {
    fail(ErrorCode::InvalidArgument, "agentsStart must list one cell per agent");
  }
  for (const Cell& c : agentsStart) {
    if (!in_grid(*this, c)) fail(ErrorCode::InvalidArgument, "agent start cell outside grid");
  }
  if (!is_identifier(agentNoun)) fail(ErrorCode::InvalidArgument, "agentNoun must be an identifier");
  std::set<std::string> names;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskSpec& t = tasks[i];
    if (!is_identifier(t.name)) fail(ErrorCode::InvalidArgument, "task name '" + t.name + "' is not an identifier");
    if (!names.insert(t.name).second) fail(ErrorCode::InvalidArgument, "duplicate task name '" + t.name + "'");
    if (t.requiredCoalitionSize < 1 || t.requiredCoalitionSize > numAgents) {
      fail(ErrorCode::InvalidArgument, "task '" + t.name + "' coalition size outside [1, numAgents]");
    }
    if (!in_grid(*this, t.location)) fail(ErrorCode::InvalidArgument, "task '" + t.name + "' outside grid");
    for (std::size_t j = 0; j < i; ++j) {
      if (tasks[j].location == t.location) {
        fail(ErrorCode::InvalidArgument, "tasks '" + tasks[j].name + "' and '" + t.name + "' share a cell");
      }
    }
  }
}

std::optional<TaskId> EnvConfig::task_index(std::string_view name) const {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].name == name) return static_cast<TaskId>(i);
  }
  return std::nullopt;
}

std::optional<AgentId> EnvConfig::agent_index(std::string_view token) const {
  if (token.size() >= 2 && token[0] == 'r') {
    int k = 0;
    auto [ptr, ec] = std::from_chars(token.data() + 1, token.data() + token.size(), k);
    if (ec == std::errc() && ptr == token.data() + token.size() && token[1] != '0') {
      if (k >= 1 && k <= numAgents) return k - 1;
      return std::nullopt;
    }
  }
  for (AgentId a = 0; a < numAgents; ++a) {
    if (token == agent_atom(a)) return a;
  }
  return std::nullopt;
}

std::string EnvConfig::agent_token(AgentId a) const { return "r" + std::to_string(a + 1); }

std::string EnvConfig::agent_atom(AgentId a) const { return agentNoun + roman_numeral(a + 1); }

std::string EnvConfig::agent_display(AgentId a) const {
  std::string noun = agentNoun;
  if (!noun.empty()) noun[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(noun[0])));
  return noun + " " + roman_numeral(a + 1);
}

std::string EnvConfig::agents_plural() const { return agentNoun + "s"; }

std::string EnvConfig::verb(TaskId g) const {
  const TaskSpec& t = tasks.at(static_cast<std::size_t>(g));
  return t.verb.empty() ? "complete " + t.name : t.verb;
}

std::string EnvConfig::gerund(TaskId g) const {
  const TaskSpec& t = tasks.at(static_cast<std::size_t>(g));
  return t.gerund.empty() ? "completing " + t.name : t.gerund;
}

EnvConfig EnvConfig::minimal(int numAgents, std::vector<std::string> taskNames) {
  EnvConfig c;
  c.numAgents = numAgents;
  c.gridWidth = std::max<int>(1, static_cast<int>(taskNames.size()));
  c.gridHeight = 2;
  c.agentsStart.assign(static_cast<std::size_t>(numAgents), Cell{0, 1});
  for (std::size_t i = 0; i < taskNames.size(); ++i) {
    c.tasks.push_back(TaskSpec{std::move(taskNames[i]), Cell{static_cast<int>(i), 0}, 1, "", ""});
  }
  return c;
}

// ---------------------------------------------------------------------------
// JointState

std::string serialize(const JointState& state) {
  std::string out;
  for (std::size_t a = 0; a < state.perAgent.size(); ++a) {
    if (a > 0) out += ';';
    const AgentLocalState& local = state.perAgent[a];
    for (std::size_t k = 0; k < local.size(); ++k) {
      if (k > 0) out += ',';
      out += std::to_string(local[k]);
    }
  }
  out += '|';
  for (bool b : state.taskDone) out += b ? '1' : '0';
  return out;
}

JointState parse_joint_state(std::string_view text) {
  auto bar = text.find('|');
  if (bar == std::string_view::npos) fail(ErrorCode::MalformedFile, "joint state missing '|'");
  JointState s;
  std::string_view agents = text.substr(0, bar);
  if (!agents.empty()) {
    for (std::string_view part : split(agents, ';')) {
      AgentLocalState local;
      if (!part.empty()) {
        for (std::string_view num : split(part, ',')) {
          std::int32_t v = 0;
          auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
          if (ec != std::errc() || ptr != num.data() + num.size()) {
            fail(ErrorCode::MalformedFile, "bad joint state component '" + std::string(num) + "'");
          }
          local.push_back(v);
        }
      }
      s.perAgent.push_back(std::move(local));
    }
  }
  for (char c : text.substr(bar + 1)) {
    if (c != '0' && c != '1') fail(ErrorCode::MalformedFile, "bad task flag in joint state");
    s.taskDone.push_back(c == '1');
  }
  return s;
}

std::size_t JointStateHash::operator()(const JointState& s) const {
  return std::hash<std::string>{}(serialize(s));
}

// ---------------------------------------------------------------------------
// Environment

std::optional<int> Environment::action_id(std::string_view name) const {
  for (int a = 0; a < num_actions(); ++a) {
    if (action_name(a) == name) return a;
  }
  return std::nullopt;
}

std::string Environment::action_key(const JointAction& action) const {
  std::string out;
  for (std::size_t i = 0; i < action.perAgent.size(); ++i) {
    if (i > 0) out += ',';
    out += action_name(action.perAgent[i]);
  }
  return out;
}

JointAction Environment::parse_action_key(std::string_view key) const {
  JointAction a;
  for (std::string_view name : split(key, ',')) {
    auto id = action_id(name);
    if (!id) fail(ErrorCode::InvalidAction, "unknown action '" + std::string(name) + "'");
    a.perAgent.push_back(*id);
  }
  if (static_cast<int>(a.perAgent.size()) != config().numAgents) {
    fail(ErrorCode::InvalidAction, "joint action '" + std::string(key) + "' has wrong arity");
  }
  return a;
}

GridTaskEnv::GridTaskEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  reset(0);
}

JointState GridTaskEnv::reset(std::uint64_t /*seed*/) {
  JointState s;
  for (const Cell& c : config_.agentsStart) s.perAgent.push_back({c.x, c.y});
  s.taskDone.assign(config_.tasks.size(), false);
  current_ = s;
  return s;
}

Cell GridTaskEnv::position(const JointState& s, AgentId a) {
  const AgentLocalState& local = s.perAgent[static_cast<std::size_t>(a)];
  return Cell{local[0], local[1]};
}

void GridTaskEnv::check_state(const JointState& s) const {
  if (static_cast<int>(s.perAgent.size()) != config_.numAgents) {
    fail(ErrorCode::IncompatibleState, "state has " + std::to_string(s.perAgent.size()) +
                                           " agents, environment has " + std::to_string(config_.numAgents));
  }
  if (s.taskDone.size() != config_.tasks.size()) {
    fail(ErrorCode::IncompatibleState, "state task flags do not match environment tasks");
  }
  for (const AgentLocalState& local : s.perAgent) {
    if (local.size() != 2 || !in_grid(config_, Cell{local[0], local[1]})) {
      fail(ErrorCode::IncompatibleState, "agent position outside grid");
    }
  }
}

Cell GridTaskEnv::move(const JointState& s, Cell from, int action) const {
  Cell to = from;
  switch (action) {
    case Up: to.y -= 1; break;
    case Down: to.y += 1; break;
    case Left: to.x -= 1; break;
    case Right: to.x += 1; break;
    default: return from;
  }
  if (!in_grid(config_, to)) return from;
  if (config_.kind == EnvKind::PressurePlate) {
    for (std::size_t g = 0; g < config_.tasks.size(); ++g) {
      int gate = config_.tasks[g].location.x;
      if (!s.taskDone[g] && from.x <= gate && to.x > gate) return from;
    }
  }
  return to;
}

StepOutcome GridTaskEnv::step(const JointState& state, const JointAction& action) {
  check_state(state);
  const int n = config_.numAgents;
  if (static_cast<int>(action.perAgent.size()) != n) {
    fail(ErrorCode::InvalidAction, "joint action arity does not match agent count");
  }
  for (int a : action.perAgent) {
    if (a < 0 || a >= kNumActions) fail(ErrorCode::InvalidAction, "unknown action id " + std::to_string(a));
  }

  StepOutcome out;
  out.nextState = state;
  out.rewards.assign(static_cast<std::size_t>(n), 0.0);
  for (std::size_t g = 0; g < config_.tasks.size(); ++g) {
    if (state.taskDone[g]) continue;
    const TaskSpec& task = config_.tasks[g];
    Coalition actors;
    for (AgentId i = 0; i < n; ++i) {
      if (action.perAgent[static_cast<std::size_t>(i)] == Act && position(state, i) == task.location) {
        actors.insert(i);
      }
    }
    if (actors.size() >= task.requiredCoalitionSize) {
      out.events.push_back(CompletionEvent{static_cast<TaskId>(g), actors});
      out.nextState.taskDone[g] = true;
      for (AgentId i : actors.members()) out.rewards[static_cast<std::size_t>(i)] = 1.0;
    }
  }
  for (AgentId i = 0; i < n; ++i) {
    Cell to = move(state, position(state, i), action.perAgent[static_cast<std::size_t>(i)]);
    out.nextState.perAgent[static_cast<std::size_t>(i)] = {to.x, to.y};
  }
  current_ = out.nextState;
  return out;
}

void GridTaskEnv::inject_state(const JointState& state) {
  check_state(state);
  current_ = state;
}

std::string_view GridTaskEnv::action_name(int action) const {
  static constexpr std::array<std::string_view, kNumActions> kNames{"stay", "up", "down",
                                                                    "left", "right", "act"};
  if (action < 0 || action >= kNumActions) fail(ErrorCode::InvalidAction, "unknown action id");
  return kNames[static_cast<std::size_t>(action)];
}

std::unique_ptr<Environment> GridTaskEnv::clone() const {
  return std::make_unique<GridTaskEnv>(*this);
}

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  return std::make_unique<GridTaskEnv>(config);
}

// ---------------------------------------------------------------------------
// Policies

ScriptedPolicy::ScriptedPolicy(EnvConfig config, std::vector<std::vector<TaskId>> scripts,
                               double epsilon)
    : config_(std::move(config)), scripts_(std::move(scripts)), epsilon_(epsilon) {
  if (static_cast<int>(scripts_.size()) != config_.numAgents) {
    fail(ErrorCode::InvalidArgument, "scripted policy needs one script per agent");
  }
  for (const auto& script : scripts_) {
    for (TaskId g : script) {
      if (g < 0 || g >= config_.num_tasks()) fail(ErrorCode::InvalidArgument, "script names unknown task");
    }
  }
  if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0)) fail(ErrorCode::InvalidArgument, "epsilon must be in [0, 1]");
}

JointAction ScriptedPolicy::nominal(const JointState& state) const {
  JointAction out;
  for (AgentId i = 0; i < config_.numAgents; ++i) {
    int act = GridTaskEnv::Stay;
    for (TaskId g : scripts_[static_cast<std::size_t>(i)]) {
      if (state.taskDone[static_cast<std::size_t>(g)]) continue;
      Cell here = GridTaskEnv::position(state, i);
      Cell goal = config_.tasks[static_cast<std::size_t>(g)].location;
      if (here == goal) {
        act = GridTaskEnv::Act;
      } else if (here.x != goal.x) {
        act = here.x < goal.x ? GridTaskEnv::Right : GridTaskEnv::Left;
      } else {
        act = here.y < goal.y ? GridTaskEnv::Down : GridTaskEnv::Up;
      }
      break;
    }
    out.perAgent.push_back(act);
  }
  return out;
}

JointAction ScriptedPolicy::sample(const JointState& state, std::mt19937_64& rng) const {
  JointAction a = nominal(state);
  if (epsilon_ <= 0.0) return a;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any(0, GridTaskEnv::kNumActions - 1);
  for (int& act : a.perAgent) {
    if (coin(rng) < epsilon_) act = any(rng);
  }
  return a;
}

std::optional<PolicyOracle::Distribution> ScriptedPolicy::distribution(const JointState& state) const {
  if (epsilon_ > 0.0) return std::nullopt;
  return Distribution{{nominal(state), 1.0}};
}

TabularPolicy::TabularPolicy(std::unordered_map<std::string, Distribution> table,
                             Distribution fallback)
    : table_(std::move(table)), fallback_(std::move(fallback)) {
  auto check = [](const Distribution& d, const std::string& where) {
    double total = 0.0;
    for (const auto& [a, p] : d) {
      if (!(p >= 0.0)) fail(ErrorCode::InvalidArgument, "negative probability in " + where);
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) fail(ErrorCode::InvalidArgument, "probabilities of " + where + " do not sum to 1");
  };
  check(fallback_, "fallback");
  for (const auto& [key, d] : table_) check(d, "state " + key);
}

TabularPolicy TabularPolicy::from_rule(Environment& env, const JointState& start,
                                       const std::function<Distribution(const JointState&)>& rule) {
  std::unordered_map<std::string, Distribution> table;
  std::deque<JointState> queue{start};
  std::unordered_set<std::string> seen{serialize(start)};
  while (!queue.empty()) {
    JointState s = queue.front();
    queue.pop_front();
    Distribution d = rule(s);
    for (const auto& [action, p] : d) {
      if (p <= 0.0) continue;
      StepOutcome out = env.step(s, action);
      std::string key = serialize(out.nextState);
      if (seen.insert(key).second) queue.push_back(out.nextState);
    }
    table.emplace(serialize(s), std::move(d));
  }
  JointAction idle;
  idle.perAgent.assign(static_cast<std::size_t>(env.config().numAgents), 0);
  return TabularPolicy(std::move(table), Distribution{{idle, 1.0}});
}

JointAction TabularPolicy::sample(const JointState& state, std::mt19937_64& rng) const {
  auto it = table_.find(serialize(state));
  const Distribution& d = it == table_.end() ? fallback_ : it->second;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  double acc = 0.0;
  for (const auto& [action, p] : d) {
    acc += p;
    if (u < acc) return action;
  }
  return d.back().first;
}

std::optional<PolicyOracle::Distribution> TabularPolicy::distribution(const JointState& state) const {
  auto it = table_.find(serialize(state));
  return it == table_.end() ? fallback_ : it->second;
}

// ---------------------------------------------------------------------------
// Episodes

Trajectory rollout(Environment& env, const PolicyOracle& policy, int depth, std::mt19937_64& rng) {
  Trajectory traj;
  JointState state = env.current();
  for (int t = 0; t < depth && !all_done(state); ++t) {
    JointAction a = policy.sample(state, rng);
    StepOutcome out = env.step(state, a);
    traj.push_back(TrajectoryStep{state, a, out});
    state = traj.back().outcome.nextState;
  }
  return traj;
}

Trajectory run_episode(Environment& env, const PolicyOracle& policy, int maxSteps,
                       std::mt19937_64& rng) {
  if (maxSteps < 1) fail(ErrorCode::InvalidArgument, "maxSteps must be >= 1");
  env.reset(rng());
  return rollout(env, policy, maxSteps, rng);
}

Trajectory run_episode(Environment& env, const PolicyOracle& policy, int maxSteps,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return run_episode(env, policy, maxSteps, rng);
}

}  // namespace marx
