#include "marx/service.hpp"

#include <chrono>
#include <cstdlib>

#include "marx/error.hpp"

namespace marx {
namespace {

constexpr const char* kModule = "service";

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Json coalition_json(Coalition c, const EnvConfig& env) {
  Json out = Json::array();
  for (AgentId a : c.members()) out.push_back(env.agent_token(a));
  return out;
}

Json event_json(const CompletionEvent& e, const EnvConfig& env) {
  return Json{{"task", env.tasks.at(static_cast<std::size_t>(e.task)).name},
              {"coalition", coalition_json(e.coalition, env)},
              {"atom", atom_name(e.task, e.coalition, env)}};
}

Json query_json(const TemporalQuery& q, const EnvConfig& env) {
  Json items = Json::array();
  for (const QueryItem& it : q.items) {
    items.push_back({{"task", env.tasks.at(static_cast<std::size_t>(it.task)).name},
                     {"coalition", coalition_json(it.coalition, env)}});
  }
  return Json{{"text", render(q, env)}, {"items", std::move(items)}, {"pctl", to_pctl(q, env)}};
}

std::string task_name(TaskId g, const EnvConfig& env) { return env.tasks.at(static_cast<std::size_t>(g)).name; }

Json clause_json(const ExplanationClause& c, const EnvConfig& env) {
  Json payload = std::visit(
      [&](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PrecedenceClause>) {
          return {{"task", task_name(p.task, env)},
                  {"coalition", coalition_json(p.coalition, env)},
                  {"beforeTask", task_name(p.beforeTask, env)}};
        } else if constexpr (std::is_same_v<T, CoalitionClause>) {
          return {{"task", task_name(p.task, env)},
                  {"queriedCoalition", coalition_json(p.queried, env)},
                  {"requiredCoalition", coalition_json(p.required, env)}};
        } else {
          Json j{{"task", task_name(p.task, env)}};
          if (p.after) j["after"] = task_name(*p.after, env);
          return j;
        }
      },
      c.payload);
  return Json{{"kind", c.kind()}, {"payload", std::move(payload)}, {"text", c.text}};
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

std::filesystem::path resolve(const Json& j, const char* key, const std::filesystem::path& base) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  std::filesystem::path p = it->get<std::string>();
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, kModule, what);
  };
  need(episodes >= 1, "episodes must be >= 1");
  need(maxSteps >= 1, "maxSteps must be >= 1");
  need(rolloutNum >= 0, "rolloutNum must be >= 0");
  need(depthLimit >= 1, "depthLimit must be >= 1");
  need(qmVariableCap >= 1 && qmVariableCap <= 64, "qmVariableCap must lie in 1..64");
}

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& baseDir) {
  try {
    RunConfig c;
    c.envConfig = resolve(j, "envConfig", baseDir);
    c.policy = resolve(j, "policy", baseDir);
    c.mmdpCache = resolve(j, "mmdpCache", baseDir);
    c.episodes = get_or<int>(j, "episodes", c.episodes);
    c.maxSteps = get_or<int>(j, "maxSteps", c.maxSteps);
    c.rolloutNum = get_or<int>(j, "rolloutNum", c.rolloutNum);
    c.depthLimit = get_or<int>(j, "depthLimit", c.depthLimit);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.qmVariableCap = get_or<int>(j, "qmVariableCap", c.qmVariableCap);
    c.queueDuringWrites = get_or<bool>(j, "queueDuringWrites", c.queueDuringWrites);
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedFile, kModule, std::string("run config: ") + e.what());
  }
}

Json run_config_to_json(const RunConfig& c) {
  return Json{{"envConfig", c.envConfig.string()}, {"policy", c.policy.string()},
              {"mmdpCache", c.mmdpCache.string()}, {"episodes", c.episodes},
              {"maxSteps", c.maxSteps},             {"rolloutNum", c.rolloutNum},
              {"depthLimit", c.depthLimit},         {"seed", c.seed},
              {"qmVariableCap", c.qmVariableCap},   {"queueDuringWrites", c.queueDuringWrites}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json_file(path), path.parent_path());
}

std::optional<std::filesystem::path> config_path_from_env() {
  const char* v = std::getenv("MARX_CONFIG");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::filesystem::path(v);
}

QueryAnswer answer_query(Mmdp& mmdp, Environment* env, const PolicyOracle* policy,
                         const TemporalQuery& query, const EnvConfig& vocabulary, const RunConfig& config) {
  require_valid(query, vocabulary);
  QueryAnswer answer;
  auto t0 = Clock::now();
  FeasibilityResult result = check_feasible(mmdp, query);
  answer.timings.checkMs = ms_since(t0);

  if (!result.feasible && env != nullptr && policy != nullptr && config.rolloutNum > 0) {
    t0 = Clock::now();
    guided_rollout(mmdp, *env, *policy, query, RolloutParams{config.rolloutNum, config.depthLimit, config.seed});
    answer.rolloutRan = true;
    answer.timings.rolloutMs = ms_since(t0);
    t0 = Clock::now();
    result = check_feasible(mmdp, query);
    answer.timings.checkMs += ms_since(t0);
  }

  if (result.feasible) {
    answer.feasible = true;
    answer.witness = std::move(result.witness);
  } else {
    t0 = Clock::now();
    ExplainOptions options;
    options.qm.variableCap = config.qmVariableCap;
    answer.report = explain(mmdp, query, vocabulary, options);
    answer.timings.explainMs = ms_since(t0);
  }
  answer.stats = {mmdp.num_states(), mmdp.num_transitions()};
  return answer;
}

Json witness_to_json(const std::vector<WitnessEdge>& witness, const Mmdp& mmdp, const EnvConfig& env) {
  Json out = Json::array();
  for (const WitnessEdge& e : witness) {
    Json events = Json::array();
    for (const CompletionEvent& ev : e.events) events.push_back(event_json(ev, env));
    out.push_back({{"src", e.src},
                   {"dst", e.dst},
                   {"srcBits", mmdp.progress(e.src).to_string()},
                   {"dstBits", mmdp.progress(e.dst).to_string()},
                   {"events", std::move(events)}});
  }
  return out;
}

Json report_to_json(const ExplanationReport& report, const EnvConfig& env) {
  Json failures = Json::array();
  for (const FailureReport& f : report.failures) {
    Json clauses = Json::array();
    for (const ExplanationClause& c : f.clauses) clauses.push_back(clause_json(c, env));
    Json j{{"index", f.index},
           {"task", task_name(f.item.task, env)},
           {"coalition", coalition_json(f.item.coalition, env)},
           {"query", render(f.query, env)},
           {"clauses", std::move(clauses)},
           {"removed", f.removed},
           {"flagged", f.flagged}};
    if (f.term) j["term"] = f.term->encode();
    if (f.witness) j["witnessState"] = *f.witness;
    failures.push_back(std::move(j));
  }
  return Json{{"failures", std::move(failures)},
              {"finalQuery", query_json(report.finalQuery, env)},
              {"finalFeasible", report.finalFeasible},
              {"flagged", report.flagged}};
}

Json answer_to_json(const QueryAnswer& answer, const Mmdp& mmdp, const EnvConfig& env, bool withTimings) {
  Json out{{"verdict", answer.feasible ? "feasible" : "infeasible"},
           {"rolloutRan", answer.rolloutRan},
           {"mmdpStats", {{"numStates", answer.stats.numStates}, {"numTransitions", answer.stats.numTransitions}}}};
  if (answer.witness) out["witness"] = witness_to_json(*answer.witness, mmdp, env);
  if (answer.report) out["report"] = report_to_json(*answer.report, env);
  if (withTimings) {
    out["timings"] = {{"abstractionMs", answer.timings.abstractionMs},
                      {"checkMs", answer.timings.checkMs},
                      {"rolloutMs", answer.timings.rolloutMs},
                      {"explainMs", answer.timings.explainMs}};
  }
  return out;
}

Json plan_to_json(const Plan& plan, const EnvConfig& env) {
  Json columns = Json::array();
  std::vector<Json> rows(static_cast<std::size_t>(env.numAgents), Json::array());
  for (const EventSet& col : plan.columns) {
    Json events = Json::array();
    std::vector<Json> cell(rows.size(), nullptr);
    for (const CompletionEvent& e : col) {
      events.push_back(event_json(e, env));
      for (AgentId a : e.coalition.members()) cell[static_cast<std::size_t>(a)] = task_name(e.task, env);
    }
    columns.push_back(std::move(events));
    for (std::size_t a = 0; a < rows.size(); ++a) rows[a].push_back(cell[a]);
  }
  Json agents = Json::array();
  for (std::size_t a = 0; a < rows.size(); ++a) {
    AgentId id = static_cast<AgentId>(a);
    agents.push_back({{"agent", env.agent_token(id)}, {"name", env.agent_display(id)}, {"cells", rows[a]}});
  }
  return Json{{"columns", std::move(columns)}, {"rows", std::move(agents)}};
}

Json env_summary_to_json(const EnvConfig& env) {
  Json agents = Json::array();
  for (AgentId a = 0; a < env.numAgents; ++a) {
    agents.push_back({{"id", env.agent_token(a)}, {"atom", env.agent_atom(a)}, {"name", env.agent_display(a)}});
  }
  Json tasks = Json::array();
  for (TaskId g = 0; g < env.num_tasks(); ++g) {
    const TaskSpec& t = env.tasks[static_cast<std::size_t>(g)];
    tasks.push_back({{"name", t.name}, {"verb", env.verb(g)}, {"gerund", env.gerund(g)}, {"coalitionSize", t.requiredCoalitionSize}});
  }
  return Json{{"agents", std::move(agents)},
              {"tasks", std::move(tasks)},
              {"grammar", "query := task \":\" agent (\",\" agent)* (\"->\" task \":\" agent (\",\" agent)*)*"}};
}

Json mmdp_stats_to_json(const Mmdp& mmdp) {
  std::uint64_t samples = 0;
  for (std::size_t s = 0; s < mmdp.num_states(); ++s) samples += mmdp.visit_count(static_cast<StateId>(s));
  return Json{{"numStates", mmdp.num_states()},
              {"numTransitions", mmdp.num_transitions()},
              {"numAgents", mmdp.num_agents()},
              {"tasks", mmdp.tasks()},
              {"samples", samples}};
}

Json error_to_json(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    Json j{{"error", std::string(to_string(err->code()))}, {"module", err->module()}, {"detail", err->what()}};
    if (err->offset()) j["offset"] = *err->offset();
    return j;
  }
  return Json{{"error", "Internal"}, {"module", kModule}, {"detail", e.what()}};
}

class Engine::WriteTurn {
 public:
  explicit WriteTurn(Engine& engine) : engine_(engine) {
    if (engine_.writers_.fetch_add(1) > 0 && !engine_.config_.queueDuringWrites) {
      --engine_.writers_;
      throw Error(ErrorCode::Busy, kModule, "the abstraction is being rewritten; retry shortly");
    }
    lock_ = std::unique_lock(engine_.mu_);
  }
  ~WriteTurn() {
    lock_.unlock();
    --engine_.writers_;
  }
  WriteTurn(const WriteTurn&) = delete;
  WriteTurn& operator=(const WriteTurn&) = delete;

 private:
  Engine& engine_;
  std::unique_lock<std::shared_mutex> lock_;
};

Engine::Engine(RunConfig config) : config_(std::move(config)), env_(), mmdp_(1, {}) {
  config_.validate();
  env_ = load_env_config(config_.envConfig);
  auto env = make_environment(env_);
  policy_ = std::shared_ptr<const PolicyOracle>(load_policy(config_.policy, *env));
  bool loaded = false;
  if (!config_.mmdpCache.empty() && std::filesystem::exists(config_.mmdpCache)) {
    MmdpDocument doc = load(config_.mmdpCache);
    std::vector<std::string> names;
    for (const TaskSpec& t : env_.tasks) names.push_back(t.name);
    if (doc.mmdp.num_agents() == env_.numAgents && doc.mmdp.tasks() == names) {
      mmdp_ = std::move(doc.mmdp);
      loaded = true;
    }
  }
  if (!loaded) {
    mmdp_ = build();
    persist();
  }
}

Engine::Engine(RunConfig config, EnvConfig env, std::shared_ptr<const PolicyOracle> policy, Mmdp mmdp)
    : config_(std::move(config)), env_(std::move(env)), policy_(std::move(policy)), mmdp_(std::move(mmdp)) {
  config_.validate();
}

std::shared_lock<std::shared_mutex> Engine::read_turn() {
  if (writers_ > 0 && !config_.queueDuringWrites) {
    throw Error(ErrorCode::Busy, kModule, "the abstraction is being rewritten; retry shortly");
  }
  return std::shared_lock(mu_);
}

Mmdp Engine::build() {
  auto t0 = Clock::now();
  auto env = make_environment(env_);
  Mmdp m = build_mmdp(*env, *policy_, config_.episodes, config_.maxSteps, config_.seed);
  abstractionMs_ = ms_since(t0);
  return m;
}

void Engine::persist() const {
  if (!config_.mmdpCache.empty()) save(mmdp_, config_.mmdpCache, &env_);
}

Engine::Response Engine::query(const std::string& text) {
  TemporalQuery q = parse_query(text, env_);
  require_valid(q, env_);
  const std::string key = render(q, env_);
  {
    auto lock = read_turn();
    {
      std::lock_guard guard(answersMu_);
      auto it = answers_.find(key);
      if (it != answers_.end() && it->second.generation == generation_) return it->second.response;
    }
    auto t0 = Clock::now();
    FeasibilityResult first = check_feasible(mmdp_, q);
    double checkMs = ms_since(t0);
    if (first.feasible || config_.rolloutNum == 0) {
      QueryAnswer answer;
      if (first.feasible) {
        answer.feasible = true;
        answer.witness = std::move(first.witness);
        answer.stats = {mmdp_.num_states(), mmdp_.num_transitions()};
      } else {
        answer = answer_query(mmdp_, nullptr, nullptr, q, env_, config_);
      }
      answer.timings.checkMs = checkMs;
      Response r{answer_to_json(answer, mmdp_, env_, false), answer.timings};
      std::lock_guard guard(answersMu_);
      answers_[key] = CachedAnswer{generation_, r};
      return r;
    }
  }

  WriteTurn turn(*this);
  auto env = make_environment(env_);
  QueryAnswer answer = answer_query(mmdp_, env.get(), policy_.get(), q, env_, config_);
  if (answer.rolloutRan) {
    ++generation_;
    persist();
  }
  Response r{answer_to_json(answer, mmdp_, env_, false), answer.timings};
  std::lock_guard guard(answersMu_);
  answers_[key] = CachedAnswer{generation_, r};
  return r;
}

Json Engine::plan() {
  auto lock = read_turn();
  return plan_to_json(summarize_plan(mmdp_), env_);
}

Json Engine::summary() {
  auto lock = read_turn();
  Json j = mmdp_stats_to_json(mmdp_);
  j["generation"] = generation_;
  return j;
}

Json Engine::env_summary() const { return env_summary_to_json(env_); }

Json Engine::rebuild() {
  WriteTurn turn(*this);
  mmdp_ = build();
  ++generation_;
  {
    std::lock_guard guard(answersMu_);
    answers_.clear();
  }
  persist();
  Json j = mmdp_stats_to_json(mmdp_);
  j["generation"] = generation_;
  j["abstractionMs"] = abstractionMs_;
  return j;
}

}  // namespace marx
