#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "marx/error.hpp"
#include "marx/http.hpp"
#include "marx/service.hpp"

using namespace marx;

namespace {

constexpr const char* kGrammar =
    "Query grammar:\n"
    "  query := item ( \"->\" item )*\n"
    "  item  := task \":\" agent ( \",\" agent )*\n"
    "Agents are r1..rN or atom names such as robotII.\n"
    "Example: \"fire:r2,r3 -> victim:r1,r3\"\n";

struct Options {
  std::string config;
  std::string format = "text";
  bool timings = false;
  std::string env;
  std::string policy;
  std::string mmdp;
  std::string out;
  std::string query;
  std::optional<int> episodes;
  std::optional<int> maxSteps;
  std::optional<int> rolloutNum;
  std::optional<int> depthLimit;
  std::optional<std::uint64_t> seed;
  std::optional<int> qmCap;
  std::string host = "127.0.0.1";
  int port = 8080;
};

bool structured(const Options& o) { return o.format == "structured"; }

RunConfig run_config(const Options& o) {
  RunConfig c;
  std::optional<std::filesystem::path> path;
  if (!o.config.empty()) path = o.config;
  else path = config_path_from_env();
  if (path) c = load_run_config(*path);
  if (!o.env.empty()) c.envConfig = o.env;
  if (!o.policy.empty()) c.policy = o.policy;
  if (!o.mmdp.empty()) c.mmdpCache = o.mmdp;
  if (o.episodes) c.episodes = *o.episodes;
  if (o.maxSteps) c.maxSteps = *o.maxSteps;
  if (o.rolloutNum) c.rolloutNum = *o.rolloutNum;
  if (o.depthLimit) c.depthLimit = *o.depthLimit;
  if (o.seed) c.seed = *o.seed;
  if (o.qmCap) c.qmVariableCap = *o.qmCap;
  c.validate();
  return c;
}

std::vector<std::string> task_names(const EnvConfig& env) {
  std::vector<std::string> names;
  for (const TaskSpec& t : env.tasks) names.push_back(t.name);
  return names;
}

struct Loaded {
  Mmdp mmdp;
  std::optional<EnvConfig> env;
};

/// The abstraction from --mmdp, or sampled from the environment and policy
/// and written to --mmdp when that is given.
Loaded load_abstraction(const RunConfig& c) {
  if (!c.mmdpCache.empty() && std::filesystem::exists(c.mmdpCache)) {
    MmdpDocument doc = load(c.mmdpCache);
    std::optional<EnvConfig> env = doc.env;
    if (!c.envConfig.empty()) env = load_env_config(c.envConfig);
    return {std::move(doc.mmdp), env};
  }
  if (c.envConfig.empty() || c.policy.empty()) {
    throw Error(ErrorCode::InvalidArgument, "service", "give --mmdp, or --env and --policy to build an abstraction");
  }
  EnvConfig env = load_env_config(c.envConfig);
  auto sim = make_environment(env);
  auto policy = load_policy(c.policy, *sim);
  Mmdp m = build_mmdp(*sim, *policy, c.episodes, c.maxSteps, c.seed);
  if (!c.mmdpCache.empty()) save(m, c.mmdpCache, &env);
  return {std::move(m), env};
}

EnvConfig vocabulary(const Loaded& l) {
  if (l.env) {
    if (l.env->numAgents != l.mmdp.num_agents() || task_names(*l.env) != l.mmdp.tasks()) {
      throw Error(ErrorCode::InvalidArgument, "service", "environment config does not match the abstraction");
    }
    return *l.env;
  }
  return EnvConfig::minimal(l.mmdp.num_agents(), l.mmdp.tasks());
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

void print_timings(const Timings& t) {
  std::printf("timings: check %.1f ms, rollout %.1f ms, explain %.1f ms\n", t.checkMs, t.rolloutMs, t.explainMs);
}

int cmd_abstract(const Options& o) {
  RunConfig c = run_config(o);
  if (c.envConfig.empty() || c.policy.empty()) {
    throw Error(ErrorCode::InvalidArgument, "service", "abstract needs --env and --policy");
  }
  std::filesystem::path out = o.out.empty() ? c.mmdpCache : std::filesystem::path(o.out);
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "service", "abstract needs --out");
  EnvConfig env = load_env_config(c.envConfig);
  auto sim = make_environment(env);
  auto policy = load_policy(c.policy, *sim);
  Mmdp m = build_mmdp(*sim, *policy, c.episodes, c.maxSteps, c.seed);
  save(m, out, &env);
  if (structured(o)) {
    Json j = mmdp_stats_to_json(m);
    j["path"] = out.string();
    print_json(j);
  } else {
    std::printf("wrote %s: %zu states, %zu transitions\n", out.string().c_str(), m.num_states(), m.num_transitions());
  }
  return 0;
}

int cmd_plan(const Options& o) {
  Loaded l = load_abstraction(run_config(o));
  EnvConfig env = vocabulary(l);
  Plan plan = summarize_plan(l.mmdp);
  if (structured(o)) {
    print_json(plan_to_json(plan, env));
    return 0;
  }
  std::size_t width = 8;
  for (const TaskSpec& t : env.tasks) width = std::max(width, t.name.size() + 2);
  std::printf("%-10s", "");
  for (std::size_t k = 0; k < plan.columns.size(); ++k) std::printf("%-*s", static_cast<int>(width), ("step " + std::to_string(k + 1)).c_str());
  std::printf("\n");
  for (AgentId a = 0; a < env.numAgents; ++a) {
    std::printf("%-10s", env.agent_display(a).c_str());
    for (const EventSet& col : plan.columns) {
      std::string cell = "-";
      for (const CompletionEvent& e : col) {
        if (e.coalition.contains(a)) cell = env.tasks[static_cast<std::size_t>(e.task)].name;
      }
      std::printf("%-*s", static_cast<int>(width), cell.c_str());
    }
    std::printf("\n");
  }
  return 0;
}

void print_answer_text(const QueryAnswer& a, const TemporalQuery& q, const Mmdp& m, const EnvConfig& env) {
  std::printf("%s\n", a.feasible ? "FEASIBLE" : "INFEASIBLE");
  std::printf("query:   %s\nformula: %s\n", render(q, env).c_str(), to_pctl(q, env).c_str());
  if (a.rolloutRan) std::printf("guided rollout ran: %zu states, %zu transitions\n", a.stats.numStates, a.stats.numTransitions);
  if (a.witness) {
    std::printf("witness:\n");
    for (const WitnessEdge& e : *a.witness) {
      std::string events;
      for (const CompletionEvent& ev : e.events) events += (events.empty() ? "" : " ") + atom_name(ev.task, ev.coalition, env);
      std::printf("  s%d %s -> s%d %s  %s\n", e.src, m.progress(e.src).to_string().c_str(), e.dst,
                  m.progress(e.dst).to_string().c_str(), events.c_str());
    }
  }
  if (a.report) {
    std::printf("explanations:\n");
    for (const FailureReport& f : a.report->failures) {
      std::printf("  item %zu of \"%s\"%s\n", f.index, render(f.query, env).c_str(), f.removed ? " (removed)" : "");
      for (const ExplanationClause& c : f.clauses) std::printf("    %s\n", c.text.c_str());
    }
    std::printf("repaired query: %s (%s)\n", render(a.report->finalQuery, env).c_str(),
                a.report->finalFeasible ? "feasible" : "infeasible");
  }
}

int cmd_query(const Options& o, bool allowRollout) {
  RunConfig c = run_config(o);
  Loaded l = load_abstraction(c);
  EnvConfig env = vocabulary(l);
  TemporalQuery q = parse_query(o.query, env);

  std::unique_ptr<Environment> sim;
  std::unique_ptr<PolicyOracle> policy;
  if (allowRollout && !c.policy.empty() && l.env) {
    sim = make_environment(env);
    policy = load_policy(c.policy, *sim);
  }
  QueryAnswer a = answer_query(l.mmdp, sim.get(), policy.get(), q, env, c);
  if (a.rolloutRan && !c.mmdpCache.empty()) save(l.mmdp, c.mmdpCache, &env);

  if (structured(o)) {
    Json j = answer_to_json(a, l.mmdp, env, o.timings);
    j["query"] = render(q, env);
    j["pctl"] = to_pctl(q, env);
    print_json(j);
  } else {
    print_answer_text(a, q, l.mmdp, env);
    if (o.timings) print_timings(a.timings);
  }
  return a.feasible ? 0 : 1;
}

int cmd_serve(const Options& o) {
  RunConfig c = run_config(o);
  Engine engine(c);
  std::fprintf(stderr, "serving on http://%s:%d (%zu states)\n", o.host.c_str(), o.port,
               engine.summary()["numStates"].get<std::size_t>());
  serve(engine, o.host, o.port);
  return 0;
}

void add_run_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--env", o.env, "environment config (JSON)");
  cmd->add_option("--policy", o.policy, "policy (JSON)");
  cmd->add_option("--mmdp", o.mmdp, "abstraction file");
  cmd->add_option("--episodes", o.episodes, "episodes sampled to build the abstraction");
  cmd->add_option("--max-steps", o.maxSteps, "step limit per episode");
  cmd->add_option("--seed", o.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Check temporal multi-agent queries against a policy abstraction and explain failures"};
  app.footer(kGrammar);
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "run config (JSON); defaults to $MARX_CONFIG");
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"text", "structured"}));

  CLI::App* abstract = app.add_subcommand("abstract", "sample the policy and save the abstraction");
  add_run_options(abstract, o);
  abstract->add_option("--out", o.out, "where to write the abstraction");

  CLI::App* plan = app.add_subcommand("plan", "print the most likely complete plan");
  add_run_options(plan, o);

  CLI::App* check = app.add_subcommand("check", "decide feasibility, roll out if needed, explain failures");
  CLI::App* explainCmd = app.add_subcommand("explain", "explain why a query is infeasible (no rollout)");
  for (CLI::App* cmd : {check, explainCmd}) {
    add_run_options(cmd, o);
    cmd->add_option("--query", o.query, "temporal query")->required();
    cmd->add_option("--qm-cap", o.qmCap, "largest variable count handed to minimization");
    cmd->add_flag("--timings", o.timings, "report per-phase times");
  }
  check->add_option("--rollout-num", o.rolloutNum, "guided rollouts per check");
  check->add_option("--depth-limit", o.depthLimit, "steps per guided rollout");

  CLI::App* serveCmd = app.add_subcommand("serve", "serve the HTTP API");
  add_run_options(serveCmd, o);
  serveCmd->add_option("--host", o.host, "bind address");
  serveCmd->add_option("--port", o.port, "port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (*abstract) return cmd_abstract(o);
    if (*plan) return cmd_plan(o);
    if (*check) return cmd_query(o, true);
    if (*explainCmd) return cmd_query(o, false);
    if (*serveCmd) return cmd_serve(o);
  } catch (const Error& e) {
    std::cerr << "error [" << e.module() << "/" << to_string(e.code()) << "]: " << e.what() << "\n";
    if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::UnknownTask ||
        e.code() == ErrorCode::UnknownAgent || e.code() == ErrorCode::InvalidQuery) {
      std::cerr << "\n" << kGrammar;
    }
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
