// Runs every primary acceptance criterion and prints one PASS/FAIL line each.
// Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <regex>
#include <sstream>
#include <string>

#include "marx/checker.hpp"
#include "marx/error.hpp"
#include "marx/explainer.hpp"
#include "marx/fixtures.hpp"
#include "marx/qm.hpp"
#include "marx/rollout.hpp"
#include "marx/service.hpp"
#include "oracles.hpp"

using namespace marx;
namespace mt = marx::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failed expectations; the first few are kept for the report.
class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  int failures() const { return failures_; }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, summary + "; " + std::to_string(failures_) + " violation(s): " + notes_};
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

std::string squash(const std::string& s) {
  return std::regex_replace(std::regex_replace(s, std::regex("\\s+"), " "), std::regex("^ | $"), "");
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome walkthrough() {
  auto t0 = Clock::now();
  Tally t;
  EnvConfig env = fixtures::search_rescue_3();
  Mmdp m = fixtures::walkthrough_mmdp();
  RunConfig cfg;

  TemporalQuery feasible = parse_query("fire:r2,r3 -> victim:r1,r3", env);
  QueryAnswer a = answer_query(m, nullptr, nullptr, feasible, env, cfg);
  t.expect(a.feasible && a.witness.has_value(), "fire -> victim not feasible");

  TemporalQuery q = parse_query("obstacle:r1,r2 -> victim:r1 -> fire:r2,r3", env);
  t.expect(annotate(m, q).umax == 0, "initial umax != 0");
  QueryAnswer b = answer_query(m, nullptr, nullptr, q, env, cfg);
  t.expect(!b.feasible && b.report.has_value(), "walkthrough query not infeasible");
  if (b.report) {
    const auto& f = b.report->failures;
    t.expect(f.size() == 2, "expected 2 failures, got " + std::to_string(f.size()));
    if (f.size() == 2) {
      t.expect(annotate(m, f[1].query).umax == 2, "umax after first repair != 2");
      t.expect(f[0].clauses.size() == 1 && squash(f[0].clauses[0].text) ==
                                               "The robots cannot remove the obstacle because fighting the fire "
                                               "must be completed before removing the obstacle.",
               "first sentence differs");
      t.expect(f[1].clauses.size() == 1 && squash(f[1].clauses[0].text) ==
                                               "The robots cannot rescue the victim because Robot I needs Robot "
                                               "III to help rescue the victim.",
               "second sentence differs");
    }
    t.expect(render(b.report->finalQuery, env) == "fire:r2,r3 -> obstacle:r1,r2 -> victim:r1,r3",
             "final query " + render(b.report->finalQuery, env));
    t.expect(b.report->finalFeasible && check_feasible(m, b.report->finalQuery).feasible, "final query not feasible");
  }
  double dt = seconds_since(t0);
  t.expect(dt < 1.0, "runtime " + fmt("%.3f s", dt));
  return t.outcome("feasible, umax 0 then 2, two sentences verbatim, repaired query feasible in " + fmt("%.3f s", dt));
}

Outcome checker_oracle() {
  auto t0 = Clock::now();
  Tally t;
  std::mt19937_64 rng(20240601);
  int feasible = 0;
  const int instances = 1000;
  for (int i = 0; i < instances; ++i) {
    Mmdp m = mt::random_mmdp(rng);
    TemporalQuery q = i % 2 == 0 ? mt::random_observed_query(rng, m, 3)
                                 : mt::random_query(rng, m.num_agents(), m.num_tasks(), 3);
    bool expected = mt::brute_force_feasible(m, q);
    FeasibilityResult r = check_feasible(m, q);
    feasible += expected ? 1 : 0;
    t.expect(r.feasible == expected, "instance " + std::to_string(i) + " disagrees");
  }
  double dt = seconds_since(t0);
  t.expect(dt < 60.0, "runtime " + fmt("%.1f s", dt));
  return t.outcome(std::to_string(instances) + " instances (" + std::to_string(feasible) + " feasible), " +
                   std::to_string(t.failures()) + " disagreements, " + fmt("%.2f s", dt));
}

Outcome qm_oracle() {
  auto t0 = Clock::now();
  Tally t;
  std::mt19937_64 rng(7);
  const int instances = 1000;
  int small = 0;
  for (int i = 0; i < instances; ++i) {
    int n = std::uniform_int_distribution<int>(1, 10)(rng);
    std::vector<BitAssignment> on = mt::random_on_set(rng, n);
    std::vector<Implicant> terms = minimal_dnf(on, n);
    std::string problem = mt::truth_table_problem(terms, on, n);
    t.expect(problem.empty(), "instance " + std::to_string(i) + ": " + problem);
    if (n <= 6) {
      ++small;
      std::size_t best = mt::exhaustive_min_cover_size(on, n);
      t.expect(terms.size() == best, "instance " + std::to_string(i) + ": " + std::to_string(terms.size()) +
                                         " terms, minimum is " + std::to_string(best));
    }
  }
  double dt = seconds_since(t0);
  t.expect(dt < 120.0, "runtime " + fmt("%.1f s", dt));
  return t.outcome(std::to_string(instances) + " ON-sets over 1..10 variables, " + std::to_string(small) +
                   " checked against exhaustive minimum cover, " + fmt("%.2f s", dt));
}

Outcome explain_properties() {
  auto t0 = Clock::now();
  Tally t;
  std::mt19937_64 rng(99);
  int queries = 0;
  int failures = 0;
  int removals = 0;
  while (queries < 500) {
    Mmdp m = mt::random_mmdp(rng);
    TemporalQuery q = mt::random_observed_query(rng, m, 3);
    if (mt::brute_force_feasible(m, q)) continue;
    ++queries;
    EnvConfig env = EnvConfig::minimal(m.num_agents(), m.tasks());
    std::string id = "query " + std::to_string(queries);
    try {
      ExplanationReport r = explain(m, q, env);
      std::size_t cap = static_cast<std::size_t>(m.num_tasks()) * (q.size() + 1);
      t.expect(!r.failures.empty() && r.failures.size() <= cap, id + ": failure count out of range");
      bool finalOk = mt::brute_force_feasible(m, r.finalQuery);
      t.expect(r.finalFeasible == finalOk, id + ": finalFeasible disagrees with oracle");
      bool onlyRemovalsLeft = true;
      for (const FailureReport& f : r.failures) onlyRemovalsLeft = onlyRemovalsLeft && f.removed;
      t.expect(finalOk || onlyRemovalsLeft, id + ": final query infeasible");
      for (const FailureReport& f : r.failures) {
        ++failures;
        removals += f.removed ? 1 : 0;
        t.expect(f.index >= 1 && f.index <= f.query.size(), id + ": index out of range");
        t.expect(mt::brute_force_conforming(m, f.query, f.index - 1), id + ": items before the failure not matchable");
        t.expect(!mt::brute_force_conforming(m, f.query, f.index), id + ": reported failure is matchable");
      }
    } catch (const Error& e) {
      t.expect(false, id + ": " + e.what());
    }
  }
  double dt = seconds_since(t0);
  return t.outcome(std::to_string(queries) + " infeasible queries, " + std::to_string(failures) + " failures (" +
                   std::to_string(removals) + " never observed), all localized and repaired, " + fmt("%.2f s", dt));
}

Outcome rollout_flip() {
  Tally t;
  fixtures::TwoOrderings f = fixtures::two_orderings();
  TemporalQuery q = parse_query("b:r1 -> a:r1", f.env);
  RolloutParams params{10, 50, 0};
  auto run = [&](Mmdp& m) {
    auto sim = make_environment(f.env);
    return guided_rollout(m, *sim, *f.policy, q, params);
  };
  auto sim = make_environment(f.env);
  Mmdp m = build_mmdp(*sim, *f.policy, 1, f.env.maxEpisodeSteps, f.episodeSeed);
  t.expect(!check_feasible(m, q).feasible, "feasible before rollout");
  Mmdp again = m;
  RolloutResult r = run(m);
  t.expect(check_feasible(m, q).feasible, "still infeasible after rollout");
  run(again);
  t.expect(again == m, "rollout not deterministic under the fixed seed");
  return t.outcome("infeasible on the 1-episode abstraction, feasible after " + std::to_string(r.expanded.size()) +
                   " rollouts (" + std::to_string(r.steps) + " steps), identical on rerun");
}

TemporalQuery plan_query(const Plan& plan) {
  TemporalQuery q;
  for (const EventSet& column : plan.columns) {
    for (const CompletionEvent& e : column) q.items.push_back({e.task, e.coalition});
  }
  return q;
}

Outcome desk_scale() {
  Tally t;
  EnvConfig env = fixtures::desk_5x5();
  ScriptedPolicy policy = fixtures::desk_5x5_policy(0.1);
  RunConfig cfg;
  cfg.episodes = 200;
  cfg.qmVariableCap = 25;

  struct Run {
    double seconds;
    double buildSeconds;
    QueryAnswer answer;
  };
  std::size_t states = 0;
  // Abstraction construction plus query answering, median of five runs.
  auto end_to_end = [&](const std::function<TemporalQuery(const Mmdp&)>& make) {
    std::vector<Run> runs;
    for (int rep = 0; rep < 5; ++rep) {
      auto t0 = Clock::now();
      auto sim = make_environment(env);
      Mmdp m = build_mmdp(*sim, policy, cfg.episodes, cfg.maxSteps, cfg.seed);
      double build = seconds_since(t0);
      states = m.num_states();
      TemporalQuery q = make(m);
      QueryAnswer a = answer_query(m, sim.get(), &policy, q, env, cfg);
      runs.push_back(Run{seconds_since(t0), build, std::move(a)});
    }
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.seconds < b.seconds; });
    return std::move(runs[runs.size() / 2]);
  };

  Run feasible = end_to_end([](const Mmdp& m) { return plan_query(summarize_plan(m)); });
  std::string planned;
  Run infeasible = end_to_end([&](const Mmdp& m) {
    TemporalQuery q = plan_query(summarize_plan(m));
    planned = render(q, env);
    for (std::size_t k : {0U, 2U, 4U}) {
      q.items[k].coalition = Coalition{q.items[k].coalition.members().front()};
    }
    return q;
  });

  t.expect(feasible.answer.feasible, "plan query not feasible");
  t.expect(!infeasible.answer.feasible && infeasible.answer.report.has_value(), "planted query not infeasible");
  std::size_t count = infeasible.answer.report ? infeasible.answer.report->failures.size() : 0;
  t.expect(count == 3, "explanation count " + std::to_string(count) + " != 3");
  if (infeasible.answer.report) t.expect(infeasible.answer.report->finalFeasible, "repaired query not feasible");
  t.expect(feasible.seconds < 30.0, "feasible took " + fmt("%.1f s", feasible.seconds));
  t.expect(infeasible.seconds < 120.0, "infeasible took " + fmt("%.1f s", infeasible.seconds));
  t.expect(infeasible.seconds > feasible.seconds, "infeasible not slower than feasible");
  std::ostringstream s;
  s << states << " states; plan " << planned << "; feasible " << fmt("%.2f s", feasible.seconds) << " (build "
    << fmt("%.2f", feasible.buildSeconds) << "), infeasible " << fmt("%.2f s", infeasible.seconds) << " (build "
    << fmt("%.2f", infeasible.buildSeconds) << ", rollout " << fmt("%.0f ms", infeasible.answer.timings.rolloutMs)
    << ", explain " << fmt("%.0f ms", infeasible.answer.timings.explainMs) << "), " << count << " explanations";
  return t.outcome(s.str());
}

Outcome persistence() {
  Tally t;
  std::vector<std::pair<std::string, Mmdp>> cases;
  std::vector<std::optional<EnvConfig>> envs;
  auto add = [&](std::string name, Mmdp m, std::optional<EnvConfig> env) {
    cases.emplace_back(std::move(name), std::move(m));
    envs.push_back(std::move(env));
  };
  add("walkthrough", fixtures::walkthrough_mmdp(), fixtures::search_rescue_3());
  {
    EnvConfig env = fixtures::search_rescue_3();
    auto sim = make_environment(env);
    add("search-rescue", build_mmdp(*sim, fixtures::search_rescue_3_policy(0.1), 50, 10000, 3), env);
  }
  {
    fixtures::TwoOrderings f = fixtures::two_orderings();
    auto sim = make_environment(f.env);
    Mmdp m = build_mmdp(*sim, *f.policy, 1, 10000, f.episodeSeed);
    add("two-orderings", m, f.env);
    guided_rollout(m, *sim, *f.policy, parse_query("b:r1 -> a:r1", f.env), {});
    add("two-orderings after rollout", std::move(m), f.env);
  }
  {
    EnvConfig env = fixtures::desk_5x5();
    auto sim = make_environment(env);
    add("desk", build_mmdp(*sim, fixtures::desk_5x5_policy(0.1), 20, 10000, 1), env);
  }
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) add("random", mt::random_mmdp(rng), std::nullopt);

  double worst = 0.0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& [name, m] = cases[c];
    const EnvConfig* env = envs[c] ? &*envs[c] : nullptr;
    MmdpDocument doc = mmdp_from_text(mmdp_to_text(m, env));
    t.expect(doc.mmdp == m, name + ": structure differs");
    t.expect(doc.env.has_value() == (env != nullptr), name + ": env presence differs");
    if (env && doc.env) t.expect(env_config_to_json(*doc.env) == env_config_to_json(*env), name + ": env differs");
    for (const auto& [key, targets] : m.transitions()) {
      std::uint64_t total = 0;
      for (const auto& [dst, count] : targets) total += count;
      for (const TargetCount& tc : doc.mmdp.targets(key.first, key.second)) {
        double expected = static_cast<double>(targets.at(tc.dst)) / static_cast<double>(total);
        worst = std::max(worst, std::abs(tc.probability - expected));
      }
    }
  }
  t.expect(worst <= 1e-12, "probability error " + fmt("%.3g", worst));
  return t.outcome(std::to_string(cases.size()) + " abstractions round-tripped, max probability error " +
                   fmt("%.3g", worst));
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"walkthrough", walkthrough},
      {"checker-oracle", checker_oracle},
      {"qm-oracle", qm_oracle},
      {"explain-properties", explain_properties},
      {"rollout-flip", rollout_flip},
      {"desk-scale", desk_scale},
      {"persistence", persistence},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
