#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "marx/abstraction.hpp"
#include "marx/checker.hpp"
#include "marx/explainer.hpp"
#include "marx/json_io.hpp"
#include "marx/query.hpp"
#include "marx/rollout.hpp"

namespace marx {

struct RunConfig {
  std::filesystem::path envConfig;
  std::filesystem::path policy;
  std::filesystem::path mmdpCache;
  int episodes = 200;
  int maxSteps = 10000;
  int rolloutNum = 10;
  int depthLimit = 50;
  std::uint64_t seed = 0;
  int qmVariableCap = 24;
  /// Requests that arrive while the abstraction is being rewritten wait
  /// for the writer instead of failing with Busy.
  bool queueDuringWrites = false;

  void validate() const;
};

/// Keys mirror the field names; paths resolve relative to `baseDir`.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& baseDir = {});
Json run_config_to_json(const RunConfig& c);
RunConfig load_run_config(const std::filesystem::path& path);
/// Path named by the MARX_CONFIG environment variable, if set.
std::optional<std::filesystem::path> config_path_from_env();

struct Timings {
  double abstractionMs = 0.0;
  double checkMs = 0.0;
  double rolloutMs = 0.0;
  double explainMs = 0.0;
};

struct MmdpStats {
  std::size_t numStates = 0;
  std::size_t numTransitions = 0;
};

struct QueryAnswer {
  bool feasible = false;
  /// Set when feasible.
  std::optional<std::vector<WitnessEdge>> witness;
  /// Set when infeasible.
  std::optional<ExplanationReport> report;
  bool rolloutRan = false;
  Timings timings;
  MmdpStats stats;
};

/// Checks the query; when infeasible and an environment and policy are
/// given, runs guided rollout on `mmdp` and checks again; when still
/// infeasible, explains. `mmdp` is modified only by the rollout.
QueryAnswer answer_query(Mmdp& mmdp, Environment* env, const PolicyOracle* policy,
                         const TemporalQuery& query, const EnvConfig& vocabulary, const RunConfig& config);

Json witness_to_json(const std::vector<WitnessEdge>& witness, const Mmdp& mmdp, const EnvConfig& env);
Json report_to_json(const ExplanationReport& report, const EnvConfig& env);
Json answer_to_json(const QueryAnswer& answer, const Mmdp& mmdp, const EnvConfig& env, bool withTimings);
Json plan_to_json(const Plan& plan, const EnvConfig& env);
Json env_summary_to_json(const EnvConfig& env);
Json mmdp_stats_to_json(const Mmdp& mmdp);
Json error_to_json(const std::exception& e);

/// Shared state behind the HTTP API: one abstraction, read concurrently by
/// queries and rewritten exclusively by rollouts and rebuilds.
class Engine {
 public:
  /// Loads the environment and policy, then the cached abstraction or, if
  /// there is none, builds and caches it.
  explicit Engine(RunConfig config);
  Engine(RunConfig config, EnvConfig env, std::shared_ptr<const PolicyOracle> policy, Mmdp mmdp);

  /// Answer body for a query (timings excluded) plus the timings.
  struct Response {
    Json body;
    Timings timings;
  };
  Response query(const std::string& text);
  Json plan();
  Json summary();
  Json env_summary() const;
  /// Re-samples the abstraction from scratch. Errors: Busy when another
  /// write is in progress and queueing is off.
  Json rebuild();

  bool writing() const { return writers_.load() > 0; }
  const EnvConfig& env() const { return env_; }
  const RunConfig& config() const { return config_; }

 private:
  class WriteTurn;

  std::shared_lock<std::shared_mutex> read_turn();
  Mmdp build();
  void persist() const;

  RunConfig config_;
  EnvConfig env_;
  std::shared_ptr<const PolicyOracle> policy_;
  Mmdp mmdp_;
  double abstractionMs_ = 0.0;
  std::uint64_t generation_ = 0;

  struct CachedAnswer {
    std::uint64_t generation;
    Response response;
  };
  std::map<std::string, CachedAnswer> answers_;
  std::mutex answersMu_;

  mutable std::shared_mutex mu_;
  std::atomic<int> writers_{0};
};

}  // namespace marx
