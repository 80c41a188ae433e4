#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "marx/envsim.hpp"
#include "marx/progress.hpp"

namespace marx {

using StateId = int;

struct MmdpDocument;

struct TargetCount {
  StateId dst = 0;
  std::uint64_t count = 0;
  double probability = 0.0;
};

/// Policy-abstraction MMDP. States are progress matrices (who completed
/// what); transitions are frequency counts per (source, joint action);
/// probabilities are always derived from counts.
///
/// Not internally synchronized: callers provide reader/writer exclusion.
class Mmdp {
 public:
  using TransitionMap = std::map<std::pair<StateId, std::string>, std::map<StateId, std::uint64_t>>;

  static constexpr std::size_t kDefaultSampleCap = 256;

  Mmdp(int numAgents, std::vector<std::string> taskNames,
       std::size_t sampleCap = kDefaultSampleCap);

  int num_agents() const { return numAgents_; }
  int num_tasks() const { return static_cast<int>(tasks_.size()); }
  const std::vector<std::string>& tasks() const { return tasks_; }
  std::size_t sample_cap() const { return sampleCap_; }

  StateId initial() const { return 0; }
  std::size_t num_states() const { return states_.size(); }
  /// Distinct (source, action, target) triples.
  std::size_t num_transitions() const;
  const ProgressMatrix& progress(StateId s) const { return states_.at(static_cast<std::size_t>(s)); }
  std::optional<StateId> find(const ProgressMatrix& m) const;

  /// Id of `m`, adding the state if it is new.
  StateId intern(const ProgressMatrix& m);
  void add_transition(StateId src, const std::string& action, StateId dst, std::uint64_t count = 1);
  /// Counts one observation at `s` (C(s)) and offers it to X(s).
  void record_sample(StateId s, const std::string& serializedState);

  const TransitionMap& transitions() const { return transitions_; }
  std::vector<TargetCount> targets(StateId src, const std::string& action) const;
  /// Aggregate counts src -> dst summed over joint actions.
  const std::map<StateId, std::uint64_t>& out_counts(StateId src) const {
    return outCounts_.at(static_cast<std::size_t>(src));
  }
  /// Targets other than `src` itself reached with count >= 1, ascending.
  std::vector<StateId> successors(StateId src) const;
  EventSet edge_events(StateId src, StateId dst) const {
    return events_of(progress(src), progress(dst));
  }

  std::uint64_t visit_count(StateId s) const { return visitCount_.at(static_cast<std::size_t>(s)); }
  const std::vector<std::string>& samples(StateId s) const {
    return samples_.at(static_cast<std::size_t>(s)).kept;
  }

  /// Structural equality: shape, states, counts and sample sets.
  bool operator==(const Mmdp& other) const;

 private:
  friend MmdpDocument mmdp_from_text(const std::string& text);

  struct SampleSet {
    std::vector<std::string> kept;
    std::uint64_t offered = 0;
  };

  int numAgents_;
  std::vector<std::string> tasks_;
  std::size_t sampleCap_;
  std::vector<ProgressMatrix> states_;
  std::unordered_map<ProgressMatrix, StateId> index_;
  TransitionMap transitions_;
  std::vector<std::map<StateId, std::uint64_t>> outCounts_;
  std::vector<std::uint64_t> visitCount_;
  std::vector<SampleSet> samples_;
  std::mt19937_64 reservoirRng_{0x5eedULL};
};

/// Folds one trajectory into the abstraction, starting from the abstract
/// state whose progress is `startProgress`.
void apply_trajectory(Mmdp& mmdp, const Trajectory& trajectory,
                      const ProgressMatrix& startProgress, const Environment& env);

std::vector<Trajectory> sample_episodes(Environment& env, const PolicyOracle& policy,
                                        int episodes, int maxSteps, std::uint64_t seed);

Mmdp build_mmdp(Environment& env, const PolicyOracle& policy, int episodes, int maxSteps,
                std::uint64_t seed, std::size_t sampleCap = Mmdp::kDefaultSampleCap);

/// Ordered columns of completion events.
struct Plan {
  std::vector<EventSet> columns;
  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Greedy maximum-probability walk from the initial state to a state where
/// every task is done. Only successors that can still reach such a state are
/// considered; ties go to the smaller state id.
Plan summarize_plan(const Mmdp& mmdp);

struct MmdpDocument {
  Mmdp mmdp;
  std::optional<EnvConfig> env;
};

inline constexpr int kMmdpFileVersion = 1;

std::string mmdp_to_text(const Mmdp& mmdp, const EnvConfig* env = nullptr);
MmdpDocument mmdp_from_text(const std::string& text);
void save(const Mmdp& mmdp, const std::filesystem::path& path, const EnvConfig* env = nullptr);
MmdpDocument load(const std::filesystem::path& path);

}  // namespace marx
