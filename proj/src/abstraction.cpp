#include "marx/abstraction.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <set>

#include "marx/error.hpp"
#include "marx/json_io.hpp"

namespace marx {
namespace {

constexpr const char* kModule = "abstraction";

[[noreturn]] void malformed(const std::string& message) {
  throw Error(ErrorCode::MalformedFile, kModule, message);
}

}  // namespace

Mmdp::Mmdp(int numAgents, std::vector<std::string> taskNames, std::size_t sampleCap)
    : numAgents_(numAgents), tasks_(std::move(taskNames)), sampleCap_(sampleCap) {
  if (sampleCap_ == 0) throw Error(ErrorCode::InvalidArgument, kModule, "sample cap must be >= 1");
  intern(ProgressMatrix(numAgents_, num_tasks()));
}

std::size_t Mmdp::num_transitions() const {
  std::size_t n = 0;
  for (const auto& [key, targets] : transitions_) n += targets.size();
  return n;
}

std::optional<StateId> Mmdp::find(const ProgressMatrix& m) const {
  auto it = index_.find(m);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StateId Mmdp::intern(const ProgressMatrix& m) {
  if (m.agents() != numAgents_ || m.tasks() != num_tasks()) {
    throw Error(ErrorCode::InvalidArgument, kModule, "progress matrix shape does not match abstraction");
  }
  auto [it, inserted] = index_.emplace(m, static_cast<StateId>(states_.size()));
  if (inserted) {
    states_.push_back(m);
    outCounts_.emplace_back();
    visitCount_.push_back(0);
    samples_.emplace_back();
  }
  return it->second;
}

void Mmdp::add_transition(StateId src, const std::string& action, StateId dst, std::uint64_t count) {
  if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= states_.size() ||
      static_cast<std::size_t>(dst) >= states_.size()) {
    throw Error(ErrorCode::InvalidArgument, kModule, "transition references unknown state");
  }
  if (count == 0) return;
  // Rejects edges that would clear completed tasks.
  (void)edge_events(src, dst);
  transitions_[{src, action}][dst] += count;
  outCounts_[static_cast<std::size_t>(src)][dst] += count;
}

void Mmdp::record_sample(StateId s, const std::string& serializedState) {
  auto idx = static_cast<std::size_t>(s);
  visitCount_.at(idx) += 1;
  SampleSet& set = samples_[idx];
  if (std::find(set.kept.begin(), set.kept.end(), serializedState) != set.kept.end()) return;
  set.offered += 1;
  if (set.kept.size() < sampleCap_) {
    set.kept.push_back(serializedState);
    return;
  }
  std::uniform_int_distribution<std::uint64_t> pick(0, set.offered - 1);
  std::uint64_t slot = pick(reservoirRng_);
  if (slot < sampleCap_) set.kept[static_cast<std::size_t>(slot)] = serializedState;
}

std::vector<TargetCount> Mmdp::targets(StateId src, const std::string& action) const {
  std::vector<TargetCount> out;
  auto it = transitions_.find({src, action});
  if (it == transitions_.end()) return out;
  std::uint64_t total = 0;
  for (const auto& [dst, count] : it->second) total += count;
  for (const auto& [dst, count] : it->second) {
    out.push_back(TargetCount{dst, count, static_cast<double>(count) / static_cast<double>(total)});
  }
  return out;
}

std::vector<StateId> Mmdp::successors(StateId src) const {
  std::vector<StateId> out;
  for (const auto& [dst, count] : out_counts(src)) {
    if (dst != src && count > 0) out.push_back(dst);
  }
  return out;
}

bool Mmdp::operator==(const Mmdp& other) const {
  if (numAgents_ != other.numAgents_ || tasks_ != other.tasks_ || sampleCap_ != other.sampleCap_ ||
      states_ != other.states_ || transitions_ != other.transitions_ || visitCount_ != other.visitCount_) {
    return false;
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].kept != other.samples_[i].kept) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

void apply_trajectory(Mmdp& mmdp, const Trajectory& trajectory, const ProgressMatrix& startProgress,
                      const Environment& env) {
  if (trajectory.empty()) return;
  const JointState& first = trajectory.front().state;
  for (TaskId g = 0; g < startProgress.tasks(); ++g) {
    if (first.taskDone.at(static_cast<std::size_t>(g)) != startProgress.task_done(g)) {
      throw Error(ErrorCode::InvalidArgument, kModule, "trajectory start does not match start progress");
    }
  }
  ProgressMatrix current = startProgress;
  StateId s = mmdp.intern(current);
  for (const TrajectoryStep& step : trajectory) {
    mmdp.record_sample(s, serialize(step.state));
    for (const CompletionEvent& e : step.outcome.events) {
      if (current.task_done(e.task)) {
        throw Error(ErrorCode::NonMonotone, kModule, "task '" + mmdp.tasks()[static_cast<std::size_t>(e.task)] + "' completed twice");
      }
    }
    ProgressMatrix next = current.with(step.outcome.events);
    StateId d = mmdp.intern(next);
    mmdp.add_transition(s, env.action_key(step.action), d);
    s = d;
    current = next;
  }
  mmdp.record_sample(s, serialize(trajectory.back().outcome.nextState));
}

std::vector<Trajectory> sample_episodes(Environment& env, const PolicyOracle& policy, int episodes,
                                        int maxSteps, std::uint64_t seed) {
  if (episodes < 1) throw Error(ErrorCode::InvalidArgument, kModule, "episodes must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) out.push_back(run_episode(env, policy, maxSteps, rng));
  return out;
}

Mmdp build_mmdp(Environment& env, const PolicyOracle& policy, int episodes, int maxSteps,
                std::uint64_t seed, std::size_t sampleCap) {
  const EnvConfig& config = env.config();
  std::vector<std::string> names;
  for (const TaskSpec& t : config.tasks) names.push_back(t.name);
  Mmdp mmdp(config.numAgents, std::move(names), sampleCap);
  ProgressMatrix zero(config.numAgents, config.num_tasks());
  for (const Trajectory& t : sample_episodes(env, policy, episodes, maxSteps, seed)) {
    apply_trajectory(mmdp, t, zero, env);
  }
  return mmdp;
}

Plan summarize_plan(const Mmdp& mmdp) {
  const auto n = mmdp.num_states();
  std::vector<std::vector<StateId>> preds(n);
  for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
    for (StateId d : mmdp.successors(s)) preds[static_cast<std::size_t>(d)].push_back(s);
  }
  std::vector<bool> canFinish(n, false);
  std::deque<StateId> queue;
  for (StateId s = 0; s < static_cast<StateId>(n); ++s) {
    if (mmdp.progress(s).all_done()) {
      canFinish[static_cast<std::size_t>(s)] = true;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    StateId d = queue.front();
    queue.pop_front();
    for (StateId p : preds[static_cast<std::size_t>(d)]) {
      if (!canFinish[static_cast<std::size_t>(p)]) {
        canFinish[static_cast<std::size_t>(p)] = true;
        queue.push_back(p);
      }
    }
  }
  if (!canFinish[static_cast<std::size_t>(mmdp.initial())]) {
    throw Error(ErrorCode::NoCompletePath, kModule, "no state with every task complete is reachable");
  }

  Plan plan;
  StateId s = mmdp.initial();
  while (!mmdp.progress(s).all_done()) {
    const auto& counts = mmdp.out_counts(s);
    StateId best = -1;
    std::uint64_t bestCount = 0;
    for (const auto& [d, count] : counts) {
      if (d == s || !canFinish[static_cast<std::size_t>(d)]) continue;
      if (best < 0 || count > bestCount) {
        best = d;
        bestCount = count;
      }
    }
    plan.columns.push_back(mmdp.edge_events(s, best));
    s = best;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Persistence

std::string mmdp_to_text(const Mmdp& mmdp, const EnvConfig* env) {
  Json states = Json::array();
  Json visits = Json::array();
  Json samples = Json::array();
  for (StateId s = 0; s < static_cast<StateId>(mmdp.num_states()); ++s) {
    states.push_back({{"id", s}, {"bits", mmdp.progress(s).to_string()}});
    visits.push_back({{"id", s}, {"count", mmdp.visit_count(s)}});
    samples.push_back({{"id", s}, {"states", mmdp.samples(s)}});
  }
  Json transitions = Json::array();
  for (const auto& [key, targets] : mmdp.transitions()) {
    Json ts = Json::array();
    for (const auto& [dst, count] : targets) ts.push_back({{"dst", dst}, {"count", count}});
    transitions.push_back({{"src", key.first}, {"action", key.second}, {"targets", std::move(ts)}});
  }
  Json doc = {{"version", kMmdpFileVersion},
              {"numAgents", mmdp.num_agents()},
              {"tasks", mmdp.tasks()},
              {"sampleCap", mmdp.sample_cap()},
              {"initial", mmdp.initial()},
              {"states", std::move(states)},
              {"transitions", std::move(transitions)},
              {"visitCounts", std::move(visits)},
              {"samples", std::move(samples)}};
  if (env != nullptr) doc["env"] = env_config_to_json(*env);
  return doc.dump(1);
}

MmdpDocument mmdp_from_text(const std::string& text) {
  Json doc = parse_json_text(text, "mmdp");
  if (!doc.is_object() || !doc.contains("version")) malformed("mmdp: missing version field");
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kMmdpFileVersion) {
    throw Error(ErrorCode::UnsupportedVersion, kModule,
                "mmdp: unsupported version " + doc["version"].dump() + " (expected " +
                    std::to_string(kMmdpFileVersion) + ")");
  }
  try {
    const int agents = doc.at("numAgents").get<int>();
    auto tasks = doc.at("tasks").get<std::vector<std::string>>();
    std::size_t cap = doc.value("sampleCap", Mmdp::kDefaultSampleCap);
    Mmdp mmdp(agents, tasks, cap);
    if (doc.at("initial").get<int>() != 0) malformed("mmdp: initial state must have id 0");

    const Json& states = doc.at("states");
    std::vector<ProgressMatrix> byId(states.size());
    std::vector<bool> present(states.size(), false);
    for (const Json& st : states) {
      int id = st.at("id").get<int>();
      if (id < 0 || static_cast<std::size_t>(id) >= states.size() || present[static_cast<std::size_t>(id)]) {
        malformed("mmdp: state ids must be a permutation of 0..n-1");
      }
      present[static_cast<std::size_t>(id)] = true;
      byId[static_cast<std::size_t>(id)] =
          ProgressMatrix::from_string(agents, static_cast<int>(tasks.size()), st.at("bits").get<std::string>());
    }
    if (byId.empty() || byId[0] != ProgressMatrix(agents, static_cast<int>(tasks.size()))) {
      malformed("mmdp: state 0 must be the all-false matrix");
    }
    for (std::size_t i = 0; i < byId.size(); ++i) {
      if (mmdp.intern(byId[i]) != static_cast<StateId>(i)) malformed("mmdp: duplicate state matrix");
    }

    for (const Json& tr : doc.at("transitions")) {
      StateId src = tr.at("src").get<int>();
      std::string action = tr.at("action").get<std::string>();
      for (const Json& t : tr.at("targets")) {
        auto count = t.at("count").get<std::uint64_t>();
        if (count == 0) malformed("mmdp: transition counts must be >= 1");
        try {
          mmdp.add_transition(src, action, t.at("dst").get<int>(), count);
        } catch (const Error& e) {
          malformed(std::string("mmdp: ") + e.what());
        }
      }
    }
    for (const Json& v : doc.at("visitCounts")) {
      StateId id = v.at("id").get<int>();
      if (id < 0 || static_cast<std::size_t>(id) >= mmdp.num_states()) malformed("mmdp: visit count for unknown state");
      mmdp.visitCount_[static_cast<std::size_t>(id)] = v.at("count").get<std::uint64_t>();
    }
    for (const Json& v : doc.at("samples")) {
      StateId id = v.at("id").get<int>();
      if (id < 0 || static_cast<std::size_t>(id) >= mmdp.num_states()) malformed("mmdp: samples for unknown state");
      auto& set = mmdp.samples_[static_cast<std::size_t>(id)];
      set.kept = v.at("states").get<std::vector<std::string>>();
      if (set.kept.size() > cap) malformed("mmdp: more samples than sampleCap");
      set.offered = set.kept.size();
    }
    MmdpDocument out{std::move(mmdp), std::nullopt};
    if (doc.contains("env")) out.env = env_config_from_json(doc["env"]);
    return out;
  } catch (const Json::exception& e) {
    malformed(std::string("mmdp: ") + e.what());
  }
}

void save(const Mmdp& mmdp, const std::filesystem::path& path, const EnvConfig* env) {
  write_text_file(path, mmdp_to_text(mmdp, env));
}

MmdpDocument load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) malformed("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return mmdp_from_text(buf.str());
}

}  // namespace marx
