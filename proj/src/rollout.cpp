#include "marx/rollout.hpp"

#include <algorithm>
#include <random>
#include <tuple>

#include "marx/checker.hpp"
#include "marx/error.hpp"

namespace marx {

void RolloutParams::validate() const {
  if (rolloutNum < 0) throw Error(ErrorCode::InvalidArgument, "rollout", "rolloutNum must be >= 0");
  if (depthLimit < 1) throw Error(ErrorCode::InvalidArgument, "rollout", "depthLimit must be >= 1");
}

std::vector<StateId> frontier(const Mmdp& mmdp, const TemporalQuery& query) {
  Annotation a = annotate(mmdp, query);
  std::vector<StateId> out;
  out.reserve(a.nodeU.size());
  for (const auto& [s, u] : a.nodeU) out.push_back(s);
  std::sort(out.begin(), out.end(), [&](StateId x, StateId y) {
    return std::make_tuple(-a.nodeU.at(x), mmdp.visit_count(x), x) <
           std::make_tuple(-a.nodeU.at(y), mmdp.visit_count(y), y);
  });
  return out;
}

RolloutResult guided_rollout(Mmdp& mmdp, Environment& env, const PolicyOracle& policy,
                             const TemporalQuery& query, const RolloutParams& params) {
  params.validate();
  RolloutResult result;
  if (params.rolloutNum == 0) return result;

  std::vector<StateId> queue = frontier(mmdp, query);
  std::mt19937_64 rng(params.seed);
  const std::size_t pops = std::min(queue.size(), static_cast<std::size_t>(params.rolloutNum));
  for (std::size_t k = 0; k < pops; ++k) {
    StateId s = queue[k];
    const std::vector<std::string>& stored = mmdp.samples(s);
    if (stored.empty()) {
      throw Error(ErrorCode::EmptySampleMap, "rollout",
                  "abstract state " + std::to_string(s) + " has no stored joint state");
    }
    std::uniform_int_distribution<std::size_t> pick(0, stored.size() - 1);
    env.inject_state(parse_joint_state(stored[pick(rng)]));
    Trajectory t = rollout(env, policy, params.depthLimit, rng);
    ProgressMatrix start = mmdp.progress(s);
    apply_trajectory(mmdp, t, start, env);
    result.steps += t.size();
    result.expanded.push_back(s);
    result.trajectories.push_back(std::move(t));
  }
  return result;
}

}  // namespace marx
