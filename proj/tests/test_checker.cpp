#include <gtest/gtest.h>

#include <random>

#include "marx/checker.hpp"
#include "marx/error.hpp"
#include "marx/fixtures.hpp"
#include "oracles.hpp"

using namespace marx;
namespace mt = marx::testing;

namespace {

const EnvConfig& env() {
  static const EnvConfig c = fixtures::search_rescue_3();
  return c;
}

TemporalQuery q(const std::string& text) { return parse_query(text, env()); }

const CompletionEvent kFire23{0, Coalition{1, 2}};
const CompletionEvent kObstacle12{1, Coalition{0, 1}};

}  // namespace

TEST(MonitorStep, Examples) {
  TemporalQuery fo = q("fire:r2,r3 -> obstacle:r2");
  EXPECT_TRUE(monitor_step(MonitorIndex(1), {kObstacle12}, fo).is_bottom());
  EXPECT_EQ(monitor_step(MonitorIndex(0), {kFire23}, fo), MonitorIndex(1));
  EXPECT_EQ(monitor_step(MonitorIndex(0), {}, fo), MonitorIndex(0));

  TemporalQuery both = q("fire:r2,r3 -> obstacle:r1,r2");
  EXPECT_EQ(monitor_step(MonitorIndex(0), {kFire23, kObstacle12}, both), MonitorIndex(2));
}

TEST(MonitorStep, ViolationsAndNeutralEvents) {
  TemporalQuery fo = q("fire:r2,r3 -> obstacle:r1,r2");
  // Later item first.
  EXPECT_TRUE(monitor_step(MonitorIndex(0), {kObstacle12}, fo).is_bottom());
  // Right task, wrong coalition.
  EXPECT_TRUE(monitor_step(MonitorIndex(0), {{0, Coalition{1}}}, fo).is_bottom());
  // Unqueried task.
  EXPECT_EQ(monitor_step(MonitorIndex(1), {{2, Coalition{0}}}, fo), MonitorIndex(1));
  // Bottom is absorbing.
  EXPECT_TRUE(monitor_step(MonitorIndex::bottom(), {kFire23}, fo).is_bottom());
  // Never beyond the query length.
  EXPECT_EQ(monitor_step(MonitorIndex(2), {{2, Coalition{0}}}, fo), MonitorIndex(2));
}

TEST(MonitorSuccessors, IncludesShorterAdvances) {
  TemporalQuery both = q("fire:r2,r3 -> obstacle:r1,r2");
  std::vector<MonitorIndex> next = monitor_successors(MonitorIndex(0), {kFire23, kObstacle12}, both);
  // Stopping after the fire item leaves obstacle pending while it completes: Bottom.
  EXPECT_EQ(next, (std::vector<MonitorIndex>{MonitorIndex::bottom(), MonitorIndex(2)}));
  EXPECT_EQ(monitor_successors(MonitorIndex(0), {}, both), (std::vector<MonitorIndex>{MonitorIndex(0)}));
}

TEST(CheckFeasible, WalkthroughExamples) {
  Mmdp m = fixtures::walkthrough_mmdp();
  FeasibilityResult yes = check_feasible(m, q("fire:r2,r3 -> victim:r1,r3"));
  ASSERT_TRUE(yes.feasible);
  ASSERT_TRUE(yes.witness.has_value());
  ASSERT_EQ(yes.witness->size(), 3U);
  EXPECT_EQ((*yes.witness)[0].src, 0);
  EXPECT_EQ((*yes.witness)[2].dst, 3);

  FeasibilityResult no = check_feasible(m, q("obstacle:r1,r2 -> victim:r1 -> fire:r2,r3"));
  EXPECT_FALSE(no.feasible);
  EXPECT_FALSE(no.witness.has_value());

  FeasibilityResult empty = check_feasible(m, TemporalQuery{});
  EXPECT_TRUE(empty.feasible);
  ASSERT_TRUE(empty.witness.has_value());
  EXPECT_TRUE(empty.witness->empty());
}

TEST(CheckFeasible, RejectsIncompatibleQueries) {
  Mmdp m = fixtures::walkthrough_mmdp();
  TemporalQuery bad;
  bad.items = {{5, Coalition{0}}};
  EXPECT_THROW(check_feasible(m, bad), Error);
  bad.items = {{0, Coalition{7}}};
  EXPECT_THROW(check_feasible(m, bad), Error);
}

TEST(Annotate, WalkthroughValues) {
  Mmdp m = fixtures::walkthrough_mmdp();
  Annotation a = annotate(m, q("obstacle:r1,r2 -> victim:r1 -> fire:r2,r3"));
  EXPECT_EQ(a.umax, 0);
  EXPECT_EQ(a.nodeU.at(0), 0);
  EXPECT_FALSE(a.nodeU.count(1));

  Annotation b = annotate(m, q("fire:r2,r3 -> obstacle:r1,r2 -> victim:r1"));
  EXPECT_EQ(b.umax, 2);
  EXPECT_EQ(b.nodeU.at(1), 1);
  EXPECT_EQ(b.nodeU.at(2), 2);
  EXPECT_FALSE(b.nodeU.count(3));

  EXPECT_EQ(annotate(m, TemporalQuery{}).umax, 0);
}

TEST(ReachableNodes, BottomIncludedButNotExpanded) {
  Mmdp m = fixtures::walkthrough_mmdp();
  std::vector<ProductNode> nodes = reachable_nodes(m, q("obstacle:r1,r2 -> victim:r1 -> fire:r2,r3"));
  ASSERT_EQ(nodes.size(), 2U);
  EXPECT_EQ(nodes[0], (ProductNode{0, MonitorIndex(0)}));
  EXPECT_EQ(nodes[1], (ProductNode{1, MonitorIndex::bottom()}));
}

// Against brute-force enumeration of every path in small random abstractions.
TEST(CheckerProperties, OracleAgreementWitnessReplayAndAnnotation) {
  std::mt19937_64 rng(123);
  for (int k = 0; k < 400; ++k) {
    Mmdp m = mt::random_mmdp(rng);
    TemporalQuery query = k % 2 == 0 ? mt::random_observed_query(rng, m, 3)
                                     : mt::random_query(rng, m.num_agents(), m.num_tasks(), 3);
    FeasibilityResult r = check_feasible(m, query);
    ASSERT_EQ(r.feasible, mt::brute_force_feasible(m, query)) << "instance " << k;
    ASSERT_EQ(r.feasible, r.witness.has_value());

    // Greedy product reaches |q| exactly when the nondeterministic one does.
    bool greedy = false;
    for (const ProductNode& n : reachable_nodes(m, query)) {
      greedy = greedy || n.monitor == MonitorIndex(static_cast<int>(query.size()));
    }
    EXPECT_EQ(greedy, r.feasible);

    Annotation a = annotate(m, query);
    if (r.feasible) {
      EXPECT_EQ(a.umax, static_cast<int>(query.size()));
      MonitorIndex j(0);
      StateId at = m.initial();
      for (const WitnessEdge& e : *r.witness) {
        EXPECT_EQ(e.src, at);
        EXPECT_GT(m.out_counts(e.src).at(e.dst), 0U);
        EXPECT_EQ(e.events, m.edge_events(e.src, e.dst));
        MonitorIndex next = monitor_step(j, e.events, query);
        EXPECT_FALSE(next.is_bottom());
        EXPECT_GE(next, j);
        j = next;
        at = e.dst;
      }
      EXPECT_EQ(j, MonitorIndex(static_cast<int>(query.size())));
    } else {
      EXPECT_LT(a.umax, static_cast<int>(query.size()));
      EXPECT_TRUE(mt::brute_force_conforming(m, query, static_cast<std::size_t>(a.umax)));
      EXPECT_FALSE(mt::brute_force_conforming(m, query, static_cast<std::size_t>(a.umax) + 1));
    }
  }
}

TEST(CheckerProperties, ShortestWitness) {
  // Two routes to the goal; the witness takes the shorter one.
  Mmdp m(1, {"a", "b"});
  m.intern(ProgressMatrix(1, 2));
  StateId viaA = m.intern(ProgressMatrix(1, 2, 0b01));
  StateId both = m.intern(ProgressMatrix(1, 2, 0b11));
  m.add_transition(0, "x", viaA);
  m.add_transition(viaA, "x", both);
  m.add_transition(0, "y", both);
  EnvConfig e = EnvConfig::minimal(1, {"a", "b"});
  FeasibilityResult r = check_feasible(m, parse_query("b:r1", e));
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.witness->size(), 1U);
}
