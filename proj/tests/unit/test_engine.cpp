#include <cmath>

#include "capassign/scenarios.hpp"
#include "test_util.hpp"

using namespace capassign;

namespace {

Scenario small(Index n, std::uint64_t seed, World world = World::DoubleIntegrator) {
  return generate(ScenarioSpec::defaults(world, n, seed));
}

}  // namespace

TEST(Engine, CaptureIsClosedBall) {
  Vector a(3), b(3);
  a << 0, 0, 0;
  b << 1, 0, 0;
  EXPECT_TRUE(capture_check(a, b, 1.0));
  EXPECT_FALSE(capture_check(a, b, 0.999));
}

TEST(Engine, DynamicsPolicyAssignsOnceAndCompletes) {
  const Scenario sc = small(5, 1);
  TrackerCache trackers;
  const EngagementConfig cfg = default_engagement_config(World::DoubleIntegrator);
  const SimulationTrace t = run_dynamics_policy(sc.engagement, cfg, trackers);
  EXPECT_EQ(t.status, TerminalStatus::Completed);
  EXPECT_EQ(t.assignment_solves, 1);
  EXPECT_EQ(t.history.size(), 1u);
  EXPECT_EQ(t.total_switches(), 0);
  for (double e : t.exit_times) EXPECT_TRUE(std::isfinite(e));
  EXPECT_NEAR(t.total_cost / t.initial_assignment_cost, 1.0, 0.02);
}

TEST(Engine, ActiveSetShrinksMonotonically) {
  const Scenario sc = small(6, 2);
  TrackerCache trackers;
  const SimulationTrace t =
      run_emd_policy(sc.engagement, default_engagement_config(World::DoubleIntegrator), trackers);
  std::size_t prev = 6;
  for (const TraceSample& s : t.samples) {
    const auto count = static_cast<std::size_t>(std::count(s.active.begin(), s.active.end(), 1));
    EXPECT_LE(count, prev);
    prev = count;
  }
  EXPECT_EQ(prev, 0u);
}

TEST(Engine, CumulativeCostIsNonDecreasingPerAgent) {
  const Scenario sc = small(4, 3);
  TrackerCache trackers;
  const SimulationTrace t = run_dynamics_policy(
      sc.engagement, default_engagement_config(World::DoubleIntegrator), trackers);
  for (std::size_t k = 1; k < t.samples.size(); ++k) {
    const Vector diff = t.samples[k].cumulative_cost - t.samples[k - 1].cumulative_cost;
    EXPECT_GE(diff.minCoeff(), -1e-6 * t.total_cost);
  }
  EXPECT_NEAR(t.samples.back().total_cost(), t.total_cost, 1e-9 * t.total_cost);
}

TEST(Engine, EmdSolvesEveryIntervalUntilCompletion) {
  const Scenario sc = small(5, 4);
  EngagementConfig cfg = default_engagement_config(World::DoubleIntegrator);
  TrackerCache trackers;
  const SimulationTrace t = run_emd_policy(sc.engagement, cfg, trackers);
  EXPECT_EQ(t.assignment_solves,
            static_cast<int>(std::ceil(t.end_time / cfg.reassign_interval - 1e-9)));
  cfg.horizon = 0.5;
  const SimulationTrace cut = run_emd_policy(sc.engagement, cfg, trackers);
  EXPECT_EQ(cut.status, TerminalStatus::HorizonExceeded);
  EXPECT_EQ(cut.assignment_solves, 5);
  EXPECT_DOUBLE_EQ(cut.end_time, 0.5);
}

TEST(Engine, OneVersusOneIsTrivial) {
  const Scenario sc = small(1, 5);
  TrackerCache trackers;
  const auto cfg = default_engagement_config(World::DoubleIntegrator);
  const SimulationTrace d = run_dynamics_policy(sc.engagement, cfg, trackers);
  const SimulationTrace e = run_emd_policy(sc.engagement, cfg, trackers);
  EXPECT_EQ(d.history.front().sigma, std::vector<Index>{0});
  EXPECT_EQ(e.total_switches(), 0);
  EXPECT_NEAR(d.total_cost, e.total_cost, 1e-6 * d.total_cost);
}

TEST(Engine, AssignRestrictsToActivePairs) {
  const Scenario sc = small(4, 6);
  SwarmState swarm = sc.engagement.initial;
  swarm.active_agents = {1, 3};
  swarm.active_targets = {0, 2};
  TrackerCache trackers;
  const AssignmentDecision d =
      assign(swarm, sc.engagement, PolicyKind::Dynamics,
             default_engagement_config(World::DoubleIntegrator), trackers);
  EXPECT_EQ(d.sigma[0], kUnassigned);
  EXPECT_EQ(d.sigma[2], kUnassigned);
  EXPECT_TRUE((d.sigma[1] == 0 && d.sigma[3] == 2) || (d.sigma[1] == 2 && d.sigma[3] == 0));
  EXPECT_EQ(d.cost.rows(), 2);
}

TEST(Engine, QuadcopterCompletesWithinHorizon) {
  const Scenario sc = small(3, 7, World::Quadcopter);
  TrackerCache trackers;
  const auto cfg = default_engagement_config(World::Quadcopter);
  const SimulationTrace t = run_dynamics_policy(sc.engagement, cfg, trackers);
  EXPECT_EQ(t.status, TerminalStatus::Completed);
  EXPECT_LE(t.end_time, cfg.horizon);
}

TEST(Engine, ConfigValidation) {
  EngagementConfig cfg;
  cfg.capture_radius = 0.0;
  EXPECT_ERROR_CODE(cfg.validate(), ErrorCode::InvalidParameter);
  cfg = EngagementConfig{};
  cfg.reassign_interval = -1.0;
  EXPECT_ERROR_CODE(cfg.validate(), ErrorCode::InvalidParameter);
}

TEST(Engine, SwarmAtReconstructsState) {
  const Scenario sc = small(3, 8);
  TrackerCache trackers;
  const SimulationTrace t = run_dynamics_policy(
      sc.engagement, default_engagement_config(World::DoubleIntegrator), trackers);
  const SwarmState s0 = swarm_at(t, 0);
  EXPECT_EQ(s0.active_agents.size(), 3u);
  EXPECT_LT((s0.agent_states[1] - sc.engagement.initial.agent_states[1]).norm(), 1e-12);
}
