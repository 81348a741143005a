#include <cmath>

#include "capassign/dynamics.hpp"
#include "capassign/integrator.hpp"
#include "capassign/tracker.hpp"
#include "test_util.hpp"

using namespace capassign;

namespace {

QuadraticCost position_cost() {
  Vector q(6);
  q << 1e3, 1e3, 1e3, 0, 0, 0;
  return QuadraticCost(q.asDiagonal(), Matrix::Identity(3, 3));
}

LinearSystem moving_target(const LinearSystem& plant) {
  Vector ref = Vector::Zero(6);
  ref.head(3) << 10.0, -5.0, 2.0;
  return closed_loop_target(plant, position_cost(), ref);
}

double integrated_cost(const TrackingPolicy& policy, const LinearSystem& agent,
                       const LinearSystem& target, const Vector& x0, const Vector& y0) {
  const Index da = agent.state_dim(), dt = target.state_dim();
  Vector z0(da + dt);
  z0 << x0, y0;
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-10;
  cfg.output_dt = 0.5;
  return integrate(
             pair_system(agent, target),
             [&](double, const Vector& z) { return policy.control(z.head(da), z.tail(dt)); }, z0,
             0.0, 30.0, cfg,
             [&](double, const Vector& z, const Vector& u) {
               return policy.stage_cost(z.head(da), z.tail(dt), u);
             })
      .total_cost;
}

}  // namespace

TEST(Tracker, ClosedFormMatchesQuadratureForMovingTarget) {
  const LinearSystem plant = double_integrator_3d();
  const LinearSystem target = moving_target(plant);
  const TrackingPolicy policy = synthesize_tracker(plant, target, position_cost());
  Vector x0(6), y0(6);
  x0 << 100, -50, 20, 30, 0, -10;
  y0 << -40, 60, 0, 5, -5, 0;
  const double predicted = policy.cost_to_go(x0, y0);
  EXPECT_NEAR(integrated_cost(policy, plant, target, x0, y0) / predicted, 1.0, 1e-7);
}

TEST(Tracker, ClosedFormMatchesQuadratureForStationaryTarget) {
  const LinearSystem plant = double_integrator_3d();
  const LinearSystem target = stationary_reference(plant);
  const TrackingPolicy policy = synthesize_tracker(plant, target, position_cost());
  EXPECT_TRUE(policy.core().stationary_target());
  Vector x0(6), y0 = Vector::Zero(6);
  x0 << 3, 4, -1, 0, 2, 0;
  y0.head(3) << 1, 1, 1;
  const double predicted = policy.cost_to_go(x0, y0);
  EXPECT_NEAR(integrated_cost(policy, plant, target, x0, y0) / predicted, 1.0, 1e-7);
}

TEST(Tracker, TargetTermsReproduceCostToGo) {
  const LinearSystem plant = double_integrator_3d();
  const TrackingPolicy policy = synthesize_tracker(plant, moving_target(plant), position_cost());
  SplitMix64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const Vector x = capassign::testing::random_vector(rng, 6, -100, 100);
    const Vector y = capassign::testing::random_vector(rng, 6, -100, 100);
    const auto terms = policy.target_terms(y);
    const double split = policy.core().agent_quadratic(x) + terms.beta + 2.0 * x.dot(terms.w);
    const double direct = policy.cost_to_go(x, y);
    EXPECT_NEAR(split, direct, 1e-9 * std::abs(direct));
  }
}

TEST(Tracker, CostToGoVanishesAtSteadyState) {
  const LinearSystem plant = double_integrator_3d();
  const TrackingPolicy policy = synthesize_tracker(plant, moving_target(plant), position_cost());
  Vector y0(6);
  y0 << 1, 2, 3, 0, 0, 0;
  const SteadyState ss = policy.steady_state(y0);
  EXPECT_NEAR(policy.cost_to_go(ss.agent, ss.target), 0.0, 1e-6);
  EXPECT_LT(ss.error.norm(), 1e-9);
  EXPECT_NEAR(ss.stage_cost, 0.0, 1e-12);
}

TEST(Tracker, CostIsNonNegativeAndPositiveAwayFromTarget) {
  const LinearSystem plant = double_integrator_3d();
  const TrackingPolicy policy = synthesize_tracker(plant, moving_target(plant), position_cost());
  Vector x(6), y(6);
  x << 50, 0, 0, 0, 0, 0;
  y << 0, 0, 0, 0, 0, 0;
  EXPECT_GT(policy.cost_to_go(x, y), 0.0);
}

TEST(Tracker, GainMatchesRiccatiBlock) {
  const LinearSystem plant = double_integrator_3d();
  const QuadraticCost cost = position_cost();
  const TrackingPolicy policy = synthesize_tracker(plant, moving_target(plant), cost);
  const Matrix Kx = cost.control_weight().inverse() * plant.input().transpose() *
                    policy.core().p_agent();
  EXPECT_LT((Kx - policy.core().agent_gain()).norm(), 1e-9 * (1 + Kx.norm()));
  EXPECT_LT(policy.core().closed_loop_drift().eigenvalues().real().maxCoeff(), 0.0);
  EXPECT_LE(policy.core().care_residual(), 1e-9);
}

TEST(Tracker, QuadcopterPairIsConsistent) {
  const LinearSystem plant = quadcopter_linearized();
  Vector q = Vector::Zero(12);
  q.head(6).setConstant(1e3);
  const QuadraticCost cost(q.asDiagonal(), Matrix::Identity(4, 4));
  Vector ref = Vector::Zero(12);
  ref.head(3) << 5, -5, 10;
  const LinearSystem target = closed_loop_target(plant, cost, ref);
  const TrackingPolicy policy = synthesize_tracker(plant, target, cost);
  Vector x0 = Vector::Zero(12), y0 = Vector::Zero(12);
  x0.head(3) << -20, 10, 0;
  y0.head(3) << 10, 0, 5;
  y0.segment(6, 3) << 1, -1, 0;
  const double predicted = policy.cost_to_go(x0, y0);
  EXPECT_NEAR(integrated_cost(policy, plant, target, x0, y0) / predicted, 1.0, 1e-5);
}

TEST(Tracker, SharedCoreAcrossOffsets) {
  const LinearSystem plant = double_integrator_3d();
  const auto core = synthesize_tracker_core(plant, moving_target(plant), position_cost());
  Vector ref = Vector::Zero(6);
  ref.head(3) << -7, 7, 0;
  const LinearSystem other = closed_loop_target(plant, position_cost(), ref);
  const TrackingPolicy a(core, plant.offset(), moving_target(plant).offset());
  const TrackingPolicy b(core, plant.offset(), other.offset());
  EXPECT_EQ(&a.core(), &b.core());
  const Vector y = Vector::Zero(6);
  EXPECT_GT((a.steady_state(y).agent - b.steady_state(y).agent).norm(), 1.0);
}

TEST(Tracker, ErrorMapSelectsPositionsAcrossLayouts) {
  const ErrorMap map = ErrorMap::between(quadcopter_linearized(), double_integrator_3d());
  EXPECT_EQ(map.error_dim(), 3);
  Vector x = Vector::Zero(12), y = Vector::Zero(6);
  x.head(3) << 1, 2, 3;
  y.head(3) << 1, 1, 1;
  EXPECT_NEAR((map.apply(x, y) - Vector::LinSpaced(3, 0, 2)).norm(), 0.0, 1e-15);
}
