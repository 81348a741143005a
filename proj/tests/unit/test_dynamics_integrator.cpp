#include <cmath>

#include "capassign/dynamics.hpp"
#include "capassign/integrator.hpp"
#include "test_util.hpp"

using namespace capassign;

TEST(Dynamics, DoubleIntegratorStructure) {
  const LinearSystem s = double_integrator_3d();
  EXPECT_EQ(s.state_dim(), 6);
  EXPECT_EQ(s.input_dim(), 3);
  EXPECT_EQ(s.layout().slice("position").begin, 0);
  EXPECT_EQ(s.layout().slice("velocity").begin, 3);
  EXPECT_TRUE(s.drift().topRightCorner(3, 3).isIdentity());
  EXPECT_TRUE(s.input().bottomRows(3).isIdentity());
}

TEST(Dynamics, QuadcopterStructure) {
  const QuadcopterParams p;
  EXPECT_DOUBLE_EQ(p.mass, 0.1);
  EXPECT_DOUBLE_EQ(p.ixx, 0.00062);
  EXPECT_DOUBLE_EQ(p.iyy, 0.00113);
  EXPECT_NEAR(p.izz, 0.9 * (p.ixx + p.iyy), 1e-18);
  const LinearSystem s = quadcopter_linearized(p);
  EXPECT_EQ(s.state_dim(), 12);
  EXPECT_EQ(s.input_dim(), 4);
  EXPECT_EQ(s.layout().slice("position").size, 3);
  EXPECT_EQ(s.layout().slice("rates").begin, 9);
  // Gravity couples pitch and roll into translational acceleration.
  EXPECT_DOUBLE_EQ(s.drift()(6, 4), -p.gravity);
  EXPECT_DOUBLE_EQ(s.drift()(7, 5), p.gravity);
  EXPECT_EQ((s.drift().array() != 0.0).count(), 8);
  EXPECT_DOUBLE_EQ(s.input()(8, 0), -1.0 / p.mass);
  EXPECT_NEAR(s.input()(9, 1), 1.0 / p.ixx, 1e-9);
}

TEST(Dynamics, InvalidQuadcopterParameters) {
  QuadcopterParams p;
  p.mass = -1.0;
  EXPECT_ERROR_CODE(quadcopter_linearized(p), ErrorCode::InvalidParameter);
}

TEST(Dynamics, ClosedLoopTargetSettlesAtReference) {
  const LinearSystem plant = double_integrator_3d();
  Vector q(6);
  q << 1e3, 1e3, 1e3, 0, 0, 0;
  Vector ref = Vector::Zero(6);
  ref.head(3) << 4, -2, 9;
  const LinearSystem target =
      closed_loop_target(plant, QuadraticCost(q.asDiagonal(), Matrix::Identity(3, 3)), ref);
  EXPECT_TRUE(target.is_autonomous());
  Vector y0 = Vector::Zero(6);
  y0.tail(3) << 50, 0, -20;
  IntegratorConfig cfg;
  const Trajectory traj = integrate(target, {}, y0, 0.0, 20.0, cfg);
  EXPECT_LT((traj.states.back() - ref).norm(), 1e-5);
}

TEST(Dynamics, PairSystemStacksBlocks) {
  const LinearSystem a = double_integrator_3d();
  const LinearSystem t = stationary_reference(a);
  const LinearSystem pair = pair_system(a, t);
  EXPECT_EQ(pair.state_dim(), 12);
  EXPECT_EQ(pair.input_dim(), 3);
  EXPECT_TRUE(pair.input().bottomRows(6).isZero());
  EXPECT_TRUE(pair.drift().topLeftCorner(6, 6).isApprox(a.drift()));
}

TEST(Integrator, ExponentialDecayMatchesExactSolution) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  Vector y0(1);
  y0 << 1.0;
  const OdeResult r = integrate_ode([](double, const Vector& y, Vector& dy) { dy = -2.0 * y; },
                                    0.0, 3.0, y0, cfg);
  EXPECT_NEAR(r.y_end(0), std::exp(-6.0), 1e-10);
  EXPECT_DOUBLE_EQ(r.t_end, 3.0);
  EXPECT_FALSE(r.stopped_by_observer);
}

TEST(Integrator, HarmonicOscillatorConservesEnergy) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  Vector y0(2);
  y0 << 1.0, 0.0;
  const OdeResult r = integrate_ode(
      [](double, const Vector& y, Vector& dy) {
        dy(0) = y(1);
        dy(1) = -y(0);
      },
      0.0, 2.0 * M_PI, y0, cfg);
  EXPECT_NEAR(r.y_end(0), 1.0, 1e-8);
  EXPECT_NEAR(r.y_end(1), 0.0, 1e-8);
}

TEST(Integrator, ObserverSeesGridAndCanStop) {
  IntegratorConfig cfg;
  cfg.output_dt = 0.25;
  Vector y0(1);
  y0 << 0.0;
  std::vector<double> seen;
  const OdeResult r = integrate_ode([](double, const Vector&, Vector& dy) { dy(0) = 1.0; }, 0.0,
                                    10.0, y0, cfg, [&](double t, const Vector& y) {
                                      seen.push_back(t);
                                      EXPECT_NEAR(y(0), t, 1e-12);
                                      return t < 1.0;  // false stops
                                    });
  EXPECT_TRUE(r.stopped_by_observer);
  EXPECT_NEAR(r.t_end, 1.0, 1e-12);
  ASSERT_GE(seen.size(), 5u);
  EXPECT_NEAR(seen[1] - seen[0], 0.25, 1e-12);
}

TEST(Integrator, CostQuadratureOfLinearSystem) {
  // x' = -x, cost x^2: integral of exp(-2t) on [0, 5].
  const LinearSystem sys(Matrix::Constant(1, 1, -1.0), Matrix::Zero(1, 1));
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  Vector x0(1);
  x0 << 1.0;
  const Trajectory traj =
      integrate(sys, {}, x0, 0.0, 5.0, cfg,
                [](double, const Vector& x, const Vector&) { return x(0) * x(0); });
  EXPECT_NEAR(traj.total_cost, 0.5 * (1.0 - std::exp(-10.0)), 1e-9);
  EXPECT_EQ(traj.times.size(), traj.cumulative_cost.size());
}

TEST(Integrator, RejectsBadConfig) {
  IntegratorConfig cfg;
  cfg.rel_tol = 0.0;
  EXPECT_ERROR_CODE(cfg.validate(), ErrorCode::InvalidParameter);
}

TEST(Integrator, NonFiniteStateRaises) {
  IntegratorConfig cfg;
  Vector y0(1);
  y0 << 1.0;
  EXPECT_ERROR_CODE(integrate_ode([](double, const Vector& y, Vector& dy) {
                      dy(0) = std::numeric_limits<double>::quiet_NaN() * y(0);
                    },
                                  0.0, 1.0, y0, cfg),
                    ErrorCode::NonFiniteState);
}
