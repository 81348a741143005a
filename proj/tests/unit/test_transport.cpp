#include <algorithm>
#include <numeric>

#include "capassign/dynamics.hpp"
#include "capassign/transport.hpp"
#include "test_util.hpp"

using namespace capassign;
using capassign::testing::random_matrix;
using capassign::testing::random_vector;

namespace {

double brute_force(const Matrix& c) {
  std::vector<Index> p(static_cast<std::size_t>(c.rows()));
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (Index i = 0; i < c.rows(); ++i) s += c(i, p[static_cast<std::size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

}  // namespace

TEST(Matching, EqualsBruteForce) {
  SplitMix64 rng(123);
  for (Index n = 1; n <= 6; ++n) {
    for (int k = 0; k < 30; ++k) {
      const Matrix c = random_matrix(rng, n, n, -50, 50);
      const MatchingResult r = solve_matching(c);
      EXPECT_TRUE(r.assignment.is_permutation());
      EXPECT_DOUBLE_EQ(r.total_cost, brute_force(c));
      EXPECT_DOUBLE_EQ(r.assignment.cost(c), r.total_cost);
    }
  }
}

TEST(Matching, LexicographicTieBreak) {
  const Matrix c = Matrix::Ones(4, 4);
  const MatchingResult r = solve_matching(c);
  EXPECT_EQ(r.assignment.sigma, (std::vector<Index>{0, 1, 2, 3}));

  Matrix d(2, 2);
  d << 1, 1, 1, 1;
  d(0, 0) = 2;  // forces 0->1, 1->0
  EXPECT_EQ(solve_matching(d).assignment.sigma, (std::vector<Index>{1, 0}));
}

TEST(Matching, ScalarAndVectorLevelsAgree) {
  if (!simd::supported(simd::Level::Avx2)) GTEST_SKIP();
  SplitMix64 rng(5);
  for (Index n : {3, 17, 64}) {
    const Matrix c = random_matrix(rng, n, n, 0, 100).array().round().matrix();
    const auto s = solve_matching(c, simd::Level::Scalar);
    const auto v = solve_matching(c, simd::Level::Avx2);
    EXPECT_EQ(s.assignment.sigma, v.assignment.sigma);
    EXPECT_EQ(s.total_cost, v.total_cost);
  }
}

TEST(Matching, RejectsNonSquareAndNonFinite) {
  EXPECT_ERROR_CODE(solve_matching(Matrix::Ones(2, 3)), ErrorCode::NonSquare);
  Matrix c = Matrix::Ones(2, 2);
  c(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_ERROR_CODE(solve_matching(c), ErrorCode::InvalidParameter);
}

TEST(Kantorovich, UniformSquareGivesScaledPermutation) {
  SplitMix64 rng(8);
  for (Index n : {1, 2, 4, 7, 12}) {
    const Matrix c = random_matrix(rng, n, n, 0, 10);
    const Vector w = uniform_weights(n);
    const KantorovichResult k = solve_kantorovich(c, w, w);
    EXPECT_LT(k.coupling.marginal_error(), 1e-12);
    const Assignment a = assignment_from_coupling(k.coupling);
    EXPECT_TRUE(a.is_permutation());
    EXPECT_NEAR(a.cost(c), solve_matching(c).total_cost, 1e-9);
    EXPECT_NEAR(k.objective * n, a.cost(c), 1e-9);
  }
}

TEST(Kantorovich, RectangularMarginals) {
  Matrix c(2, 3);
  c << 1, 2, 3,
       4, 1, 2;
  Vector a(2), b(3);
  a << 0.5, 0.5;
  b << 0.2, 0.3, 0.5;
  const KantorovichResult k = solve_kantorovich(c, a, b);
  EXPECT_LT(k.coupling.marginal_error(), 1e-12);
  EXPECT_GE(k.coupling.matrix.minCoeff(), -1e-15);
  // Row 0 takes column 0 then 1; row 1 takes column 1 then 2.
  EXPECT_NEAR(k.objective, 0.2 * 1 + 0.3 * 2 + 0.5 * 2, 1e-12);
}

TEST(Kantorovich, MatchesBruteForceOnSmallLp) {
  // Totally unimodular with integral marginals: vertices are integral.
  SplitMix64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 4;
    const Matrix c = random_matrix(rng, n, n, 0, 1);
    const Vector w = Vector::Ones(n) / n;
    EXPECT_NEAR(solve_kantorovich(c, w, w).objective * n, brute_force(c), 1e-10);
  }
}

TEST(Kantorovich, RejectsBadMarginals) {
  const Matrix c = Matrix::Ones(2, 2);
  Vector a(2), b(2);
  a << 0.7, 0.7;
  b << 0.5, 0.5;
  EXPECT_ERROR_CODE(solve_kantorovich(c, a, b), ErrorCode::Infeasible);
  EXPECT_ERROR_CODE(solve_kantorovich(c, Vector::Ones(3) / 3, b), ErrorCode::DimensionMismatch);
}

TEST(Measure, UniformWeightsSumToOne) {
  const Vector w = uniform_weights(7);
  EXPECT_NEAR(w.sum(), 1.0, 1e-15);
  std::vector<Vector> pts(3, Vector::Zero(2));
  EXPECT_NO_THROW(DiscreteMeasure::uniform(pts).validate());
}

TEST(EuclideanCost, UsesPositionSlicesAndExponent) {
  const LinearSystem sys = double_integrator_3d();
  Vector a = Vector::Zero(6), b = Vector::Zero(6);
  a.head(3) << 3, 0, 0;
  a.tail(3) << 100, 100, 100;  // velocities ignored
  b.head(3) << 0, 4, 0;
  const CostMatrix c1 = euclidean_cost({a}, sys.layout(), {b}, sys.layout(), 1.0);
  EXPECT_NEAR(c1.entries(0, 0), 5.0, 1e-12);
  const CostMatrix c2 = euclidean_cost({a}, sys.layout(), {b}, sys.layout(), 2.0);
  EXPECT_NEAR(c2.entries(0, 0), 25.0, 1e-12);
  EXPECT_ERROR_CODE(euclidean_cost({a}, sys.layout(), {b}, sys.layout(), 0.5),
                    ErrorCode::InvalidParameter);
}

TEST(DynamicsCost, MatchesPerPairTrackerAndSharesCores) {
  const LinearSystem plant = double_integrator_3d();
  Vector q(6);
  q << 1e3, 1e3, 1e3, 0, 0, 0;
  const QuadraticCost weights(q.asDiagonal(), Matrix::Identity(3, 3));
  SplitMix64 rng(4);
  std::vector<Vector> xs, ys;
  std::vector<LinearSystem> agents, targets;
  for (int k = 0; k < 4; ++k) {
    xs.push_back(random_vector(rng, 6, -100, 100));
    ys.push_back(random_vector(rng, 6, -100, 100));
    agents.push_back(plant);
    Vector ref = Vector::Zero(6);
    ref.head(3) = random_vector(rng, 3, -100, 100);
    targets.push_back(closed_loop_target(plant, weights, ref));
  }
  TrackerCache cache;
  const DynamicsCost dc = dynamics_cost(xs, agents, ys, targets, weights, cache);
  EXPECT_EQ(cache.synthesis_count(), 1);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j) {
      const TrackingPolicy p = synthesize_tracker(agents[i], targets[j], weights);
      const double direct = p.cost_to_go(xs[i], ys[j]);
      EXPECT_NEAR(dc.cost.entries(i, j), direct, 1e-9 * std::abs(direct));
      EXPECT_FALSE(dc.cost.is_sentinel(i, j));
    }
  }
}

TEST(DynamicsCost, SentinelModePoisonsOnlyFailingPairs) {
  const LinearSystem plant = double_integrator_3d();
  Vector q(6);
  q << 1, 1, 1, 0, 0, 0;
  const QuadraticCost weights(q.asDiagonal(), Matrix::Identity(3, 3));
  // A target drifting away at constant velocity has no finite tracking cost.
  Matrix drift = Matrix::Zero(6, 6);
  drift.topRightCorner(3, 3).setIdentity();
  const LinearSystem runaway = LinearSystem::autonomous(drift, Vector::Zero(6), plant.layout());
  Vector ref = Vector::Zero(6);
  const LinearSystem settled = closed_loop_target(plant, weights, ref);
  const std::vector<Vector> xs(2, Vector::Zero(6)), ys(2, Vector::Ones(6));
  TrackerCache cache;
  const DynamicsCost dc = dynamics_cost(xs, {plant, plant}, ys, {settled, runaway}, weights,
                                        cache, FailureMode::Sentinel);
  EXPECT_FALSE(dc.cost.is_sentinel(0, 0));
  EXPECT_TRUE(dc.cost.is_sentinel(0, 1));
  EXPECT_EQ(dc.cost.entries(1, 1), kSentinelCost);
  EXPECT_FALSE(dc.cost.failures.empty());
  try {
    dynamics_cost(xs, {plant, plant}, ys, {settled, runaway}, weights, cache, FailureMode::Throw);
    ADD_FAILURE() << "expected throw";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("target 1"), std::string::npos) << e.what();
  }
}
