#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

#include "capassign/cli.hpp"
#include "capassign/dynamics.hpp"
#include "capassign/error.hpp"
#include "capassign/integrator.hpp"
#include "capassign/riccati.hpp"
#include "capassign/simd/kernels.hpp"
#include "capassign/tracker.hpp"
#include "capassign/transport.hpp"

namespace capassign::cli {
namespace {

using Check = std::function<OracleResult(bool corrupt)>;

std::string describe(const char* what, double value, double limit) {
  std::ostringstream os;
  os << what << " = " << value << " (limit " << limit << ")";
  return os.str();
}

Matrix random_matrix(SplitMix64& rng, Index rows, Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

// Closed form for the scalar CARE 2ap - b^2 p^2 / r + q = 0.
OracleResult care_scalar(bool corrupt) {
  const double a = 0.7, b = 1.3, q = 2.0, r = 0.5;
  double expected = (a * r + std::sqrt(a * a * r * r + b * b * q * r)) / (b * b);
  if (corrupt) expected *= 1.01;
  const Matrix P = solve_care(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b),
                              QuadraticCost(Matrix::Constant(1, 1, q), Matrix::Constant(1, 1, r)));
  const double err = std::abs(P(0, 0) - expected) / expected;
  return {"care_scalar", err < 1e-12, describe("relative error", err, 1e-12)};
}

// Planar double integrator with Q = I, R = 1: P = [[sqrt3, 1], [1, sqrt3]].
OracleResult care_double_integrator(bool corrupt) {
  Matrix A(2, 2), B(2, 1);
  A << 0, 1, 0, 0;
  B << 0, 1;
  Matrix expected(2, 2);
  expected << std::sqrt(3.0), 1, 1, std::sqrt(3.0);
  if (corrupt) expected(0, 1) += 1e-3;
  const Matrix P = solve_care(A, B, QuadraticCost(Matrix::Identity(2, 2), Matrix::Identity(1, 1)));
  const double err = (P - expected).norm() / expected.norm();
  return {"care_double_integrator", err < 1e-12, describe("relative error", err, 1e-12)};
}

OracleResult care_random(bool corrupt) {
  SplitMix64 rng(20240611);
  double worst = 0.0;
  bool hurwitz = true;
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 6, m = 2;
    const Matrix A = random_matrix(rng, n, n, -1.0, 1.0);
    const Matrix B = random_matrix(rng, n, m, -1.0, 1.0);
    const Matrix L = random_matrix(rng, n, n, -1.0, 1.0);
    const QuadraticCost cost(L * L.transpose() + Matrix::Identity(n, n),
                             Matrix::Identity(m, m));
    Matrix P = solve_care(A, B, cost);
    if (corrupt) P(0, 0) += 1e-4;
    worst = std::max(worst, care_relative_residual(A, B, cost, P));
    const Matrix closed = A - B * cost.control_weight().llt().solve(B.transpose() * P);
    hurwitz = hurwitz && closed.eigenvalues().real().maxCoeff() < 0.0;
  }
  const bool ok = worst < kCareTolerance && hurwitz;
  return {"care_random", ok,
          describe("worst relative residual", worst, kCareTolerance) +
              (hurwitz ? ", closed loop Hurwitz" : ", closed loop NOT Hurwitz")};
}

double brute_force_matching(const Matrix& c) {
  std::vector<Index> perm(static_cast<std::size_t>(c.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Index i = 0; i < c.rows(); ++i) total += c(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

OracleResult matching_brute_force(bool corrupt) {
  SplitMix64 rng(7);
  double worst = 0.0;
  int instances = 0;
  for (Index n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 6; ++trial, ++instances) {
      Matrix c = random_matrix(rng, n, n, 0.0, 10.0);
      if (trial % 3 == 2) c = c.array().round().matrix();  // ties
      const MatchingResult got = solve_matching(c);
      double expected = brute_force_matching(c);
      if (corrupt && n == 6) expected += 0.5;
      worst = std::max(worst, std::abs(got.total_cost - expected) / std::max(1.0, expected));
      if (!got.assignment.is_permutation()) worst = std::numeric_limits<double>::infinity();
    }
  }
  return {"matching_brute_force", worst < 1e-12,
          describe("worst relative gap", worst, 1e-12) + " over " + std::to_string(instances) +
              " instances"};
}

// Uniform marginals: the optimal plan is a scaled permutation matrix.
OracleResult kantorovich_permutation(bool corrupt) {
  SplitMix64 rng(11);
  double worst = 0.0;
  bool permutation = true;
  for (Index n : {2, 5, 9, 16}) {
    const Matrix c = random_matrix(rng, n, n, 0.0, 5.0);
    const Vector w = uniform_weights(n);
    const KantorovichResult k = solve_kantorovich(c, w, w);
    double expected = solve_matching(c).total_cost / static_cast<double>(n);
    if (corrupt) expected *= 1.01;
    worst = std::max(worst, std::abs(k.objective - expected) / std::max(1.0, expected));
    const Matrix scaled = k.coupling.matrix * static_cast<double>(n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        const double v = scaled(i, j);
        if (std::abs(v) > 1e-9 && std::abs(v - 1.0) > 1e-9) permutation = false;
      }
    }
  }
  return {"kantorovich_permutation", worst < 1e-10 && permutation,
          describe("worst relative gap", worst, 1e-10) +
              (permutation ? ", plans are permutations" : ", fractional plan found")};
}

struct PairCase {
  LinearSystem agent;
  LinearSystem target;
  QuadraticCost weights;
  Vector x0;
  Vector y0;
};

PairCase moving_pair() {
  const LinearSystem plant = double_integrator_3d();
  const QuadraticCost weights(Matrix::Identity(6, 6), Matrix::Identity(3, 3));
  Vector ref = Vector::Zero(6);
  ref.head(3) << 2.0, -1.0, 0.5;
  Vector x0(6), y0(6);
  x0 << -4.0, 3.0, 1.0, 0.5, 0.0, -0.2;
  y0 << 5.0, 2.0, -3.0, 0.0, 1.0, 0.0;
  return {plant, closed_loop_target(plant, weights, ref),
          weights, x0, y0};
}

// The tracker's closed-form cost must match the quadrature of the stage cost
// along the closed-loop pair trajectory.
OracleResult cost_consistency(bool corrupt) {
  const PairCase pc = moving_pair();
  const TrackingPolicy policy = synthesize_tracker(pc.agent, pc.target, pc.weights);
  const LinearSystem pair = pair_system(pc.agent, pc.target);
  const Index da = pc.agent.state_dim();
  const Index dt = pc.target.state_dim();
  Vector z0(da + dt);
  z0 << pc.x0, pc.y0;
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.max_step = 0.05;
  cfg.output_dt = 0.5;
  const Trajectory traj = integrate(
      pair,
      [&](double, const Vector& z) { return policy.control(z.head(da), z.tail(dt)); },
      z0, 0.0, 40.0, cfg,
      [&](double, const Vector& z, const Vector& u) {
        return policy.stage_cost(z.head(da), z.tail(dt), u);
      });
  double predicted = policy.cost_to_go(pc.x0, pc.y0);
  if (corrupt) predicted *= 1.01;
  const double err = std::abs(traj.total_cost - predicted) / std::abs(predicted);
  return {"cost_consistency", err < 1e-6, describe("relative error", err, 1e-6)};
}

// At the steady state the closed-loop pair is at rest and the shifted stage
// cost vanishes.
OracleResult stationarity(bool corrupt) {
  const PairCase pc = moving_pair();
  const TrackingPolicy policy = synthesize_tracker(pc.agent, pc.target, pc.weights);
  SteadyState ss = policy.steady_state(pc.y0);
  if (corrupt) ss.agent(0) += 1e-3;
  const Vector u = policy.control(ss.agent, ss.target);
  const Vector none = Vector::Zero(0);
  const double agent_rate = pc.agent.derivative(ss.agent, u).norm();
  const double target_rate = pc.target.derivative(ss.target, none).norm();
  const double stage = std::abs(policy.stage_cost(ss.agent, ss.target, u));
  const double worst = std::max({agent_rate, target_rate, stage});
  return {"stationarity", worst < 1e-9,
          describe("max(|dx|, |dy|, |stage cost|)", worst, 1e-9)};
}

OracleResult simd_equivalence(bool corrupt) {
  using simd::Level;
  if (!simd::supported(Level::Avx2)) {
    return {"simd_equivalence", true, "avx2 unavailable on this host, scalar only"};
  }
  SplitMix64 rng(3);
  std::size_t mismatches = 0, compared = 0;
  auto same = [&](double a, double b) {
    ++compared;
    if (std::memcmp(&a, &b, sizeof(double)) != 0) ++mismatches;
  };
  for (std::size_t n : {1u, 3u, 4u, 7u, 13u}) {
    for (std::size_t m : {1u, 2u, 5u, 8u, 17u}) {
      const std::size_t dim = 3;
      std::vector<double> a(n * dim), b(dim * m), row(n), col(m);
      for (double& v : a) v = rng.uniform(-10, 10);
      for (double& v : b) v = rng.uniform(-10, 10);
      for (double& v : row) v = rng.uniform(0, 50);
      for (double& v : col) v = rng.uniform(0, 50);
      for (double exponent : {1.0, 2.0, 1.5}) {
        std::vector<double> s(n * m), v(n * m);
        simd::pairwise_distance(Level::Scalar, a, n, b, m, dim, exponent, s);
        simd::pairwise_distance(Level::Avx2, a, n, b, m, dim, exponent, v);
        for (std::size_t k = 0; k < s.size(); ++k) same(s[k], v[k]);
      }
      std::vector<double> s(n * m), v(n * m);
      simd::bilinear_cost(Level::Scalar, a, row, n, b, col, m, dim, s);
      simd::bilinear_cost(Level::Avx2, a, row, n, b, col, m, dim, v);
      if (corrupt && n == 13 && m == 17) v[5] += 1e-12;
      for (std::size_t k = 0; k < s.size(); ++k) same(s[k], v[k]);

      std::vector<std::uint8_t> used(m);
      for (auto& u : used) u = rng.below(4) == 0 ? 1 : 0;
      std::vector<double> slack_s(m), slack_v;
      for (double& x : slack_s) x = rng.uniform(0, 20);
      slack_v = slack_s;
      std::vector<std::int32_t> pred_s(m, -1), pred_v(m, -1);
      const std::vector<double> cost_row(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(m));
      const auto rs = simd::relax_row(Level::Scalar, cost_row, 1.5, col, used, slack_s, pred_s, 4);
      const auto rv = simd::relax_row(Level::Avx2, cost_row, 1.5, col, used, slack_v, pred_v, 4);
      same(rs.delta, rv.delta);
      if (rs.column != rv.column || pred_s != pred_v) ++mismatches;
      for (std::size_t k = 0; k < m; ++k) same(slack_s[k], slack_v[k]);
    }
  }
  return {"simd_equivalence", mismatches == 0,
          std::to_string(mismatches) + " bitwise mismatches in " + std::to_string(compared) +
              " values (avx2 vs scalar)"};
}

const std::vector<std::pair<std::string, Check>>& registry() {
  static const std::vector<std::pair<std::string, Check>> checks = {
      {"care_scalar", care_scalar},
      {"care_double_integrator", care_double_integrator},
      {"care_random", care_random},
      {"matching_brute_force", matching_brute_force},
      {"kantorovich_permutation", kantorovich_permutation},
      {"cost_consistency", cost_consistency},
      {"stationarity", stationarity},
      {"simd_equivalence", simd_equivalence},
  };
  return checks;
}

}  // namespace

std::vector<OracleResult> run_oracles(const std::string& fault) {
  const auto& checks = registry();
  if (!fault.empty() &&
      std::none_of(checks.begin(), checks.end(), [&](const auto& c) { return c.first == fault; })) {
    throw ConfigError("field 'inject-fault': unknown oracle '" + fault + "'");
  }
  std::vector<OracleResult> results;
  for (const auto& [name, check] : checks) {
    try {
      results.push_back(check(name == fault));
    } catch (const std::exception& e) {
      results.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }
  return results;
}

}  // namespace capassign::cli
