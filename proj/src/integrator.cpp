#include "capassign/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "capassign/error.hpp"

namespace capassign {
namespace {

// Dormand-Prince tableau.
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
// 5th minus embedded 4th order weights.
constexpr std::array<double, 7> E = {-71.0 / 57600, 0.0, 71.0 / 16695, -71.0 / 1920,
                                     17253.0 / 339200, -22.0 / 525, 1.0 / 40};
// Dense output: y(t + s h) = y + h * sum_i K_i * sum_p P[i][p] s^(p+1).
constexpr double P[7][4] = {
    {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608,
     -12715105075.0 / 11282082432},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933,
     87487479700.0 / 32700410799},
    {0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304,
     -10690763975.0 / 1880347072},
    {0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408,
     701980252875.0 / 199316789632},
    {0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883,
     -1453857185.0 / 822651844},
    {0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423}};

constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kMinFactor = 0.2;  // largest shrink is 1/5
constexpr double kMaxFactor = 10.0;

double rms_norm(const Vector& v, const Vector& scale) {
  if (v.size() == 0) return 0.0;
  return std::sqrt((v.array() / scale.array()).square().mean());
}

void check_finite(const Vector& y, double t) {
  if (!y.allFinite()) {
    std::ostringstream msg;
    msg << "state became non-finite at t = " << t;
    throw Error(ErrorCode::NonFiniteState, msg.str());
  }
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step > 0.0) || !(output_dt > 0.0)) {
    throw Error(ErrorCode::InvalidParameter,
                "integrator tolerances, max_step and output_dt must be positive");
  }
}

OdeResult integrate_ode(const OdeRhs& rhs, double t0, double t1, const Vector& y0,
                        const IntegratorConfig& config, const SampleObserver& observer) {
  config.validate();
  if (!(t1 > t0)) {
    throw Error(ErrorCode::InvalidParameter, "time span must be increasing");
  }
  check_finite(y0, t0);
  const Index n = y0.size();
  const double span = t1 - t0;
  const double dt = config.output_dt;
  const long grid_points = static_cast<long>(std::floor(span / dt + 1e-9));

  OdeResult result;
  OdeStats& stats = result.stats;
  auto eval = [&](double t, const Vector& y, Vector& out) {
    rhs(t, y, out);
    ++stats.rhs_evaluations;
  };

  // Sampling grid t0 + k dt, plus t1 when it falls off the grid.
  std::vector<double> samples;
  if (observer) {
    samples.reserve(static_cast<std::size_t>(grid_points) + 2);
    for (long k = 0; k <= grid_points; ++k) samples.push_back(t0 + k * dt);
    if (t1 - samples.back() > 1e-9 * dt) samples.push_back(t1);
  }
  std::size_t next_sample = 0;

  Vector y = y0;
  double t = t0;
  std::array<Vector, 7> K;
  for (auto& k : K) k.resize(n);
  eval(t, y, K[0]);
  if (!K[0].allFinite()) {
    std::ostringstream msg;
    msg << "derivative is non-finite at t = " << t;
    throw Error(ErrorCode::NonFiniteState, msg.str());
  }

  if (observer) {
    ++next_sample;
    if (!observer(t0, y)) {
      result.t_end = t0;
      result.y_end = y;
      result.stopped_by_observer = true;
      return result;
    }
  }

  // Initial step (Hairer's heuristic).
  Vector scale = config.abs_tol + config.rel_tol * y.array().abs();
  double h;
  {
    const double d0 = rms_norm(y, scale);
    const double d1 = rms_norm(K[0], scale);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vector y1 = y + h0 * K[0];
    Vector f1(n);
    eval(t + h0, y1, f1);
    const double d2 = rms_norm(f1 - K[0], scale) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15)
                          ? std::max(1e-6, h0 * 1e-3)
                          : std::pow(0.01 / std::max(d1, d2), 1.0 / 5);
    h = std::min({100 * h0, h1, config.max_step, span});
  }

  double err_old = 1e-4;
  bool last_rejected = false;
  Vector ytmp(n), ynew(n), err(n);

  while (t < t1) {
    const double min_step = 16.0 * std::numeric_limits<double>::epsilon() *
                            std::max(1.0, std::abs(t));
    if (!(h >= min_step)) {  // also catches NaN
      std::ostringstream msg;
      msg << "step size " << h << " underflowed at t = " << t;
      throw Error(ErrorCode::StepSizeUnderflow, msg.str());
    }
    bool final_step = false;
    if (t + h >= t1 || t1 - (t + h) < min_step) {
      h = t1 - t;
      final_step = true;
    }

    ytmp = y + h * (A21 * K[0]);
    eval(t + C2 * h, ytmp, K[1]);
    ytmp = y + h * (A31 * K[0] + A32 * K[1]);
    eval(t + C3 * h, ytmp, K[2]);
    ytmp = y + h * (A41 * K[0] + A42 * K[1] + A43 * K[2]);
    eval(t + C4 * h, ytmp, K[3]);
    ytmp = y + h * (A51 * K[0] + A52 * K[1] + A53 * K[2] + A54 * K[3]);
    eval(t + C5 * h, ytmp, K[4]);
    ytmp = y + h * (A61 * K[0] + A62 * K[1] + A63 * K[2] + A64 * K[3] + A65 * K[4]);
    eval(t + h, ytmp, K[5]);
    ynew = y + h * (B1 * K[0] + B3 * K[2] + B4 * K[3] + B5 * K[4] + B6 * K[5]);
    const double t_new = final_step ? t1 : t + h;
    eval(t_new, ynew, K[6]);

    err = E[0] * K[0];
    for (int i = 2; i < 7; ++i) err += E[i] * K[i];
    err *= h;
    scale = config.abs_tol +
            config.rel_tol * y.array().abs().max(ynew.array().abs());
    const double err_norm = rms_norm(err, scale);

    if (!std::isfinite(err_norm)) {
      h *= kMinFactor;
      last_rejected = true;
      ++stats.rejected_steps;
      continue;
    }

    const double fac11 = std::pow(err_norm, kExpo);
    if (err_norm <= 1.0) {
      ++stats.accepted_steps;
      check_finite(ynew, t_new);

      // Emit grid samples inside (t, t_new].
      if (observer) {
        while (next_sample < samples.size()) {
          const double ts = samples[next_sample];
          if (ts > t_new + 1e-12 * std::max(1.0, std::abs(t_new))) break;
          const double theta = std::clamp((ts - t) / h, 0.0, 1.0);
          Vector ys = theta >= 1.0 ? ynew : y;
          double tp = theta;
          std::array<double, 4> powers{};
          for (double& pw : powers) {
            pw = tp;
            tp *= theta;
          }
          for (int i = 0; i < 7 && theta < 1.0; ++i) {
            const double w = P[i][0] * powers[0] + P[i][1] * powers[1] +
                             P[i][2] * powers[2] + P[i][3] * powers[3];
            if (w != 0.0) ys += (h * w) * K[i];
          }
          ++next_sample;
          if (!observer(ts, ys)) {
            result.t_end = ts;
            result.y_end = std::move(ys);
            result.stopped_by_observer = true;
            return result;
          }
        }
      }

      double fac = fac11 / std::pow(err_old, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kMaxFactor, 1.0 / kMinFactor);
      double h_new = h / fac;
      if (last_rejected) h_new = std::min(h_new, h);
      err_old = std::max(err_norm, 1e-4);
      last_rejected = false;

      t = t_new;
      y.swap(ynew);
      K[0].swap(K[6]);
      h = std::min(h_new, config.max_step);
    } else {
      ++stats.rejected_steps;
      last_rejected = true;
      h /= std::min(1.0 / kMinFactor, fac11 / kSafety);
    }
  }

  result.t_end = t1;
  result.y_end = y;
  return result;
}

Trajectory integrate(const LinearSystem& system, const ControlLaw& control_law,
                     const Vector& x0, double t0, double t1,
                     const IntegratorConfig& config, const CostIntegrand& cost) {
  const Index d = system.state_dim();
  if (x0.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "initial state size");
  }
  const bool autonomous = system.is_autonomous() || !control_law;
  auto control_at = [&](double t, const Vector& x) -> Vector {
    if (autonomous) return Vector::Zero(system.input_dim());
    Vector u = control_law(t, x);
    if (u.size() != system.input_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "control law output size");
    }
    return u;
  };

  OdeRhs rhs = [&](double t, const Vector& z, Vector& dz) {
    const Vector x = z.head(d);
    const Vector u = control_at(t, x);
    dz.head(d) = system.drift() * x + system.offset();
    if (system.input_dim() > 0) dz.head(d).noalias() += system.input() * u;
    dz(d) = cost ? cost(t, x, u) : 0.0;
  };

  Vector z0(d + 1);
  z0 << x0, 0.0;
  Trajectory traj;
  SampleObserver observer = [&](double t, const Vector& z) {
    const Vector x = z.head(d);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(control_at(t, x));
    traj.cumulative_cost.push_back(z(d));
    return true;
  };
  const OdeResult res = integrate_ode(rhs, t0, t1, z0, config, observer);
  traj.total_cost = res.y_end(d);
  traj.stats = res.stats;
  return traj;
}

}  // namespace capassign
