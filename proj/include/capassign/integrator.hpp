#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "capassign/linear_system.hpp"

namespace capassign {

struct IntegratorConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  double max_step = 0.1;   // s
  double output_dt = 0.01; // s, sampling grid for observers and traces

  /// Throws InvalidParameter unless every field is strictly positive.
  void validate() const;
};

struct OdeStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
};

/// dy/dt = f(t, y); `dydt` is pre-sized.
using OdeRhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

/// Called at t0 and at each output grid point t0 + k * output_dt (and at t1
/// when it is off-grid). Returning false stops the integration there.
using SampleObserver = std::function<bool(double t, const Vector& y)>;

struct OdeResult {
  double t_end = 0.0;
  Vector y_end;
  bool stopped_by_observer = false;
  OdeStats stats;
};

/// Dormand-Prince 5(4) with PI step-size control and the standard 4th-order
/// dense output, used to report states on the sampling grid.
///
/// Throws StepSizeUnderflow or NonFiniteState.
OdeResult integrate_ode(const OdeRhs& rhs, double t0, double t1, const Vector& y0,
                        const IntegratorConfig& config,
                        const SampleObserver& observer = {});

using ControlLaw = std::function<Vector(double t, const Vector& state)>;
using CostIntegrand =
    std::function<double(double t, const Vector& state, const Vector& control)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<double> cumulative_cost;
  double total_cost = 0.0;
  OdeStats stats;
};

/// Integrates a controlled linear system. When `cost` is given the running
/// cost is carried as an extra state so its quadrature obeys the same error
/// control as the trajectory.
Trajectory integrate(const LinearSystem& system, const ControlLaw& control_law,
                     const Vector& x0, double t0, double t1,
                     const IntegratorConfig& config, const CostIntegrand& cost = {});

}  // namespace capassign
