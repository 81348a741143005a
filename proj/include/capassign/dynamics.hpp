#pragma once

#include "capassign/linear_system.hpp"
#include "capassign/tracker.hpp"

namespace capassign {

/// Three decoupled double integrators: state (position, velocity), input
/// acceleration. d = 6, d_u = 3.
LinearSystem double_integrator_3d();

struct QuadcopterParams {
  double mass = 0.1;          // kg
  double ixx = 0.00062;       // kg m^2
  double iyy = 0.00113;       // kg m^2
  double izz = 0.9 * (0.00062 + 0.00113);
  double gravity = 9.81;      // m/s^2
};

/// Hover linearization of a quadcopter with wind disturbances removed.
/// State [x y z psi theta phi u v w p q r], input [f_t tau_x tau_y tau_z].
LinearSystem quadcopter_linearized(const QuadcopterParams& params = {});
LinearSystem quadcopter_linearized(double mass, double ixx, double iyy, double izz,
                                   double gravity);

/// A target that never moves: zero drift, zero offset, same layout as `like`.
LinearSystem stationary_reference(const LinearSystem& like);

/// Closes the loop on `target_plant` with a tracker synthesized against a
/// stationary reference. The result is autonomous:
///   y' = (A - B K_x) y + offset - B (K_y reference + feedforward).
LinearSystem closed_loop_target(const LinearSystem& target_plant,
                                const TrackingPolicy& policy, const Vector& reference);

/// Synthesizes the reference tracker and closes the loop in one call.
LinearSystem closed_loop_target(const LinearSystem& target_plant,
                                const QuadraticCost& cost, const Vector& reference);

/// Agent and target stacked into one system over z = [x; y]; the input
/// drives the agent only.
LinearSystem pair_system(const LinearSystem& agent, const LinearSystem& target);

}  // namespace capassign
