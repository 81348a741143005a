#include "capassign/dynamics.hpp"

#include "capassign/error.hpp"

namespace capassign {

LinearSystem double_integrator_3d() {
  Matrix A = Matrix::Zero(6, 6);
  Matrix B = Matrix::Zero(6, 3);
  for (Index j = 0; j < 3; ++j) {
    A(j, j + 3) = 1.0;
    B(j + 3, j) = 1.0;
  }
  StateLayout layout({{"position", 0, 3, "m"}, {"velocity", 3, 3, "m/s"}}, "position");
  return LinearSystem(std::move(A), std::move(B), Vector::Zero(6), std::move(layout));
}

LinearSystem quadcopter_linearized(double mass, double ixx, double iyy, double izz,
                                   double gravity) {
  if (!(mass > 0.0) || !(ixx > 0.0) || !(iyy > 0.0) || !(izz > 0.0) || !(gravity > 0.0)) {
    throw Error(ErrorCode::InvalidParameter,
                "quadcopter mass, inertias and gravity must be positive");
  }
  // State indices.
  enum : Index { X, Y, Z, PSI, THETA, PHI, U, V, W, P, Q, R };
  Matrix A = Matrix::Zero(12, 12);
  A(X, U) = 1.0;
  A(Y, V) = 1.0;
  A(Z, W) = 1.0;
  A(PSI, R) = 1.0;
  A(THETA, Q) = 1.0;
  A(PHI, P) = 1.0;
  A(U, THETA) = -gravity;
  A(V, PHI) = gravity;

  // Inputs [f_t, tau_x, tau_y, tau_z].
  Matrix B = Matrix::Zero(12, 4);
  B(W, 0) = -1.0 / mass;
  B(P, 1) = 1.0 / ixx;
  B(Q, 2) = 1.0 / iyy;
  B(R, 3) = 1.0 / izz;

  StateLayout layout({{"position", 0, 3, "m"},
                      {"attitude", 3, 3, "rad"},
                      {"velocity", 6, 3, "m/s"},
                      {"rates", 9, 3, "rad/s"}},
                     "position");
  return LinearSystem(std::move(A), std::move(B), Vector::Zero(12), std::move(layout));
}

LinearSystem quadcopter_linearized(const QuadcopterParams& params) {
  return quadcopter_linearized(params.mass, params.ixx, params.iyy, params.izz,
                               params.gravity);
}

LinearSystem stationary_reference(const LinearSystem& like) {
  const Index d = like.state_dim();
  return LinearSystem::autonomous(Matrix::Zero(d, d), Vector::Zero(d), like.layout());
}

LinearSystem closed_loop_target(const LinearSystem& target_plant,
                                const TrackingPolicy& policy, const Vector& reference) {
  const Index d = target_plant.state_dim();
  if (policy.agent_dim() != d || policy.target_dim() != reference.size() ||
      policy.input_dim() != target_plant.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "policy was not built for this plant");
  }
  if (!policy.core().stationary_target()) {
    throw Error(ErrorCode::InvalidParameter,
                "closed-loop targets need a policy synthesized against a fixed reference");
  }
  if (policy.gain().isZero(0.0)) {
    throw Error(ErrorCode::InvalidParameter, "policy has zero feedback gain");
  }
  const Matrix Kx = policy.core().agent_gain();
  const Matrix Ky = policy.core().target_gain();
  const Matrix& B = target_plant.input();
  Matrix drift = target_plant.drift() - B * Kx;
  Vector offset = target_plant.offset() - B * (Ky * reference + policy.feedforward());
  return LinearSystem::autonomous(std::move(drift), std::move(offset), target_plant.layout());
}

LinearSystem closed_loop_target(const LinearSystem& target_plant,
                                const QuadraticCost& cost, const Vector& reference) {
  const TrackingPolicy policy =
      synthesize_tracker(target_plant, stationary_reference(target_plant), cost);
  return closed_loop_target(target_plant, policy, reference);
}

LinearSystem pair_system(const LinearSystem& agent, const LinearSystem& target) {
  const Index d = agent.state_dim();
  const Index dy = target.state_dim();
  Matrix drift = Matrix::Zero(d + dy, d + dy);
  drift.topLeftCorner(d, d) = agent.drift();
  drift.bottomRightCorner(dy, dy) = target.drift();
  Matrix input = Matrix::Zero(d + dy, agent.input_dim());
  input.topRows(d) = agent.input();
  Vector offset(d + dy);
  offset << agent.offset(), target.offset();
  return LinearSystem(std::move(drift), std::move(input), std::move(offset));
}

}  // namespace capassign
