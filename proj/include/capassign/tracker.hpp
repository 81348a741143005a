#pragma once

#include <memory>
#include <optional>

#include "capassign/linear_system.hpp"

namespace capassign {

/// Tracking error e = agent_select * x - target_select * y.
struct ErrorMap {
  Matrix agent_select;
  Matrix target_select;

  /// Identity when the state dimensions agree, position selectors otherwise.
  static ErrorMap between(const LinearSystem& agent, const LinearSystem& target);

  Index error_dim() const { return agent_select.rows(); }
  Vector apply(const Vector& agent_state, const Vector& target_state) const {
    return agent_select * agent_state - target_select * target_state;
  }
};

/// Fixed point of the closed-loop agent/target pair.
struct SteadyState {
  Vector agent;
  Vector target;
  Vector error;
  Vector control;
  /// e_ss' Q e_ss + u_ss' R u_ss, subtracted from the stage cost.
  double stage_cost = 0.0;
};

/// Offset-independent part of a tracker: Riccati blocks and feedback gains
/// for one (agent dynamics, target dynamics, weights) combination. Shared by
/// every policy whose systems differ only in their affine offsets.
class TrackerCore {
 public:
  const LinearSystem& agent() const { return agent_; }
  const Matrix& target_drift() const { return target_drift_; }
  const QuadraticCost& cost() const { return cost_; }
  const ErrorMap& error_map() const { return error_map_; }

  /// Joint Riccati solution blocks over z = [x; y].
  const Matrix& p_agent() const { return p11_; }
  const Matrix& p_cross() const { return p12_; }
  const Matrix& p_target() const { return p22_; }
  Matrix riccati_solution() const;

  /// [K_x K_y] with u = -K_x x - K_y y - feedforward.
  const Matrix& gain() const { return gain_; }
  Matrix agent_gain() const { return gain_.leftCols(agent_.state_dim()); }
  Matrix target_gain() const { return gain_.rightCols(target_drift_.rows()); }

  /// A - B K_x, Hurwitz by construction.
  const Matrix& closed_loop_drift() const { return closed_loop_; }

  /// True when the target never moves (zero drift); the target state is then
  /// a parameter and the steady state depends on it.
  bool stationary_target() const { return stationary_; }

  /// Relative CARE residual of the agent block.
  double care_residual() const { return care_residual_; }

  /// x' P_xx x.
  double agent_quadratic(const Vector& agent_state) const;

 private:
  friend std::shared_ptr<const TrackerCore> synthesize_tracker_core(
      const LinearSystem&, const LinearSystem&, const QuadraticCost&,
      const std::optional<ErrorMap>&);
  friend class TrackingPolicy;

  LinearSystem agent_;
  Matrix target_drift_;
  QuadraticCost cost_;
  ErrorMap error_map_;
  Matrix p11_, p12_, p22_;
  Matrix gain_;
  Matrix closed_loop_;
  Eigen::PartialPivLU<Matrix> closed_loop_lu_;
  Eigen::PartialPivLU<Matrix> target_lu_;
  bool stationary_ = false;
  double care_residual_ = 0.0;
};

/// Infinite-horizon linear-quadratic tracker for one agent following one
/// autonomous target. The value function is W(z) = z'Pz + 2p'z over the
/// joint state z = [x; y]; the optimal cost from (x, y) is W(z) - W(z_ss).
class TrackingPolicy {
 public:
  TrackingPolicy(std::shared_ptr<const TrackerCore> core, Vector agent_offset,
                 Vector target_offset);

  const TrackerCore& core() const { return *core_; }
  const std::shared_ptr<const TrackerCore>& shared_core() const { return core_; }

  const Matrix& gain() const { return core_->gain(); }
  const Vector& feedforward() const { return feedforward_; }
  Matrix riccati_solution() const { return core_->riccati_solution(); }
  /// Joint adjoint p = [p_x; p_y].
  Vector adjoint() const;
  const ErrorMap& error_map() const { return core_->error_map(); }

  Index agent_dim() const { return core_->agent().state_dim(); }
  Index target_dim() const { return core_->target_drift().rows(); }
  Index input_dim() const { return core_->agent().input_dim(); }

  SteadyState steady_state(const Vector& target_state) const;
  Vector steady_state_error(const Vector& target_state) const {
    return steady_state(target_state).error;
  }
  Vector steady_state_control(const Vector& target_state) const {
    return steady_state(target_state).control;
  }

  Vector control(const Vector& agent_state, const Vector& target_state) const;

  /// e'Qe + u'Ru minus the steady-state stage cost.
  double stage_cost(const Vector& agent_state, const Vector& target_state,
                    const Vector& control) const;

  double value(const Vector& agent_state, const Vector& target_state) const;

  /// Optimal tracking cost from the given initial states.
  double cost_to_go(const Vector& agent_state, const Vector& target_state) const;

  /// Target-dependent coefficients such that
  /// cost_to_go(x, y) = x'P_xx x + beta + 2 x.w.
  struct TargetTerms {
    Vector w;
    double beta = 0.0;
  };
  TargetTerms target_terms(const Vector& target_state) const;

 private:
  std::shared_ptr<const TrackerCore> core_;
  Vector agent_offset_;
  Vector target_offset_;
  Vector p_agent_;
  Vector p_target_;
  Vector feedforward_;
  std::optional<SteadyState> fixed_steady_state_;

  SteadyState compute_steady_state(const Vector& target_state) const;
};

/// Offset-independent synthesis; throws NotStabilizable, NotDetectable,
/// IllConditioned, SteadyStateUndefined, DimensionMismatch, InvalidParameter.
std::shared_ptr<const TrackerCore> synthesize_tracker_core(
    const LinearSystem& agent, const LinearSystem& target, const QuadraticCost& cost,
    const std::optional<ErrorMap>& error_map = std::nullopt);

TrackingPolicy synthesize_tracker(const LinearSystem& agent, const LinearSystem& target,
                                  const QuadraticCost& cost,
                                  const std::optional<ErrorMap>& error_map = std::nullopt);

double cost_to_go(const TrackingPolicy& policy, const Vector& agent_state,
                  const Vector& target_state);

}  // namespace capassign
