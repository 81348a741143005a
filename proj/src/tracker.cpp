#include "capassign/tracker.hpp"

#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "capassign/error.hpp"
#include "capassign/riccati.hpp"

namespace capassign {
namespace {

double max_real_eigenvalue(const Matrix& M) {
  if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace

ErrorMap ErrorMap::between(const LinearSystem& agent, const LinearSystem& target) {
  const Index d = agent.state_dim();
  const Index dy = target.state_dim();
  if (d == dy) {
    return ErrorMap{Matrix::Identity(d, d), Matrix::Identity(dy, dy)};
  }
  const auto& pa = agent.layout().position();
  const auto& pt = target.layout().position();
  if (pa.size != pt.size) {
    throw Error(ErrorCode::DimensionMismatch,
                "agent and target position slices differ in size");
  }
  ErrorMap map{Matrix::Zero(pa.size, d), Matrix::Zero(pa.size, dy)};
  for (Index k = 0; k < pa.size; ++k) {
    map.agent_select(k, pa.begin + k) = 1.0;
    map.target_select(k, pt.begin + k) = 1.0;
  }
  return map;
}

Matrix TrackerCore::riccati_solution() const {
  const Index d = p11_.rows();
  const Index dy = p22_.rows();
  Matrix P(d + dy, d + dy);
  P.topLeftCorner(d, d) = p11_;
  P.topRightCorner(d, dy) = p12_;
  P.bottomLeftCorner(dy, d) = p12_.transpose();
  P.bottomRightCorner(dy, dy) = p22_;
  return P;
}

double TrackerCore::agent_quadratic(const Vector& agent_state) const {
  return agent_state.dot(p11_ * agent_state);
}

std::shared_ptr<const TrackerCore> synthesize_tracker_core(
    const LinearSystem& agent, const LinearSystem& target, const QuadraticCost& cost,
    const std::optional<ErrorMap>& error_map) {
  if (!target.is_autonomous()) {
    throw Error(ErrorCode::InvalidParameter,
                "target must be autonomous (closed loop, input_dim = 0)");
  }
  if (agent.input_dim() == 0) {
    throw Error(ErrorCode::InvalidParameter, "agent has no control input");
  }
  ErrorMap map = error_map ? *error_map : ErrorMap::between(agent, target);
  const Index d = agent.state_dim();
  const Index dy = target.state_dim();
  if (map.agent_select.cols() != d || map.target_select.cols() != dy ||
      map.target_select.rows() != map.agent_select.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "error map does not fit the systems");
  }
  const Matrix& Q = cost.state_weight();
  const Matrix& R = cost.control_weight();
  if (Q.rows() != map.error_dim() || R.rows() != agent.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "weights must match the error and control dimensions");
  }

  auto core = std::make_shared<TrackerCore>();
  core->agent_ = agent;
  core->target_drift_ = target.drift();
  core->cost_ = cost;
  core->error_map_ = map;

  const Matrix& A = agent.drift();
  const Matrix& B = agent.input();
  const Matrix& At = target.drift();
  const Matrix Qxx = map.agent_select.transpose() * Q * map.agent_select;
  const Matrix Qxy = -map.agent_select.transpose() * Q * map.target_select;
  const Matrix Qyy = map.target_select.transpose() * Q * map.target_select;

  const QuadraticCost agent_cost(0.5 * (Qxx + Qxx.transpose()), R);
  core->p11_ = solve_care(A, B, agent_cost);
  core->care_residual_ = care_relative_residual(A, B, agent_cost, core->p11_);

  const Eigen::LLT<Matrix> r_llt(R);
  const Matrix Kx = r_llt.solve(B.transpose() * core->p11_);
  core->closed_loop_ = A - B * Kx;
  if (!(max_real_eigenvalue(core->closed_loop_) < 0.0)) {
    throw Error(ErrorCode::NotStabilizable, "tracking feedback does not stabilize the agent");
  }

  core->stationary_ = At.isZero(0.0);
  if (!core->stationary_) {
    const double tol = 1e-9 * std::max(1.0, At.norm());
    if (!(max_real_eigenvalue(At) < -tol)) {
      throw Error(ErrorCode::SteadyStateUndefined,
                  "target drift has a non-decaying mode and is not stationary");
    }
  }

  // Cross block: Acl' P12 + P12 At + Qxy = 0.
  core->p12_ = solve_sylvester(core->closed_loop_.transpose(), At, -Qxy);
  const Matrix Ky = r_llt.solve(B.transpose() * core->p12_);
  if (core->stationary_) {
    // Target-only block does not enter the optimal control or the cost
    // difference; this choice keeps the joint solution PSD.
    core->p22_ = core->p12_.transpose() *
                 core->p11_.completeOrthogonalDecomposition().solve(core->p12_);
  } else {
    const Matrix S = B * r_llt.solve(B.transpose());
    core->p22_ = solve_lyapunov(At, Qyy - core->p12_.transpose() * S * core->p12_);
    core->target_lu_.compute(At);
  }
  core->p22_ = 0.5 * (core->p22_ + core->p22_.transpose());

  core->gain_.resize(B.cols(), d + dy);
  core->gain_ << Kx, Ky;
  core->closed_loop_lu_.compute(core->closed_loop_);
  return core;
}

TrackingPolicy::TrackingPolicy(std::shared_ptr<const TrackerCore> core,
                               Vector agent_offset, Vector target_offset)
    : core_(std::move(core)),
      agent_offset_(std::move(agent_offset)),
      target_offset_(std::move(target_offset)) {
  const TrackerCore& c = *core_;
  const Index d = agent_dim();
  const Index dy = target_dim();
  if (agent_offset_.size() != d || target_offset_.size() != dy) {
    throw Error(ErrorCode::DimensionMismatch, "offset sizes do not match tracker");
  }
  if (c.stationary_ && !target_offset_.isZero(0.0)) {
    throw Error(ErrorCode::SteadyStateUndefined,
                "target with zero drift and non-zero offset never settles");
  }
  const Matrix& B = c.agent_.input();
  // Acl' p_x + P11 a + P12 c = 0.
  const Matrix acl_t = c.closed_loop_.transpose();
  p_agent_ = -acl_t.partialPivLu().solve(c.p11_ * agent_offset_ + c.p12_ * target_offset_);
  if (c.stationary_) {
    p_target_ = Vector::Zero(dy);
  } else {
    // At' p_y + P12' a + P22 c - Ky' B' p_x = 0.
    const Matrix Ky = c.target_gain();
    const Vector rhs = c.p12_.transpose() * agent_offset_ + c.p22_ * target_offset_ -
                       Ky.transpose() * (B.transpose() * p_agent_);
    p_target_ = -c.target_drift_.transpose().partialPivLu().solve(rhs);
  }
  feedforward_ = c.cost_.control_weight().llt().solve(B.transpose() * p_agent_);
  if (!p_agent_.allFinite() || !p_target_.allFinite() || !feedforward_.allFinite()) {
    throw Error(ErrorCode::SteadyStateUndefined, "adjoint equation is singular");
  }
  if (!c.stationary_) {
    fixed_steady_state_ = compute_steady_state(Vector::Zero(dy));
  }
}

Vector TrackingPolicy::adjoint() const {
  Vector p(p_agent_.size() + p_target_.size());
  p << p_agent_, p_target_;
  return p;
}

SteadyState TrackingPolicy::compute_steady_state(const Vector& target_state) const {
  const TrackerCore& c = *core_;
  SteadyState ss;
  if (c.stationary_) {
    ss.target = target_state;
  } else {
    ss.target = c.target_lu_.solve(-target_offset_);
  }
  const Matrix& B = c.agent_.input();
  const Matrix Ky = c.target_gain();
  ss.agent = c.closed_loop_lu_.solve(B * (Ky * ss.target + feedforward_) - agent_offset_);
  ss.control = -c.agent_gain() * ss.agent - Ky * ss.target - feedforward_;
  ss.error = c.error_map_.apply(ss.agent, ss.target);
  ss.stage_cost = ss.error.dot(c.cost_.state_weight() * ss.error) +
                  ss.control.dot(c.cost_.control_weight() * ss.control);
  if (!ss.agent.allFinite() || !ss.target.allFinite()) {
    throw Error(ErrorCode::SteadyStateUndefined, "closed-loop fixed point is singular");
  }
  return ss;
}

SteadyState TrackingPolicy::steady_state(const Vector& target_state) const {
  if (fixed_steady_state_) return *fixed_steady_state_;
  if (target_state.size() != target_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "target state size");
  }
  return compute_steady_state(target_state);
}

Vector TrackingPolicy::control(const Vector& agent_state, const Vector& target_state) const {
  const TrackerCore& c = *core_;
  const Index d = agent_dim();
  const Index dy = target_dim();
  return -c.gain_.leftCols(d) * agent_state - c.gain_.rightCols(dy) * target_state -
         feedforward_;
}

double TrackingPolicy::stage_cost(const Vector& agent_state, const Vector& target_state,
                                  const Vector& u) const {
  const TrackerCore& c = *core_;
  const Vector e = c.error_map_.apply(agent_state, target_state);
  const double ss = fixed_steady_state_ ? fixed_steady_state_->stage_cost
                                        : compute_steady_state(target_state).stage_cost;
  return e.dot(c.cost_.state_weight() * e) + u.dot(c.cost_.control_weight() * u) - ss;
}

double TrackingPolicy::value(const Vector& x, const Vector& y) const {
  const TrackerCore& c = *core_;
  return x.dot(c.p11_ * x) + 2.0 * x.dot(c.p12_ * y) + y.dot(c.p22_ * y) +
         2.0 * p_agent_.dot(x) + 2.0 * p_target_.dot(y);
}

double TrackingPolicy::cost_to_go(const Vector& agent_state,
                                  const Vector& target_state) const {
  if (agent_state.size() != agent_dim() || target_state.size() != target_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "state sizes do not match tracker");
  }
  const SteadyState ss = steady_state(target_state);
  return value(agent_state, target_state) - value(ss.agent, ss.target);
}

TrackingPolicy::TargetTerms TrackingPolicy::target_terms(const Vector& y) const {
  const TrackerCore& c = *core_;
  const SteadyState ss = steady_state(y);
  TargetTerms t;
  t.w = c.p12_ * y + p_agent_;
  t.beta = y.dot(c.p22_ * y) + 2.0 * p_target_.dot(y) - value(ss.agent, ss.target);
  return t;
}

TrackingPolicy synthesize_tracker(const LinearSystem& agent, const LinearSystem& target,
                                  const QuadraticCost& cost,
                                  const std::optional<ErrorMap>& error_map) {
  return TrackingPolicy(synthesize_tracker_core(agent, target, cost, error_map),
                        agent.offset(), target.offset());
}

double cost_to_go(const TrackingPolicy& policy, const Vector& agent_state,
                  const Vector& target_state) {
  return policy.cost_to_go(agent_state, target_state);
}

}  // namespace capassign
