#include "capassign/linear_system.hpp"

#include <algorithm>

#include "capassign/error.hpp"

namespace capassign {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotStabilizable: return "NotStabilizable";
    case ErrorCode::NotDetectable: return "NotDetectable";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::SteadyStateUndefined: return "SteadyStateUndefined";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NoConvergence: return "NoConvergence";
  }
  return "Unknown";
}

StateLayout::StateLayout(std::vector<StateSlice> slices,
                         std::string position_slice)
    : slices_(std::move(slices)), position_name_(std::move(position_slice)) {
  // Slices must tile [0, d) in order.
  Index next = 0;
  for (const auto& s : slices_) {
    if (s.begin != next || s.size <= 0) {
      throw Error(ErrorCode::InvalidParameter,
                  "state layout slices must partition [0, d) in order; slice '" +
                      s.name + "' breaks the partition");
    }
    next += s.size;
  }
  (void)slice(position_name_);
}

StateLayout StateLayout::flat(Index dim) {
  return StateLayout({StateSlice{"state", 0, dim, ""}}, "state");
}

const StateSlice& StateLayout::slice(const std::string& name) const {
  auto it = std::find_if(slices_.begin(), slices_.end(),
                         [&](const StateSlice& s) { return s.name == name; });
  if (it == slices_.end()) {
    throw Error(ErrorCode::InvalidParameter, "no state slice named '" + name + "'");
  }
  return *it;
}

Index StateLayout::dim() const {
  return slices_.empty() ? 0 : slices_.back().begin + slices_.back().size;
}

Vector StateLayout::position_of(const Vector& state) const {
  const auto& p = position();
  if (state.size() != dim()) {
    throw Error(ErrorCode::DimensionMismatch, "state does not match layout");
  }
  return state.segment(p.begin, p.size);
}

LinearSystem::LinearSystem(Matrix drift, Matrix input, Vector offset,
                           StateLayout layout)
    : drift_(std::move(drift)),
      input_(std::move(input)),
      offset_(std::move(offset)),
      layout_(std::move(layout)) {
  const Index d = drift_.rows();
  if (d <= 0 || drift_.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "drift must be square and non-empty");
  }
  if (input_.cols() == 0) {
    input_.resize(d, 0);
  }
  if (input_.rows() != d) {
    throw Error(ErrorCode::DimensionMismatch, "input must have as many rows as drift");
  }
  if (offset_.size() == 0) {
    offset_ = Vector::Zero(d);
  }
  if (offset_.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "offset must have d entries");
  }
  if (layout_.slices().empty()) {
    layout_ = StateLayout::flat(d);
  }
  if (layout_.dim() != d) {
    throw Error(ErrorCode::DimensionMismatch, "layout does not cover the state");
  }
  if (!drift_.allFinite() || !input_.allFinite() || !offset_.allFinite()) {
    throw Error(ErrorCode::InvalidParameter, "system matrices must be finite");
  }
}

LinearSystem LinearSystem::autonomous(Matrix drift, Vector offset,
                                      StateLayout layout) {
  const Index d = drift.rows();
  return LinearSystem(std::move(drift), Matrix(d, 0), std::move(offset),
                      std::move(layout));
}

Vector LinearSystem::derivative(const Vector& state, const Vector& control) const {
  if (state.size() != state_dim() || control.size() != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "state/control size");
  }
  Vector dx = drift_ * state + offset_;
  if (input_dim() > 0) dx.noalias() += input_ * control;
  return dx;
}

bool LinearSystem::same_dynamics(const LinearSystem& other) const {
  return drift_.rows() == other.drift_.rows() &&
         input_.cols() == other.input_.cols() && drift_ == other.drift_ &&
         input_ == other.input_ && offset_ == other.offset_;
}

QuadraticCost::QuadraticCost(Matrix state_weight, Matrix control_weight)
    : state_weight_(std::move(state_weight)),
      control_weight_(std::move(control_weight)) {
  const auto& Q = state_weight_;
  const auto& R = control_weight_;
  if (Q.rows() != Q.cols() || R.rows() != R.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "cost weights must be square");
  }
  const double qscale = std::max(1.0, Q.norm());
  if ((Q - Q.transpose()).norm() > kSymmetryTolerance * qscale) {
    throw Error(ErrorCode::InvalidParameter, "state weight must be symmetric");
  }
  if (Q.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eq(Q, Eigen::EigenvaluesOnly);
    if (eq.eigenvalues().minCoeff() < -kSymmetryTolerance * qscale) {
      throw Error(ErrorCode::InvalidParameter, "state weight must be positive semidefinite");
    }
  }
  if (R.rows() > 0) {
    if ((R - R.transpose()).norm() > kSymmetryTolerance * std::max(1.0, R.norm())) {
      throw Error(ErrorCode::InvalidParameter, "control weight must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> er(R, Eigen::EigenvaluesOnly);
    if (!(er.eigenvalues().minCoeff() > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "control weight must be positive definite");
    }
  }
}

}  // namespace capassign
