#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace capassign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A named, contiguous range of state entries.
struct StateSlice {
  std::string name;
  Index begin = 0;
  Index size = 0;
  std::string unit;
};

/// Partition of a state vector into named slices. One slice is designated
/// as the position slice used for capture checks and Euclidean costs.
class StateLayout {
 public:
  StateLayout() = default;
  StateLayout(std::vector<StateSlice> slices, std::string position_slice);

  /// Single slice covering all `dim` entries, which doubles as position.
  static StateLayout flat(Index dim);

  const std::vector<StateSlice>& slices() const { return slices_; }
  const StateSlice& slice(const std::string& name) const;
  const StateSlice& position() const { return slice(position_name_); }
  Index dim() const;

  Vector position_of(const Vector& state) const;

 private:
  std::vector<StateSlice> slices_;
  std::string position_name_;
};

/// x' = drift * x + input * u + offset.
class LinearSystem {
 public:
  LinearSystem() = default;
  LinearSystem(Matrix drift, Matrix input, Vector offset = Vector(),
               StateLayout layout = StateLayout());

  /// Autonomous affine system x' = drift * x + offset.
  static LinearSystem autonomous(Matrix drift, Vector offset,
                                 StateLayout layout = StateLayout());

  const Matrix& drift() const { return drift_; }
  const Matrix& input() const { return input_; }
  const Vector& offset() const { return offset_; }
  const StateLayout& layout() const { return layout_; }

  Index state_dim() const { return drift_.rows(); }
  Index input_dim() const { return input_.cols(); }
  bool is_autonomous() const { return input_.cols() == 0; }

  Vector derivative(const Vector& state, const Vector& control) const;

  /// Same matrices and offset, compared exactly.
  bool same_dynamics(const LinearSystem& other) const;

 private:
  Matrix drift_;
  Matrix input_;
  Vector offset_;
  StateLayout layout_;
};

/// Quadratic weights e'Qe + u'Ru on the tracking error and control.
class QuadraticCost {
 public:
  static constexpr double kSymmetryTolerance = 1e-10;

  QuadraticCost() = default;
  QuadraticCost(Matrix state_weight, Matrix control_weight);

  const Matrix& state_weight() const { return state_weight_; }
  const Matrix& control_weight() const { return control_weight_; }

  bool operator==(const QuadraticCost& other) const {
    return state_weight_ == other.state_weight_ &&
           control_weight_ == other.control_weight_;
  }

 private:
  Matrix state_weight_;
  Matrix control_weight_;
};

}  // namespace capassign
