#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "capassign/linear_system.hpp"
#include "capassign/simd/kernels.hpp"
#include "capassign/tracker.hpp"

namespace capassign {

/// Stand-in cost for pairs whose tracker could not be synthesized.
inline constexpr double kSentinelCost = 1e15;

/// Weighted point cloud; weights live in the probability simplex.
struct DiscreteMeasure {
  std::vector<Vector> locations;
  Vector weights;

  static DiscreteMeasure uniform(std::vector<Vector> locations);
  Index size() const { return weights.size(); }
  /// Throws InvalidParameter unless weights are non-negative and sum to 1.
  void validate() const;
};

/// Uniform weights 1/n.
Vector uniform_weights(Index n);

enum class MetricKind { Euclidean, Dynamics };

struct Metric {
  MetricKind kind = MetricKind::Dynamics;
  double exponent = 1.0;  // Euclidean only

  static Metric euclidean(double exponent = 1.0) { return {MetricKind::Euclidean, exponent}; }
  static Metric dynamics() { return {MetricKind::Dynamics, 1.0}; }
  std::string describe() const;
};

struct PairFailure {
  Index agent = 0;
  Index target = 0;
  std::string reason;
};

struct CostMatrix {
  Matrix entries;
  Metric metric;
  /// Pairs replaced by kSentinelCost.
  std::vector<PairFailure> failures;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
  bool is_sentinel(Index i, Index j) const;
};

/// Non-negative n x m matrix with prescribed row and column sums.
struct Coupling {
  Matrix matrix;
  Vector row_marginal;
  Vector col_marginal;

  /// Largest absolute deviation from either marginal.
  double marginal_error() const;
};

/// Agent i is sent to target sigma[i].
struct Assignment {
  std::vector<Index> sigma;

  Index size() const { return static_cast<Index>(sigma.size()); }
  bool is_permutation() const;
  double cost(const Matrix& c) const;
};

struct MatchingResult {
  Assignment assignment;
  double total_cost = 0.0;
};

struct KantorovichResult {
  Coupling coupling;
  double objective = 0.0;
  long pivots = 0;
};

/// entries(i, j) = |pos(x_i) - pos(y_j)|^exponent over the position slices.
CostMatrix euclidean_cost(const std::vector<Vector>& agents, const StateLayout& agent_layout,
                          const std::vector<Vector>& targets,
                          const StateLayout& target_layout, double exponent = 1.0,
                          simd::Level level = simd::active_level());

/// Memoizes tracker synthesis per (agent dynamics, target drift, weights).
/// The Riccati blocks do not depend on the affine offsets, so one entry
/// serves every pair of a homogeneous swarm. Thread-safe.
class TrackerCache {
 public:
  std::shared_ptr<const TrackerCore> core(const LinearSystem& agent,
                                          const LinearSystem& target,
                                          const QuadraticCost& cost);
  /// Number of Riccati syntheses actually performed.
  long synthesis_count() const;
  void clear();

 private:
  struct Entry {
    Matrix agent_drift;
    Matrix agent_input;
    Matrix target_drift;
    QuadraticCost cost;
    std::shared_ptr<const TrackerCore> core;
  };
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
  long syntheses_ = 0;
};

/// Per-pair policies; pairs with identical dynamics and target share one.
class PolicyTable {
 public:
  PolicyTable() = default;
  PolicyTable(Index rows, Index cols) : rows_(rows), cols_(cols), table_(rows * cols) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const std::shared_ptr<const TrackingPolicy>& at(Index i, Index j) const {
    return table_[static_cast<std::size_t>(i * cols_ + j)];
  }
  std::shared_ptr<const TrackingPolicy>& at(Index i, Index j) {
    return table_[static_cast<std::size_t>(i * cols_ + j)];
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::shared_ptr<const TrackingPolicy>> table_;
};

enum class FailureMode { Throw, Sentinel };

struct DynamicsCost {
  CostMatrix cost;
  PolicyTable policies;
};

/// entries(i, j) = optimal tracking cost of agent i following target j from
/// the given states. With FailureMode::Sentinel a failed synthesis poisons
/// only its entry; with Throw the error is rethrown naming the pair.
DynamicsCost dynamics_cost(const std::vector<Vector>& agents,
                           const std::vector<LinearSystem>& agent_dynamics,
                           const std::vector<Vector>& targets,
                           const std::vector<LinearSystem>& target_dynamics,
                           const QuadraticCost& weights, TrackerCache& cache,
                           FailureMode failure_mode = FailureMode::Throw,
                           simd::Level level = simd::active_level());

/// Minimizes sum c_ij p_ij over couplings with marginals (a, b) by the
/// transportation simplex. The result is a basic (vertex) solution.
/// Throws Infeasible for malformed marginals, NoConvergence past the pivot cap.
KantorovichResult solve_kantorovich(const Matrix& cost, const Vector& a, const Vector& b);
KantorovichResult solve_kantorovich(const CostMatrix& cost, const Vector& a, const Vector& b);

/// Optimal permutation by shortest augmenting paths. Among optimal
/// permutations the lexicographically smallest sigma is returned.
/// Throws NonSquare.
MatchingResult solve_matching(const Matrix& cost, simd::Level level = simd::active_level());
MatchingResult solve_matching(const CostMatrix& cost,
                              simd::Level level = simd::active_level());

/// Reads sigma off a (1/n)-scaled permutation coupling; throws
/// InvalidParameter if some row has no dominant entry.
Assignment assignment_from_coupling(const Coupling& coupling);

}  // namespace capassign
