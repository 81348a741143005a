#include "capassign/riccati.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "capassign/error.hpp"

namespace capassign {
namespace {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

constexpr int kMaxNewtonSteps = 6;

double pbh_threshold(double scale) {
  return 1e-7 * std::max(1.0, scale);
}

double real_part_tolerance(const Matrix& A) {
  return std::sqrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, A.norm());
}

// Exchanges the adjacent diagonal entries k and k+1 of the upper triangular
// T, updating the unitary basis U so that U T U^H is preserved.
void swap_schur_entries(CMatrix& T, CMatrix& U, Index k) {
  const Complex t11 = T(k, k);
  const Complex t22 = T(k + 1, k + 1);
  const Complex t12 = T(k, k + 1);
  const Complex diff = t22 - t11;
  const double r = std::hypot(std::abs(t12), std::abs(diff));
  if (r == 0.0) return;
  const Complex c = t12 / r;
  const Complex s = diff / r;
  Eigen::Matrix2cd G;
  G << c, -std::conj(s), s, std::conj(c);

  T.middleRows(k, 2) = (G.adjoint() * T.middleRows(k, 2)).eval();
  T.middleCols(k, 2) = (T.middleCols(k, 2) * G).eval();
  U.middleCols(k, 2) = (U.middleCols(k, 2) * G).eval();
  T(k + 1, k) = Complex(0.0, 0.0);
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
}

double smallest_singular_value(const CMatrix& M) {
  Eigen::JacobiSVD<CMatrix> svd(M);
  const auto& sv = svd.singularValues();
  return sv.size() == 0 ? 0.0 : sv(sv.size() - 1);
}

}  // namespace

Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C) {
  const Index n = A.rows();
  const Index m = B.rows();
  if (A.cols() != n || B.cols() != m || C.rows() != n || C.cols() != m) {
    throw Error(ErrorCode::DimensionMismatch, "sylvester operands");
  }
  if (n == 0 || m == 0) return Matrix::Zero(n, m);

  Eigen::ComplexSchur<CMatrix> sa(A.cast<Complex>());
  Eigen::ComplexSchur<CMatrix> sb(B.cast<Complex>());
  const CMatrix& T = sa.matrixT();
  const CMatrix& U = sa.matrixU();
  const CMatrix& S = sb.matrixT();
  const CMatrix& V = sb.matrixU();

  const CMatrix F = U.adjoint() * C.cast<Complex>() * V;
  CMatrix Y(n, m);
  const double scale = std::max(1.0, A.norm() + B.norm());
  for (Index k = 0; k < m; ++k) {
    CVector rhs = F.col(k);
    if (k > 0) rhs.noalias() -= Y.leftCols(k) * S.col(k).head(k);
    CMatrix M = T;
    M.diagonal().array() += S(k, k);
    if (M.diagonal().cwiseAbs().minCoeff() <= 1e-14 * scale) {
      throw Error(ErrorCode::IllConditioned,
                  "sylvester equation is singular (spectra of A and -B intersect)");
    }
    Y.col(k) = M.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (U * Y * V.adjoint()).real();
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  Matrix X = solve_sylvester(A.transpose(), A, -Q);
  return 0.5 * (X + X.transpose());
}

bool is_stabilizable(const Matrix& A, const Matrix& B) {
  const Index n = A.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> es(A, false);
  const double tol_re = real_part_tolerance(A);
  const double threshold = pbh_threshold(A.norm() + B.norm());
  for (Index i = 0; i < n; ++i) {
    const Complex lambda = es.eigenvalues()(i);
    if (lambda.real() < -tol_re) continue;
    CMatrix M(n, n + B.cols());
    M.leftCols(n) = A.cast<Complex>() - lambda * CMatrix::Identity(n, n);
    M.rightCols(B.cols()) = B.cast<Complex>();
    if (smallest_singular_value(M) <= threshold) return false;
  }
  return true;
}

bool is_detectable(const Matrix& A, const Matrix& Q) {
  const Index n = A.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> es(A, false);
  const double tol_re = real_part_tolerance(A);
  const double threshold = pbh_threshold(A.norm() + Q.norm());
  for (Index i = 0; i < n; ++i) {
    const Complex lambda = es.eigenvalues()(i);
    if (lambda.real() < -tol_re) continue;
    CMatrix M(n + Q.rows(), n);
    M.topRows(n) = A.cast<Complex>() - lambda * CMatrix::Identity(n, n);
    M.bottomRows(Q.rows()) = Q.cast<Complex>();
    if (smallest_singular_value(M) <= threshold) return false;
  }
  return true;
}

Matrix care_residual(const Matrix& A, const Matrix& B, const QuadraticCost& cost,
                     const Matrix& P) {
  const Matrix BtP = B.transpose() * P;
  const Matrix K = cost.control_weight().llt().solve(BtP);
  return A.transpose() * P + P * A - BtP.transpose() * K + cost.state_weight();
}

double care_relative_residual(const Matrix& A, const Matrix& B,
                              const QuadraticCost& cost, const Matrix& P) {
  return care_residual(A, B, cost, P).norm() / (1.0 + P.norm());
}

Matrix solve_care(const Matrix& A, const Matrix& B, const QuadraticCost& cost) {
  const Index n = A.rows();
  const Matrix& Q = cost.state_weight();
  const Matrix& R = cost.control_weight();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || R.rows() != B.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "CARE operands have inconsistent sizes");
  }
  if (n == 0) return Matrix(0, 0);
  if (!is_stabilizable(A, B)) {
    throw Error(ErrorCode::NotStabilizable, "(A, B) has an uncontrollable unstable mode");
  }
  if (!is_detectable(A, Q)) {
    throw Error(ErrorCode::NotDetectable, "(A, Q) has an unobservable unstable mode");
  }

  const Eigen::LLT<Matrix> r_llt(R);
  const Matrix S = B * r_llt.solve(B.transpose());

  Matrix H(2 * n, 2 * n);
  H << A, -S, -Q, -A.transpose();

  Eigen::ComplexSchur<CMatrix> schur(H.cast<Complex>());
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::IllConditioned, "Schur decomposition of the Hamiltonian failed");
  }
  CMatrix T = schur.matrixT();
  CMatrix U = schur.matrixU();

  // Bubble the stable eigenvalues to the leading block.
  Index stable = 0;
  for (Index i = 0; i < 2 * n; ++i) {
    if (T(i, i).real() < 0.0) {
      for (Index k = i - 1; k >= stable; --k) swap_schur_entries(T, U, k);
      ++stable;
    }
  }
  const double axis_tol = 1e-12 * std::max(1.0, H.norm());
  for (Index i = 0; i < 2 * n; ++i) {
    if (std::abs(T(i, i).real()) <= axis_tol) {
      throw Error(ErrorCode::NotStabilizable,
                  "Hamiltonian has eigenvalues on the imaginary axis");
    }
  }
  if (stable != n) {
    throw Error(ErrorCode::NotStabilizable, "Hamiltonian spectrum is not split evenly");
  }

  const CMatrix U11 = U.topLeftCorner(n, n);
  const CMatrix U21 = U.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<CMatrix> lu(U11.transpose());
  const CMatrix Pc = lu.solve(U21.transpose()).transpose();
  Matrix P = Pc.real();
  P = 0.5 * (P + P.transpose());

  double residual = care_relative_residual(A, B, cost, P);
  for (int step = 0; step < kMaxNewtonSteps && !(residual <= kCareTolerance); ++step) {
    const Matrix K = r_llt.solve(B.transpose() * P);
    const Matrix closed = A - B * K;
    Matrix next;
    try {
      next = solve_lyapunov(closed, Q + K.transpose() * R * K);
    } catch (const Error&) {
      break;
    }
    const double next_residual = care_relative_residual(A, B, cost, next);
    if (!(next_residual < residual)) break;
    P = std::move(next);
    residual = next_residual;
  }
  if (!(residual <= kCareTolerance) || !P.allFinite()) {
    std::ostringstream msg;
    msg << "CARE residual " << residual << " exceeds tolerance " << kCareTolerance;
    throw IllConditionedError(msg.str(), residual);
  }
  return P;
}

}  // namespace capassign
