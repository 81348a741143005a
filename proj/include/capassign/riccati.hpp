#pragma once

#include "capassign/linear_system.hpp"

namespace capassign {

/// Relative CARE residual tolerance: ||res||_F <= kCareTolerance (1 + ||P||_F).
inline constexpr double kCareTolerance = 1e-9;

/// Solves A X + X B = C by Bartels-Stewart on complex Schur forms.
/// Requires spectra of A and -B disjoint.
Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C);

/// Solves A' X + X A + Q = 0.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// PBH rank test on every eigenvalue with real part >= -tol.
bool is_stabilizable(const Matrix& A, const Matrix& B);

/// PBH rank test of (A, Q): unobservable modes must be stable. Q is used in
/// place of Q^{1/2}; both have the same kernel.
bool is_detectable(const Matrix& A, const Matrix& Q);

/// A'P + PA - P B R^{-1} B' P + Q.
Matrix care_residual(const Matrix& A, const Matrix& B, const QuadraticCost& cost,
                     const Matrix& P);

/// Relative Frobenius residual ||care_residual|| / (1 + ||P||).
double care_relative_residual(const Matrix& A, const Matrix& B,
                              const QuadraticCost& cost, const Matrix& P);

/// Stabilizing solution of the continuous algebraic Riccati equation.
///
/// Uses the stable invariant subspace of the Hamiltonian
/// [[A, -B R^{-1} B'], [-Q, -A']], found by reordering a complex Schur
/// form, followed by Newton (Kleinman) refinement when the residual is
/// above kCareTolerance. The result is symmetrized.
///
/// Throws NotStabilizable, NotDetectable, or IllConditionedError.
Matrix solve_care(const Matrix& A, const Matrix& B, const QuadraticCost& cost);

}  // namespace capassign
