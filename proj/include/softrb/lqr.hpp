#ifndef SOFTRB_LQR_HPP
#define SOFTRB_LQR_HPP

///
/// \file lqr.hpp
///
/// Dense solver for the generalized algebraic Riccati equation
///
///   EᵀPA + AᵀPE − EᵀPBR⁻¹BᵀPE + CᵀQC = 0
///
/// and the resulting state feedback u = K_f x, K_f = −R⁻¹BᵀPE.
///
/// The equation is reduced to standard form with Ã = E⁻¹A, B̃ = E⁻¹B and
/// solved for P_E = EᵀPE through the stable invariant subspace of the
/// Hamiltonian matrix. The Schur solution is then polished by Newton
/// defect-correction steps, each a Lyapunov solve with the current
/// closed-loop matrix.
///

#include "softrb/coupled_model.hpp"
#include "softrb/numerics.hpp"
#include "softrb/timeint.hpp"

namespace softrb {

struct CostWeights {
  Matrix Q;  // p × p, symmetric PSD
  Matrix R;  // m × m, symmetric PD
};

void validate(const CostWeights& w, Index outputs, Index inputs);

struct GareOptions {
  /// Newton defect-correction steps applied after the Schur solve.
  int max_refinement_steps = 2;
  /// Stop refining once the relative residual is below this.
  double refinement_target = 1e-12;
  /// Eigenvalue tail tolerance for the low-rank factor; negative skips it.
  double low_rank_tolerance = 1e-12;
};

struct AreSolution {
  Matrix P;
  Matrix Z;
  Matrix gain;  // K_f, m × N
  double residual = 0.0;
  /// Largest real part of the closed-loop generalized eigenvalues.
  double stability_margin = 0.0;
  int refinement_steps = 0;
};

/// ‖EᵀPA + AᵀPE − EᵀPBR⁻¹BᵀPE + CᵀQC‖_F / ‖CᵀQC‖_F.
double gare_residual(const Matrix& E, const Matrix& A, const Matrix& B,
                     const Matrix& C, const CostWeights& w, const Matrix& P);

Matrix feedback_gain(const Matrix& E, const Matrix& B, const Matrix& R,
                     const Matrix& P);

/// Generalized eigenvalues of (A + B·K, E).
ComplexVector closed_loop_eigenvalues(const Matrix& E, const Matrix& A,
                                      const Matrix& B, const Matrix& K);

/// Stabilizing solution. Throws NumericalError when the Hamiltonian has
/// imaginary-axis eigenvalues, when P fails the symmetry/PSD checks, or when
/// the closed loop is not strictly stable.
AreSolution solve_gare_dense(const Matrix& E, const Matrix& A, const Matrix& B,
                             const Matrix& C, const CostWeights& w,
                             const GareOptions& options = {});

AreSolution solve_gare_dense(const FirstOrderSystem& sys, const CostWeights& w,
                             const GareOptions& options = {});

/// Z = Q_k Λ_k^{1/2} with the smallest k whose discarded eigenvalue sum is
/// at most tol·Σλ. Throws for significantly indefinite P.
Matrix low_rank_factor(const Matrix& P, double tol);

struct ClosedLoopRun {
  Trajectory trajectory;
  Matrix outputs;  // C·x per time node
};

///
/// Integrates E ẋ = A x + B(ū + K_f(x − x̄)) + F from sys.x0.
///
/// Aborts with NumericalError if the state norm grows beyond 1e6 times its
/// initial scale.
///
ClosedLoopRun closed_loop_simulate(const FirstOrderSystem& sys,
                                   const Matrix& gain, const Equilibrium& target,
                                   const TimeGrid& grid);

}  // namespace softrb

#endif  // SOFTRB_LQR_HPP
