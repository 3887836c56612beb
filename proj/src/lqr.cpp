#include "softrb/lqr.hpp"

#include <sstream>

namespace softrb {

void validate(const CostWeights& w, Index outputs, Index inputs) {
  if (w.Q.rows() != outputs || w.Q.cols() != outputs) {
    throw NumericalError("cost weights: Q must be p × p");
  }
  if (w.R.rows() != inputs || w.R.cols() != inputs) {
    throw NumericalError("cost weights: R must be m × m");
  }
  require_finite(w.Q, "cost weight Q");
  require_finite(w.R, "cost weight R");
  auto asymmetric = [](const Matrix& M) {
    return (M - M.transpose()).norm() > 1e-12 * std::max(1.0, M.norm());
  };
  if (asymmetric(w.Q) || asymmetric(w.R)) {
    throw NumericalError("cost weights: Q and R must be symmetric");
  }
  if (outputs > 0) {
    Eigen::LDLT<Matrix> q(w.Q);
    if (q.info() != Eigen::Success ||
        (q.vectorD().array() < -1e-12 * std::max(1.0, w.Q.norm())).any()) {
      throw NumericalError("cost weights: Q is not positive semidefinite");
    }
  }
  Eigen::LLT<Matrix> r(w.R);
  if (r.info() != Eigen::Success) {
    throw NumericalError("cost weights: R is not positive definite");
  }
}

double gare_residual(const Matrix& E, const Matrix& A, const Matrix& B,
                     const Matrix& C, const CostWeights& w, const Matrix& P) {
  const Matrix PE = P * E;
  const Matrix BtPE = B.transpose() * PE;
  const Matrix CtQC = C.transpose() * w.Q * C;
  const Matrix EtPA = E.transpose() * P * A;
  const Matrix lhs = EtPA + EtPA.transpose() -
                     BtPE.transpose() * w.R.llt().solve(BtPE) + CtQC;
  const double scale = CtQC.norm();
  return scale > 0 ? lhs.norm() / scale : lhs.norm();
}

Matrix feedback_gain(const Matrix& E, const Matrix& B, const Matrix& R,
                     const Matrix& P) {
  return -R.llt().solve(B.transpose() * P * E);
}

ComplexVector closed_loop_eigenvalues(const Matrix& E, const Matrix& A,
                                      const Matrix& B, const Matrix& K) {
  return eigenvalues(LuFactorization(E).solve(Matrix(A + B * K)));
}

namespace {

double max_real_part(const ComplexVector& lambda) {
  return lambda.real().maxCoeff();
}

}  // namespace

AreSolution solve_gare_dense(const Matrix& E, const Matrix& A, const Matrix& B,
                             const Matrix& C, const CostWeights& w,
                             const GareOptions& options) {
  const Index n = A.rows();
  if (E.rows() != n || E.cols() != n || A.cols() != n || B.rows() != n ||
      C.cols() != n) {
    throw NumericalError("solve_gare_dense: inconsistent system dimensions");
  }
  validate(w, C.rows(), B.cols());

  const LuFactorization e_lu(E);
  const Matrix At = e_lu.solve(A);
  const Matrix Bt = e_lu.solve(B);
  const Matrix G = Bt * w.R.llt().solve(Bt.transpose());
  const Matrix CtQC = C.transpose() * w.Q * C;
  const double scale = std::max(CtQC.norm(), 1e-300);

  Matrix H(2 * n, 2 * n);
  H << At, -G, -CtQC, -At.transpose();
  const Matrix U = stable_invariant_subspace(H, n);

  // P_E = U₂U₁⁻¹, computed as (U₁ᵀ \ U₂ᵀ)ᵀ.
  Eigen::PartialPivLU<Matrix> u1(U.topRows(n).transpose());
  if (!(u1.rcond() > 1e-14)) {
    throw NumericalError(
        "solve_gare_dense: stable subspace is not a graph subspace (U1 singular)");
  }
  Matrix PE = u1.solve(U.bottomRows(n).transpose()).transpose();
  PE = (0.5 * (PE + PE.transpose())).eval();

  auto standard_residual = [&](const Matrix& X) {
    const Matrix XA = X * At;
    return Matrix(XA + XA.transpose() - X * G * X + CtQC);
  };

  AreSolution sol;
  Matrix res = standard_residual(PE);
  for (int step = 0; step < options.max_refinement_steps; ++step) {
    const double before = res.norm() / scale;
    if (before <= options.refinement_target) break;
    const Matrix closed = At - G * PE;
    const Matrix candidate = PE + solve_continuous_lyapunov(closed, res);
    const Matrix cand_res = standard_residual(candidate);
    if (!(cand_res.norm() / scale < before)) break;
    PE = 0.5 * (candidate + candidate.transpose());
    res = standard_residual(PE);
    ++sol.refinement_steps;
  }

  // P = E⁻ᵀ P_E E⁻¹.
  const Matrix left = e_lu.solve(Matrix(Matrix::Identity(n, n)));
  Matrix P = left.transpose() * PE * left;
  P = (0.5 * (P + P.transpose())).eval();

  const auto eig = sym_eig(P);
  const double lmax = std::max(eig.values(0), 0.0);
  if (eig.values(n - 1) < -1e-9 * std::max(lmax, 1e-300)) {
    std::ostringstream msg;
    msg << "solve_gare_dense: P is indefinite (smallest eigenvalue "
        << eig.values(n - 1) << ", largest " << eig.values(0) << ")";
    throw NumericalError(msg.str());
  }

  sol.P = std::move(P);
  sol.gain = feedback_gain(E, B, w.R, sol.P);
  sol.residual = gare_residual(E, A, B, C, w, sol.P);
  sol.stability_margin =
      max_real_part(eigenvalues(Matrix(At + Bt * sol.gain)));
  if (!(sol.stability_margin < 0)) {
    std::ostringstream msg;
    msg << "solve_gare_dense: closed loop not strictly stable (max Re = "
        << sol.stability_margin << ")";
    throw NumericalError(msg.str());
  }
  if (options.low_rank_tolerance >= 0) {
    sol.Z = low_rank_factor(sol.P, options.low_rank_tolerance);
  }
  return sol;
}

AreSolution solve_gare_dense(const FirstOrderSystem& sys, const CostWeights& w,
                             const GareOptions& options) {
  return solve_gare_dense(sys.E, sys.A, sys.B, sys.C, w, options);
}

Matrix low_rank_factor(const Matrix& P, double tol) {
  if (tol < 0) throw NumericalError("low_rank_factor: tolerance must be >= 0");
  const auto eig = sym_eig(P);
  const Index n = eig.values.size();
  const double lmax = std::max(eig.values(0), 0.0);
  if (eig.values(n - 1) < -1e-9 * std::max(lmax, 1e-300)) {
    throw NumericalError("low_rank_factor: P is significantly indefinite");
  }
  const Vector lambda = eig.values.cwiseMax(0.0);
  const double total = lambda.sum();
  if (!(total > 0)) return Matrix::Zero(n, 0);
  // Smallest k with Σ_{i>k} λ_i ≤ tol·Σλ_i.
  Index k = n;
  double tail = 0.0;
  while (k > 0 && tail + lambda(k - 1) <= tol * total) {
    tail += lambda(k - 1);
    --k;
  }
  k = std::max<Index>(k, 1);
  return eig.vectors.leftCols(k) * lambda.head(k).cwiseSqrt().asDiagonal();
}

ClosedLoopRun closed_loop_simulate(const FirstOrderSystem& sys,
                                   const Matrix& gain, const Equilibrium& target,
                                   const TimeGrid& grid) {
  if (gain.rows() != sys.inputs() || gain.cols() != sys.size()) {
    throw NumericalError("closed_loop_simulate: gain has wrong shape");
  }
  if (target.state.size() != sys.size() || target.input.size() != sys.inputs()) {
    throw NumericalError("closed_loop_simulate: target has wrong shape");
  }
  const Matrix A_cl = sys.A + sys.B * gain;
  const Vector offset =
      sys.B * (target.input - gain * target.state) + sys.F;
  LoadFunction load;
  if (offset.squaredNorm() > 0) load = [offset](double) { return offset; };

  ClosedLoopRun run;
  run.trajectory = implicit_midpoint(sys.E, A_cl, Matrix::Zero(sys.size(), 0),
                                     sys.x0, {}, load, grid);
  const double limit =
      1e6 * std::max({1.0, sys.x0.norm(), target.state.norm()});
  const Vector norms = run.trajectory.states.colwise().norm();
  for (Index k = 0; k < norms.size(); ++k) {
    if (!std::isfinite(norms(k)) || norms(k) > limit) {
      std::ostringstream msg;
      msg << "closed_loop_simulate: unstable closed loop, |x| = " << norms(k)
          << " at t = " << grid.time(k);
      throw NumericalError(msg.str());
    }
  }
  run.outputs = sys.C * run.trajectory.states;
  return run;
}

}  // namespace softrb
