#include "softrb/numerics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <lapacke.h>

namespace softrb {

LuFactorization::LuFactorization(const Matrix& S) {
  require_finite(S, "factorize");
  if (S.rows() != S.cols()) throw NumericalError("factorize: matrix not square");
  lu_.compute(S);
  rcond_ = lu_.rcond();
  if (!(rcond_ > 1e-14)) {
    std::ostringstream msg;
    msg << "factorize: matrix singular to working precision (rcond " << rcond_
        << ")";
    throw NumericalError(msg.str());
  }
}

Matrix LuFactorization::solve(const Matrix& rhs) const {
  if (rhs.rows() != lu_.rows()) throw NumericalError("solve: size mismatch");
  return lu_.solve(rhs);
}

Vector LuFactorization::solve(const Vector& rhs) const {
  if (rhs.size() != lu_.rows()) throw NumericalError("solve: size mismatch");
  return lu_.solve(rhs);
}

Matrix factorize_and_solve(const Matrix& S, const Matrix& rhs) {
  return LuFactorization(S).solve(rhs);
}

namespace {

struct RealSchur {
  Matrix T;
  Matrix U;
  Vector wr;
  Vector wi;
  lapack_int sdim = 0;
};

// Eigenvalues of a quasi-triangular T; 2×2 blocks need not be standardized.
void block_eigenvalues(const Matrix& T, Vector& wr, Vector& wi) {
  const Index n = T.rows();
  wr.resize(n);
  wi.resize(n);
  for (Index i = 0; i < n;) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      const double a = T(i, i), b = T(i, i + 1), c = T(i + 1, i), d = T(i + 1, i + 1);
      const double mean = 0.5 * (a + d);
      const double disc = 0.25 * (a - d) * (a - d) + b * c;
      if (disc >= 0) {
        wr(i) = mean + std::sqrt(disc);
        wr(i + 1) = mean - std::sqrt(disc);
        wi(i) = wi(i + 1) = 0.0;
      } else {
        wr(i) = wr(i + 1) = mean;
        wi(i) = std::sqrt(-disc);
        wi(i + 1) = -wi(i);
      }
      i += 2;
    } else {
      wr(i) = T(i, i);
      wi(i) = 0.0;
      ++i;
    }
  }
}

// Hessenberg QR from Eigen, reordering by LAPACK dtrsen. The dhseqr shipped
// with LAPACK 3.10 can stall on stiff Hamiltonians, Eigen's does not.
RealSchur real_schur(const Matrix& A, bool order_stable) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Eigen::RealSchur<Matrix> rs(A);
  if (rs.info() != Eigen::Success) {
    throw NumericalError("real Schur decomposition: QR iteration did not converge");
  }
  RealSchur out;
  out.T = rs.matrixT();
  out.U = rs.matrixU();
  block_eigenvalues(out.T, out.wr, out.wi);
  if (!order_stable || n == 0) return out;

  std::vector<lapack_logical> select(n);
  for (lapack_int i = 0; i < n; ++i) select[i] = out.wr(i) < 0.0;
  double s = 0.0, sep = 0.0;
  lapack_int liwork = 1;
  std::vector<double> work(std::max<lapack_int>(n, 1));
  const lapack_int info = LAPACKE_dtrsen_work(
      LAPACK_COL_MAJOR, 'N', 'V', select.data(), n, out.T.data(), n,
      out.U.data(), n, out.wr.data(), out.wi.data(), &out.sdim, &s, &sep,
      work.data(), n, &liwork, 1);
  if (info != 0) {
    std::ostringstream msg;
    msg << "Schur reordering failed (dtrsen info " << info << ")";
    throw NumericalError(msg.str());
  }
  return out;
}

}  // namespace

Matrix stable_invariant_subspace(const Matrix& H, Index dim) {
  require_finite(H, "stable_invariant_subspace");
  if (H.rows() != H.cols() || H.rows() != 2 * dim) {
    throw NumericalError("stable_invariant_subspace: H must be 2·dim square");
  }
  RealSchur schur = real_schur(H, true);

  for (Index i = 0; i < H.rows(); ++i) {
    const std::complex<double> lambda(schur.wr(i), schur.wi(i));
    if (std::abs(lambda.real()) <= 1e-10 * std::max(1.0, std::abs(lambda))) {
      std::ostringstream msg;
      msg << "stable_invariant_subspace: eigenvalue " << lambda
          << " on the imaginary axis; no stable subspace of dimension " << dim
          << " (stabilizability or detectability lost)";
      throw NumericalError(msg.str());
    }
  }
  if (schur.sdim != dim) {
    std::ostringstream msg;
    msg << "stable_invariant_subspace: " << schur.sdim
        << " stable eigenvalues, expected " << dim;
    throw NumericalError(msg.str());
  }
  return schur.U.leftCols(dim);
}

ComplexVector eigenvalues(const Matrix& A) {
  require_finite(A, "eigenvalues");
  Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalues: QR iteration did not converge");
  }
  return es.eigenvalues();
}

Matrix solve_continuous_lyapunov(const Matrix& A, const Matrix& Q) {
  require_finite(A, "solve_continuous_lyapunov");
  require_finite(Q, "solve_continuous_lyapunov");
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw NumericalError("solve_continuous_lyapunov: size mismatch");
  }
  // A = U T Uᵀ turns Aᵀ X + X A = −Q into Tᵀ Y + Y T = −UᵀQU with X = U Y Uᵀ.
  RealSchur schur = real_schur(A, false);
  Matrix Y = -(schur.U.transpose() * Q * schur.U);
  double scale = 1.0;
  const lapack_int info =
      LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'T', 'N', 1, n, n, schur.T.data(), n,
                     schur.T.data(), n, Y.data(), n, &scale);
  if (info < 0) {
    throw NumericalError("solve_continuous_lyapunov: invalid dtrsyl argument");
  }
  if (info == 1) {
    throw NumericalError(
        "solve_continuous_lyapunov: A and −A have common or close eigenvalues");
  }
  Matrix X = schur.U * (Y / scale) * schur.U.transpose();
  return 0.5 * (X + X.transpose());
}

double relative_error(const Matrix& reference, const Matrix& approx) {
  const double ref = reference.norm();
  const double diff = (reference - approx).norm();
  if (ref == 0.0) {
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return diff / ref;
}

}  // namespace softrb
