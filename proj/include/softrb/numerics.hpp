#ifndef SOFTRB_NUMERICS_HPP
#define SOFTRB_NUMERICS_HPP

///
/// \file numerics.hpp
///
/// Dense linear-algebra kernels shared by every other module: truncated SVD,
/// symmetric eigendecomposition, SPD square roots, reusable LU solves,
/// stable invariant subspaces and a Bartels-Stewart Lyapunov solver.
///
/// The SVD and eigen kernels are templated on the scalar type so that the
/// complex SVD used for symplectic bases shares the same code path as the
/// real POD.
///

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace softrb {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Raised by every kernel when a precondition on numerical data fails.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Singular values below this multiple of the largest are treated as zero
/// in every rank decision.
inline constexpr double kRankTolerance = 1e-12;

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& X, const char* what) {
  if (!X.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite entries");
  }
}

template <typename Scalar>
struct SvdResult {
  using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> U;
  Eigen::Matrix<RealScalar, Eigen::Dynamic, 1> sigma;
  /// Empty when only left vectors were requested.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> V;
};

enum class SvdVectors { Both, LeftOnly };

namespace detail {

template <typename Derived>
auto thin_svd(const Eigen::MatrixBase<Derived>& X, SvdVectors vectors) {
  using Scalar = typename Derived::Scalar;
  using PlainMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const unsigned options = vectors == SvdVectors::Both
                               ? (Eigen::ComputeThinU | Eigen::ComputeThinV)
                               : Eigen::ComputeThinU;
  return Eigen::BDCSVD<PlainMatrix>(PlainMatrix(X), options);
}

}  // namespace detail

///
/// First k singular triplets of X, singular values non-increasing.
///
/// The discarded energy satisfies ‖X − U_k Σ_k V_kᵀ‖_F² = Σ_{i>k} σ_i².
///
template <typename Derived>
SvdResult<typename Derived::Scalar> truncated_svd(
    const Eigen::MatrixBase<Derived>& X, Index k,
    SvdVectors vectors = SvdVectors::Both) {
  require_finite(X, "truncated_svd");
  const Index max_rank = std::min(X.rows(), X.cols());
  if (k < 1 || k > max_rank) {
    std::ostringstream msg;
    msg << "truncated_svd: rank " << k << " outside [1, " << max_rank << "]";
    throw NumericalError(msg.str());
  }
  auto svd = detail::thin_svd(X, vectors);
  SvdResult<typename Derived::Scalar> out;
  out.U = svd.matrixU().leftCols(k);
  out.sigma = svd.singularValues().head(k);
  if (vectors == SvdVectors::Both) {
    out.V = svd.matrixV().leftCols(k);
  }
  return out;
}

/// All min(rows, cols) singular values, non-increasing.
template <typename Derived>
Eigen::Matrix<typename Eigen::NumTraits<typename Derived::Scalar>::Real,
              Eigen::Dynamic, 1>
singular_values(const Eigen::MatrixBase<Derived>& X) {
  require_finite(X, "singular_values");
  using PlainMatrix =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return Eigen::BDCSVD<PlainMatrix>(PlainMatrix(X)).singularValues();
}

/// Number of singular values above kRankTolerance·σ_max.
template <typename VectorType>
Index numerical_rank(const VectorType& sigma) {
  if (sigma.size() == 0 || sigma(0) <= 0) return 0;
  const auto cutoff = kRankTolerance * sigma(0);
  Index r = 0;
  while (r < sigma.size() && sigma(r) > cutoff) ++r;
  return r;
}

template <typename Scalar>
struct SymEigResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;  // descending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
};

/// Eigendecomposition S = QΛQᵀ of a symmetric matrix, eigenvalues descending.
template <typename Derived>
SymEigResult<typename Derived::Scalar> sym_eig(
    const Eigen::MatrixBase<Derived>& S) {
  using Scalar = typename Derived::Scalar;
  using PlainMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  require_finite(S, "sym_eig");
  if (S.rows() != S.cols()) throw NumericalError("sym_eig: matrix not square");
  const Scalar norm = S.norm();
  if ((S - S.transpose()).norm() > Scalar(1e-10) * norm) {
    throw NumericalError("sym_eig: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<PlainMatrix> es{PlainMatrix(S)};
  if (es.info() != Eigen::Success) {
    throw NumericalError("sym_eig: eigensolver did not converge");
  }
  SymEigResult<Scalar> out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

template <typename Scalar>
struct SpdRoots {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sqrt;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> inv_sqrt;
};

/// W^{1/2} and W^{-1/2} of a symmetric positive definite matrix.
template <typename Derived>
SpdRoots<typename Derived::Scalar> spd_sqrt_and_inv_sqrt(
    const Eigen::MatrixBase<Derived>& W) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eig(W);
  const Scalar largest = eig.values(0);
  const Scalar smallest = eig.values(eig.values.size() - 1);
  if (!(largest > 0) || smallest <= Scalar(1e-12) * largest) {
    std::ostringstream msg;
    msg << "spd_sqrt_and_inv_sqrt: matrix is not positive definite "
        << "(smallest eigenvalue " << smallest << ", largest " << largest
        << ")";
    throw NumericalError(msg.str());
  }
  const auto& Q = eig.vectors;
  const auto root = eig.values.cwiseSqrt();
  SpdRoots<Scalar> out;
  out.sqrt = Q * root.asDiagonal() * Q.transpose();
  out.inv_sqrt = Q * root.cwiseInverse().asDiagonal() * Q.transpose();
  return out;
}

///
/// LU factorization held for repeated solves. Construction rejects matrices
/// whose reciprocal condition estimate is below 1e-14.
///
class LuFactorization {
 public:
  LuFactorization() = default;
  explicit LuFactorization(const Matrix& S);

  Matrix solve(const Matrix& rhs) const;
  Vector solve(const Vector& rhs) const;

  Index size() const { return lu_.rows(); }
  double rcond() const { return rcond_; }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
  double rcond_ = 0.0;
};

Matrix factorize_and_solve(const Matrix& S, const Matrix& rhs);

///
/// Orthonormal basis of the invariant subspace of H belonging to the
/// eigenvalues with negative real part.
///
/// Throws when any eigenvalue lies within 1e-10·max(1, |λ|) of the imaginary
/// axis, or when the number of stable eigenvalues differs from `dim`.
///
Matrix stable_invariant_subspace(const Matrix& H, Index dim);

/// Eigenvalues of a general real matrix.
ComplexVector eigenvalues(const Matrix& A);

/// Solves Aᵀ X + X A + Q = 0 for X (Bartels-Stewart). Q must be symmetric.
Matrix solve_continuous_lyapunov(const Matrix& A, const Matrix& Q);

/// Relative Frobenius distance ‖X − Y‖_F / ‖X‖_F (0 when both vanish).
double relative_error(const Matrix& reference, const Matrix& approx);

}  // namespace softrb

#endif  // SOFTRB_NUMERICS_HPP
