#include "softrb/mor_forward.hpp"

#include <sstream>

namespace softrb {

std::string_view to_string(ForwardMethod method) {
  switch (method) {
    case ForwardMethod::GlobalPod: return "global-pod";
    case ForwardMethod::ComponentwisePod: return "cw-pod";
    case ForwardMethod::PodFixedSolid: return "pod-fixed-solid";
    case ForwardMethod::ComponentwisePodFixedSolid: return "cw-pod-fixed-solid";
    case ForwardMethod::Gpsd: return "gpsd";
    case ForwardMethod::PsdFixedSolid: return "psd-fixed-solid";
  }
  return "unknown";
}

ForwardMethod parse_forward_method(std::string_view tag) {
  for (ForwardMethod m : kAllForwardMethods) {
    if (to_string(m) == tag) return m;
  }
  throw NumericalError("unknown forward method '" + std::string(tag) + "'");
}

bool is_symplectic(ForwardMethod method) {
  return method == ForwardMethod::Gpsd || method == ForwardMethod::PsdFixedSolid;
}

bool has_fixed_solid(ForwardMethod method) {
  return method == ForwardMethod::PodFixedSolid ||
         method == ForwardMethod::ComponentwisePodFixedSolid ||
         method == ForwardMethod::PsdFixedSolid;
}

SnapshotSet snapshots_from(const Trajectory& traj, const StateLayout& layout) {
  if (traj.states.rows() != layout.size()) {
    throw NumericalError("snapshots_from: trajectory does not match layout");
  }
  return SnapshotSet{traj.states.rightCols(traj.states.cols() - 1), layout};
}

Matrix poisson_matrix(Index k) {
  Matrix J = Matrix::Zero(2 * k, 2 * k);
  J.topRightCorner(k, k).setIdentity();
  J.bottomLeftCorner(k, k) = -Matrix::Identity(k, k);
  return J;
}

Matrix poisson_matrix(const StateLayout& layout) {
  const auto perm = layout.canonical_permutation();
  const Matrix Jc = poisson_matrix(layout.n());
  Matrix J = Matrix::Zero(layout.size(), layout.size());
  for (Index i = 0; i < Jc.rows(); ++i) {
    for (Index j = 0; j < Jc.cols(); ++j) {
      if (Jc(i, j) != 0.0) J(perm[i], perm[j]) = Jc(i, j);
    }
  }
  return J;
}

Index pod_energy_rank(const Vector& sigma, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw NumericalError("pod_energy_rank: fraction must lie in (0, 1]");
  }
  if ((sigma.array() < 0).any()) {
    throw NumericalError("pod_energy_rank: negative singular value");
  }
  const double total = sigma.squaredNorm();
  if (!(total > 0.0)) throw NumericalError("pod_energy_rank: all singular values are zero");
  // Modes below the numerical rank tolerance never count.
  const Index usable = std::max<Index>(1, numerical_rank(sigma));
  double acc = 0.0;
  for (Index k = 0; k < usable; ++k) {
    acc += sigma(k) * sigma(k);
    if (acc >= fraction * total) return k + 1;
  }
  return usable;
}

Matrix pod(const Matrix& X, Index k) {
  return truncated_svd(X, k, SvdVectors::LeftOnly).U;
}

namespace {

/// Scatter canonical-ordered rows back to the original ordering.
Matrix from_canonical(const Matrix& Vc, const StateLayout& layout) {
  const auto perm = layout.canonical_permutation();
  Matrix V(Vc.rows(), Vc.cols());
  for (Index i = 0; i < Vc.rows(); ++i) V.row(perm[i]) = Vc.row(i);
  return V;
}

Matrix blkdiag(const std::vector<const Matrix*>& blocks) {
  Index rows = 0, cols = 0;
  for (const Matrix* b : blocks) {
    rows += b->rows();
    cols += b->cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Index r = 0, c = 0;
  for (const Matrix* b : blocks) {
    out.block(r, c, b->rows(), b->cols()) = *b;
    r += b->rows();
    c += b->cols();
  }
  return out;
}

/// [[Φ, −Ψ], [Ψ, Φ]] from the complex left singular vectors of X_q + i·X_v.
Matrix complex_svd_psd(const Matrix& Xq, const Matrix& Xv, Index k) {
  ComplexMatrix Z(Xq.rows(), Xq.cols());
  Z.real() = Xq;
  Z.imag() = Xv;
  const ComplexMatrix U = truncated_svd(Z, k, SvdVectors::LeftOnly).U;
  const Matrix Phi = U.real();
  const Matrix Psi = U.imag();
  const Index n = Xq.rows();
  Matrix V(2 * n, 2 * k);
  V << Phi, -Psi, Psi, Phi;
  return V;
}

void require_even(Index dimension, const char* what) {
  if (dimension < 2 || dimension % 2 != 0) {
    std::ostringstream msg;
    msg << what << ": dimension " << dimension << " must be even and >= 2";
    throw NumericalError(msg.str());
  }
}

Matrix fixed_solid_poisson(Index n_s, Index k) {
  const Matrix Js = poisson_matrix(n_s);
  const Matrix Je = poisson_matrix(k);
  return blkdiag({&Js, &Je});
}

}  // namespace

ReducedBasis global_pod(const SnapshotSet& S, Index k) {
  ReducedBasis b;
  b.V = pod(S.X, k);
  b.tag = std::string(to_string(ForwardMethod::GlobalPod));
  b.blocks = {{"x", k}};
  return b;
}

ReducedBasis componentwise_pod(const SnapshotSet& S, Index k_q, Index k_v) {
  const Matrix Vq = pod(S.displacement(), k_q);
  const Matrix Vv = pod(S.velocity(), k_v);
  ReducedBasis b;
  b.V = from_canonical(blkdiag({&Vq, &Vv}), S.layout);
  b.tag = std::string(to_string(ForwardMethod::ComponentwisePod));
  b.blocks = {{"q_s,q_e", k_q}, {"v_s,v_e", k_v}};
  return b;
}

ReducedBasis pod_fixed_solid(const SnapshotSet& S, Index k_e) {
  const Matrix I = Matrix::Identity(S.layout.solid_size(), S.layout.solid_size());
  const Matrix Ve = pod(S.elastic(), k_e);
  ReducedBasis b;
  b.V = blkdiag({&I, &Ve});
  b.tag = std::string(to_string(ForwardMethod::PodFixedSolid));
  b.blocks = {{"q_s,v_s", I.cols()}, {"q_e,v_e", k_e}};
  b.solid_identity = I.cols();
  return b;
}

ReducedBasis componentwise_pod_fixed_solid(const SnapshotSet& S, Index k_eq,
                                           Index k_ev) {
  const Matrix I = Matrix::Identity(S.layout.solid_size(), S.layout.solid_size());
  const Matrix Vq = pod(S.elastic_displacement(), k_eq);
  const Matrix Vv = pod(S.elastic_velocity(), k_ev);
  ReducedBasis b;
  b.V = blkdiag({&I, &Vq, &Vv});
  b.tag = std::string(to_string(ForwardMethod::ComponentwisePodFixedSolid));
  b.blocks = {{"q_s,v_s", I.cols()}, {"q_e", k_eq}, {"v_e", k_ev}};
  b.solid_identity = I.cols();
  return b;
}

ReducedBasis gpsd(const SnapshotSet& S, Index dimension) {
  require_even(dimension, "gpsd");
  const Index k = dimension / 2;
  ReducedBasis b;
  b.V = from_canonical(complex_svd_psd(S.displacement(), S.velocity(), k),
                       S.layout);
  b.tag = std::string(to_string(ForwardMethod::Gpsd));
  b.blocks = {{"q,v (symplectic pairs)", dimension}};
  b.reduced_poisson = poisson_matrix(k);
  return b;
}

ReducedBasis psd_fixed_solid(const SnapshotSet& S, Index elastic_dimension) {
  require_even(elastic_dimension, "psd_fixed_solid");
  const Index k = elastic_dimension / 2;
  const Matrix I = Matrix::Identity(S.layout.solid_size(), S.layout.solid_size());
  const Matrix Ve =
      complex_svd_psd(S.elastic_displacement(), S.elastic_velocity(), k);
  ReducedBasis b;
  b.V = blkdiag({&I, &Ve});
  b.tag = std::string(to_string(ForwardMethod::PsdFixedSolid));
  b.blocks = {{"q_s,v_s", I.cols()}, {"q_e,v_e (symplectic pairs)", elastic_dimension}};
  b.solid_identity = I.cols();
  b.reduced_poisson = fixed_solid_poisson(S.layout.n_s, k);
  return b;
}

ReducedBasis build_forward_basis(ForwardMethod method, const SnapshotSet& S,
                                 Index dimension) {
  const Index solid = S.layout.solid_size();
  auto elastic_part = [&](Index min_extra) {
    const Index rest = dimension - solid;
    if (rest < min_extra) {
      std::ostringstream msg;
      msg << to_string(method) << ": dimension " << dimension
          << " leaves no room beyond the " << solid << " fixed solid modes";
      throw NumericalError(msg.str());
    }
    return rest;
  };
  switch (method) {
    case ForwardMethod::GlobalPod:
      return global_pod(S, dimension);
    case ForwardMethod::ComponentwisePod: {
      if (dimension < 2) throw NumericalError("cw-pod: dimension must be >= 2");
      const Index kq = (dimension + 1) / 2;
      return componentwise_pod(S, kq, dimension - kq);
    }
    case ForwardMethod::PodFixedSolid:
      return pod_fixed_solid(S, elastic_part(1));
    case ForwardMethod::ComponentwisePodFixedSolid: {
      const Index rest = elastic_part(2);
      const Index kq = (rest + 1) / 2;
      return componentwise_pod_fixed_solid(S, kq, rest - kq);
    }
    case ForwardMethod::Gpsd:
      return gpsd(S, dimension);
    case ForwardMethod::PsdFixedSolid:
      return psd_fixed_solid(S, elastic_part(2));
  }
  throw NumericalError("build_forward_basis: unknown method");
}

namespace {

Index energy_rank(const Matrix& X, double fraction) {
  return pod_energy_rank(singular_values(X), fraction);
}

Index complex_energy_rank(const Matrix& Xq, const Matrix& Xv, double fraction) {
  ComplexMatrix Z(Xq.rows(), Xq.cols());
  Z.real() = Xq;
  Z.imag() = Xv;
  return pod_energy_rank(singular_values(Z), fraction);
}

}  // namespace

ReducedBasis build_forward_basis_by_energy(ForwardMethod method,
                                           const SnapshotSet& S,
                                           double fraction) {
  switch (method) {
    case ForwardMethod::GlobalPod:
      return global_pod(S, energy_rank(S.X, fraction));
    case ForwardMethod::ComponentwisePod:
      return componentwise_pod(S, energy_rank(S.displacement(), fraction),
                               energy_rank(S.velocity(), fraction));
    case ForwardMethod::PodFixedSolid:
      return pod_fixed_solid(S, energy_rank(S.elastic(), fraction));
    case ForwardMethod::ComponentwisePodFixedSolid:
      return componentwise_pod_fixed_solid(
          S, energy_rank(S.elastic_displacement(), fraction),
          energy_rank(S.elastic_velocity(), fraction));
    case ForwardMethod::Gpsd:
      return gpsd(S, 2 * complex_energy_rank(S.displacement(), S.velocity(),
                                             fraction));
    case ForwardMethod::PsdFixedSolid:
      return psd_fixed_solid(
          S, 2 * complex_energy_rank(S.elastic_displacement(),
                                     S.elastic_velocity(), fraction));
  }
  throw NumericalError("build_forward_basis_by_energy: unknown method");
}

double orthonormality_residual(const Matrix& V) {
  return (V.transpose() * V - Matrix::Identity(V.cols(), V.cols())).norm();
}

double symplecticity_residual(const ReducedBasis& basis,
                              const StateLayout& layout) {
  if (basis.reduced_poisson.size() == 0) {
    throw NumericalError("symplecticity_residual: basis '" + basis.tag +
                         "' is not symplectic");
  }
  const Matrix J = poisson_matrix(layout);
  return (basis.V.transpose() * J * basis.V - basis.reduced_poisson).norm();
}

ReducedForwardModel galerkin_project(const FirstOrderSystem& sys,
                                     const Matrix& V) {
  if (V.rows() != sys.size()) throw NumericalError("galerkin_project: basis row count mismatch");
  ReducedForwardModel rom;
  const Matrix Vt = V.transpose();
  rom.E = Vt * sys.E * V;
  rom.A = Vt * sys.A * V;
  rom.B = Vt * sys.B;
  rom.C = sys.C * V;
  rom.F = Vt * sys.F;
  rom.x0 = Vt * sys.x0;
  Eigen::PartialPivLU<Matrix> lu(rom.E);
  if (!(lu.rcond() > 1e-14)) {
    std::ostringstream msg;
    msg << "galerkin_project: reduced E is singular (rcond " << lu.rcond() << ")";
    throw NumericalError(msg.str());
  }
  return rom;
}

Trajectory simulate_reduced(const ReducedForwardModel& rom,
                            const InputFunction& input, const TimeGrid& grid) {
  LoadFunction load;
  if (rom.F.squaredNorm() > 0) load = [F = rom.F](double) { return F; };
  return implicit_midpoint(rom.E, rom.A, rom.B, rom.x0, input, load, grid);
}

Reconstruction reconstruct_and_error(const Matrix& V, const Matrix& X_r,
                                     const Matrix& X) {
  if (V.cols() != X_r.rows() || V.rows() != X.rows() || X_r.cols() != X.cols()) {
    throw NumericalError("reconstruct_and_error: dimension mismatch");
  }
  Reconstruction out;
  out.X_hat = V * X_r;
  out.error = relative_error(X, out.X_hat);
  return out;
}

double projection_error(const Matrix& V, const Matrix& X) {
  return (X - V * (V.transpose() * X)).norm();
}

}  // namespace softrb
