#ifndef SOFTRB_MOR_FORWARD_HPP
#define SOFTRB_MOR_FORWARD_HPP

///
/// \file mor_forward.hpp
///
/// Snapshot-based reduced bases for the forward problem and Galerkin
/// reduced models.
///
/// Every basis is stored in the original state ordering [q_s, v_s, q_e, v_e];
/// methods that work on (all q, all v) blocks scatter their rows back through
/// StateLayout::canonical_permutation, so projections never see permuted
/// coordinates.
///

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "softrb/coupled_model.hpp"
#include "softrb/numerics.hpp"
#include "softrb/timeint.hpp"

namespace softrb {

enum class ForwardMethod {
  GlobalPod,
  ComponentwisePod,
  PodFixedSolid,
  ComponentwisePodFixedSolid,
  Gpsd,
  PsdFixedSolid,
};

inline constexpr ForwardMethod kAllForwardMethods[] = {
    ForwardMethod::GlobalPod,     ForwardMethod::ComponentwisePod,
    ForwardMethod::PodFixedSolid, ForwardMethod::ComponentwisePodFixedSolid,
    ForwardMethod::Gpsd,          ForwardMethod::PsdFixedSolid,
};

std::string_view to_string(ForwardMethod method);
ForwardMethod parse_forward_method(std::string_view tag);
bool is_symplectic(ForwardMethod method);
bool has_fixed_solid(ForwardMethod method);

struct SnapshotSet {
  Matrix X;
  StateLayout layout;

  Index count() const { return X.cols(); }
  Matrix rows(const std::vector<Index>& idx) const { return X(idx, Eigen::all); }
  Matrix displacement() const { return rows(layout.displacement_indices()); }
  Matrix velocity() const { return rows(layout.velocity_indices()); }
  Matrix solid() const { return X.topRows(layout.solid_size()); }
  Matrix elastic() const { return X.bottomRows(layout.elastic_size()); }
  Matrix elastic_displacement() const {
    return X.middleRows(layout.q_e(), layout.n_e);
  }
  Matrix elastic_velocity() const {
    return X.middleRows(layout.v_e(), layout.n_e);
  }
};

/// Snapshots x_1 … x_{n_t} of a trajectory (the initial state is dropped).
SnapshotSet snapshots_from(const Trajectory& traj, const StateLayout& layout);

struct BasisBlock {
  std::string rows;  // e.g. "q_s,v_s", "q_e", "q,v"
  Index columns = 0;
};

struct ReducedBasis {
  Matrix V;
  std::string tag;
  std::vector<BasisBlock> blocks;
  /// Size of the leading identity block (0 when the solid is reduced).
  Index solid_identity = 0;
  /// Reduced Poisson matrix VᵀJV should equal; empty for non-symplectic bases.
  Matrix reduced_poisson;

  Index dimension() const { return V.cols(); }
};

/// Canonical Poisson matrix [[0, I], [−I, 0]] of size 2k.
Matrix poisson_matrix(Index k);

/// Poisson matrix expressed in the original [q_s, v_s, q_e, v_e] ordering.
Matrix poisson_matrix(const StateLayout& layout);

/// Smallest k whose leading squared singular values reach `fraction` of the
/// total energy. Throws on an all-zero spectrum or a fraction outside (0, 1].
Index pod_energy_rank(const Vector& sigma, double fraction);

/// First k left singular vectors.
Matrix pod(const Matrix& X, Index k);

ReducedBasis global_pod(const SnapshotSet& S, Index k);
ReducedBasis componentwise_pod(const SnapshotSet& S, Index k_q, Index k_v);
ReducedBasis pod_fixed_solid(const SnapshotSet& S, Index k_e);
ReducedBasis componentwise_pod_fixed_solid(const SnapshotSet& S, Index k_eq,
                                           Index k_ev);
/// Orthosymplectic basis of even dimension from the complex SVD of
/// X_q + i·X_v.
ReducedBasis gpsd(const SnapshotSet& S, Index dimension);
/// gpsd on the elastic rows, identity on the solid rows; `elastic_dimension`
/// must be even.
ReducedBasis psd_fixed_solid(const SnapshotSet& S, Index elastic_dimension);

/// Builds `method` with total dimension N_V, splitting it across blocks
/// (componentwise splits round the displacement block up).
ReducedBasis build_forward_basis(ForwardMethod method, const SnapshotSet& S,
                                 Index dimension);

/// Builds `method` with every block sized by the energy rule.
ReducedBasis build_forward_basis_by_energy(ForwardMethod method,
                                           const SnapshotSet& S,
                                           double fraction);

double orthonormality_residual(const Matrix& V);
/// ‖VᵀJV − J_N‖_F; throws for non-symplectic bases.
double symplecticity_residual(const ReducedBasis& basis,
                              const StateLayout& layout);

struct ReducedForwardModel {
  Matrix E, A, B, C;
  Vector F;
  Vector x0;
};

/// Throws when VᵀEV is singular to working precision.
ReducedForwardModel galerkin_project(const FirstOrderSystem& sys,
                                     const Matrix& V);

Trajectory simulate_reduced(const ReducedForwardModel& rom,
                            const InputFunction& input, const TimeGrid& grid);

struct Reconstruction {
  Matrix X_hat;
  double error = 0.0;
};

/// X̂ = V·X_r and ‖X − X̂‖_F / ‖X‖_F.
Reconstruction reconstruct_and_error(const Matrix& V, const Matrix& X_r,
                                     const Matrix& X);

/// ‖X − VVᵀX‖_F (the best approximation error in span V).
double projection_error(const Matrix& V, const Matrix& X);

}  // namespace softrb

#endif  // SOFTRB_MOR_FORWARD_HPP
