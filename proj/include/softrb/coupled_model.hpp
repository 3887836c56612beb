#ifndef SOFTRB_COUPLED_MODEL_HPP
#define SOFTRB_COUPLED_MODEL_HPP

///
/// \file coupled_model.hpp
///
/// One-way coupled rigid hand / elastic tissue model. The hand carries two
/// translational unknowns q_s; every Dirichlet node of the tissue follows
/// the hand rigidly, so the tissue sees the hand through M_es and K_es while
/// the hand never sees the tissue.
///
/// First-order state ordering is x = [q_s, v_s, q_e, v_e].
///

#include <functional>
#include <vector>

#include "softrb/fem.hpp"
#include "softrb/numerics.hpp"

namespace softrb {

struct SolidParams {
  double mass = 100.0;
  /// n_s × m actuation map; identity (2 × 2) when empty.
  Matrix actuation;
};

/// Rayleigh damping αM + βK of the elastic body.
struct Damping {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Index bookkeeping for x = [q_s, v_s, q_e, v_e].
struct StateLayout {
  Index n_s = 0;
  Index n_e = 0;

  Index n() const { return n_s + n_e; }
  Index size() const { return 2 * n(); }
  Index q_s() const { return 0; }
  Index v_s() const { return n_s; }
  Index q_e() const { return 2 * n_s; }
  Index v_e() const { return 2 * n_s + n_e; }
  Index solid_size() const { return 2 * n_s; }
  Index elastic_size() const { return 2 * n_e; }

  /// perm[i] = original index of canonical coordinate i, canonical order
  /// being (q_s, q_e, v_s, v_e) = (all displacements, all velocities).
  std::vector<Index> canonical_permutation() const;
  /// Index lists of all displacement / all velocity entries, in order.
  std::vector<Index> displacement_indices() const;
  std::vector<Index> velocity_indices() const;
};

struct CoupledSecondOrder {
  Matrix M_ss, M_es, M_ee;
  Matrix K_es, K_ee;
  Matrix D_es, D_ee;
  Matrix B_us;
  Vector f_s, f_e;
  /// Rigid lifting of q_s onto the Dirichlet unknowns.
  Matrix lifting;
  fem::DofMap dofs;

  Index n_s() const { return M_ss.rows(); }
  Index n_e() const { return M_ee.rows(); }
  Index n() const { return n_s() + n_e(); }
  Index inputs() const { return B_us.cols(); }
};

struct FirstOrderSystem {
  Matrix E, A, B, C;
  /// Constant load [0; f_s; 0; f_e].
  Vector F;
  Vector x0;
  StateLayout layout;

  Index size() const { return E.rows(); }
  Index inputs() const { return B.cols(); }
  Index outputs() const { return C.rows(); }
};

/// Stacked 2 × 2 identities, one per Dirichlet node.
Matrix rigid_lifting(Index dirichlet_nodes);

/// `load` is a full-length nodal load (e.g. fem::body_force); empty means none.
CoupledSecondOrder build_coupled(const fem::Assembly& fem,
                                 const SolidParams& solid,
                                 const Damping& damping = {},
                                 const Vector& load = {});

/// Throws when the observation node is a Dirichlet node.
FirstOrderSystem to_first_order(const CoupledSecondOrder& c,
                                Index observation_node);

struct Equilibrium {
  Vector state;
  Vector input;
};

/// Static target state for a solid displacement and the input holding it.
Equilibrium equilibrium_for_target(const CoupledSecondOrder& c,
                                   const Vector& target_solid);

/// ‖A x̄ + B ū + F‖ / (‖A‖_F‖x̄‖ + ‖B‖_F‖ū‖ + ‖F‖), 0 for the trivial case.
double equilibrium_residual(const FirstOrderSystem& sys, const Equilibrium& eq);

using InputFunction = std::function<Vector(double)>;

/// Inverse-dynamics input realizing a quintic (minimum-jerk) solid motion
/// from rest at 0 to rest at `target` over [0, T].
InputFunction quintic_solid_input(const CoupledSecondOrder& c,
                                  const Vector& target, double T);

/// Elastic block with the hand frozen at 0: E = blkdiag(I, M_ee),
/// A = [[0, I], [−K_ee, −D_ee]] on (q_e, v_e).
FirstOrderSystem frozen_solid_system(const CoupledSecondOrder& c);

}  // namespace softrb

#endif  // SOFTRB_COUPLED_MODEL_HPP
