#include "softrb/coupled_model.hpp"

#include <sstream>

namespace softrb {

std::vector<Index> StateLayout::canonical_permutation() const {
  std::vector<Index> perm = displacement_indices();
  const std::vector<Index> v = velocity_indices();
  perm.insert(perm.end(), v.begin(), v.end());
  return perm;
}

std::vector<Index> StateLayout::displacement_indices() const {
  std::vector<Index> idx;
  idx.reserve(n());
  for (Index i = 0; i < n_s; ++i) idx.push_back(q_s() + i);
  for (Index i = 0; i < n_e; ++i) idx.push_back(q_e() + i);
  return idx;
}

std::vector<Index> StateLayout::velocity_indices() const {
  std::vector<Index> idx;
  idx.reserve(n());
  for (Index i = 0; i < n_s; ++i) idx.push_back(v_s() + i);
  for (Index i = 0; i < n_e; ++i) idx.push_back(v_e() + i);
  return idx;
}

Matrix rigid_lifting(Index dirichlet_nodes) {
  Matrix L(2 * dirichlet_nodes, 2);
  for (Index k = 0; k < dirichlet_nodes; ++k) {
    L.block<2, 2>(2 * k, 0).setIdentity();
  }
  return L;
}

CoupledSecondOrder build_coupled(const fem::Assembly& fem,
                                 const SolidParams& solid,
                                 const Damping& damping, const Vector& load) {
  const auto& free = fem.dofs.free;
  const auto& bnd = fem.dofs.dirichlet;
  if (bnd.empty()) {
    throw NumericalError("build_coupled: empty Dirichlet set, coupling undefined");
  }
  if (!(solid.mass > 0)) throw NumericalError("build_coupled: solid mass must be positive");
  if (damping.alpha < 0 || damping.beta < 0) {
    throw NumericalError("build_coupled: damping coefficients must be >= 0");
  }
  const Index n_s = 2;
  const Matrix B_us =
      solid.actuation.size() == 0 ? Matrix::Identity(n_s, n_s) : solid.actuation;
  if (B_us.rows() != n_s) throw NumericalError("build_coupled: actuation must have 2 rows");

  const Index n_e = static_cast<Index>(free.size());
  const Index n_b = static_cast<Index>(bnd.size());
  CoupledSecondOrder c;
  c.dofs = fem.dofs;
  c.lifting = rigid_lifting(n_b / 2);
  c.M_ss = solid.mass * Matrix::Identity(n_s, n_s);
  c.B_us = B_us;
  c.M_ee = fem.M(free, free);
  c.K_ee = fem.K(free, free);
  c.M_es = Matrix(fem.M(free, bnd)) * c.lifting;
  c.K_es = Matrix(fem.K(free, bnd)) * c.lifting;
  c.D_ee = damping.alpha * c.M_ee + damping.beta * c.K_ee;
  c.D_es = damping.alpha * c.M_es + damping.beta * c.K_es;
  c.f_s = Vector::Zero(n_s);
  if (load.size() == 0) {
    c.f_e = Vector::Zero(n_e);
  } else {
    if (load.size() != fem.K.rows()) throw NumericalError("build_coupled: load size mismatch");
    c.f_e = load(free);
  }
  return c;
}

FirstOrderSystem to_first_order(const CoupledSecondOrder& c,
                                Index observation_node) {
  const Index n_s = c.n_s();
  const Index n_e = c.n_e();
  const Index m = c.inputs();
  if (observation_node < 0 ||
      2 * observation_node + 1 >= static_cast<Index>(c.dofs.free_position.size())) {
    throw NumericalError("to_first_order: observation node out of range");
  }
  const Index px = c.dofs.free_position[2 * observation_node];
  const Index py = c.dofs.free_position[2 * observation_node + 1];
  if (px < 0 || py < 0) {
    std::ostringstream msg;
    msg << "to_first_order: observation node " << observation_node
        << " is a Dirichlet node";
    throw NumericalError(msg.str());
  }

  FirstOrderSystem sys;
  sys.layout = StateLayout{n_s, n_e};
  const StateLayout& L = sys.layout;
  const Index N = L.size();
  sys.E = Matrix::Zero(N, N);
  sys.A = Matrix::Zero(N, N);
  sys.B = Matrix::Zero(N, m);
  sys.C = Matrix::Zero(2, N);
  sys.F = Vector::Zero(N);
  sys.x0 = Vector::Zero(N);

  sys.E.block(L.q_s(), L.q_s(), n_s, n_s).setIdentity();
  sys.E.block(L.v_s(), L.v_s(), n_s, n_s) = c.M_ss;
  sys.E.block(L.q_e(), L.q_e(), n_e, n_e).setIdentity();
  sys.E.block(L.v_e(), L.v_s(), n_e, n_s) = c.M_es;
  sys.E.block(L.v_e(), L.v_e(), n_e, n_e) = c.M_ee;

  sys.A.block(L.q_s(), L.v_s(), n_s, n_s).setIdentity();
  sys.A.block(L.q_e(), L.v_e(), n_e, n_e).setIdentity();
  sys.A.block(L.v_e(), L.q_s(), n_e, n_s) = -c.K_es;
  sys.A.block(L.v_e(), L.v_s(), n_e, n_s) = -c.D_es;
  sys.A.block(L.v_e(), L.q_e(), n_e, n_e) = -c.K_ee;
  sys.A.block(L.v_e(), L.v_e(), n_e, n_e) = -c.D_ee;

  sys.B.block(L.v_s(), 0, n_s, m) = c.B_us;
  sys.F.segment(L.v_s(), n_s) = c.f_s;
  sys.F.segment(L.v_e(), n_e) = c.f_e;

  sys.C(0, L.q_e() + px) = 1.0;
  sys.C(1, L.q_e() + py) = 1.0;
  return sys;
}

Equilibrium equilibrium_for_target(const CoupledSecondOrder& c,
                                   const Vector& target_solid) {
  const Index n_s = c.n_s();
  const Index n_e = c.n_e();
  if (target_solid.size() != n_s) throw NumericalError("equilibrium_for_target: target size mismatch");

  Eigen::LLT<Matrix> kee(c.K_ee);
  if (kee.info() != Eigen::Success) {
    throw NumericalError("equilibrium_for_target: K_ee is not positive definite");
  }
  const Vector q_e = kee.solve(c.f_e - c.K_es * target_solid);

  Eigen::CompleteOrthogonalDecomposition<Matrix> bus(c.B_us);
  const Vector u = bus.solve(-c.f_s);
  if ((c.B_us * u + c.f_s).norm() > 1e-9 * std::max(1.0, c.f_s.norm())) {
    throw NumericalError("equilibrium_for_target: f_s is not in the range of B_us");
  }

  Equilibrium eq;
  eq.state = Vector::Zero(2 * (n_s + n_e));
  eq.state.segment(0, n_s) = target_solid;
  eq.state.segment(2 * n_s, n_e) = q_e;
  eq.input = u;
  return eq;
}

double equilibrium_residual(const FirstOrderSystem& sys, const Equilibrium& eq) {
  const double scale = sys.A.norm() * eq.state.norm() +
                       sys.B.norm() * eq.input.norm() + sys.F.norm();
  const double r = (sys.A * eq.state + sys.B * eq.input + sys.F).norm();
  return scale == 0.0 ? r : r / scale;
}

InputFunction quintic_solid_input(const CoupledSecondOrder& c,
                                  const Vector& target, double T) {
  if (target.size() != c.n_s()) throw NumericalError("quintic_solid_input: target size mismatch");
  if (!(T > 0)) throw NumericalError("quintic_solid_input: T must be positive");
  Eigen::CompleteOrthogonalDecomposition<Matrix> bus(c.B_us);
  const Matrix M_ss = c.M_ss;
  const Vector f_s = c.f_s;
  return [bus, M_ss, f_s, target, T](double t) -> Vector {
    Vector accel = Vector::Zero(target.size());
    if (t > 0 && t < T) {
      const double s = t / T;
      accel = target * ((60 * s - 180 * s * s + 120 * s * s * s) / (T * T));
    }
    return bus.solve(Vector(M_ss * accel - f_s));
  };
}

FirstOrderSystem frozen_solid_system(const CoupledSecondOrder& c) {
  const Index n_e = c.n_e();
  FirstOrderSystem sys;
  sys.layout = StateLayout{0, n_e};
  sys.E = Matrix::Zero(2 * n_e, 2 * n_e);
  sys.A = Matrix::Zero(2 * n_e, 2 * n_e);
  sys.E.topLeftCorner(n_e, n_e).setIdentity();
  sys.E.bottomRightCorner(n_e, n_e) = c.M_ee;
  sys.A.topRightCorner(n_e, n_e).setIdentity();
  sys.A.bottomLeftCorner(n_e, n_e) = -c.K_ee;
  sys.A.bottomRightCorner(n_e, n_e) = -c.D_ee;
  sys.B = Matrix::Zero(2 * n_e, 0);
  sys.C = Matrix::Zero(0, 2 * n_e);
  sys.F = Vector::Zero(2 * n_e);
  sys.x0 = Vector::Zero(2 * n_e);
  return sys;
}

}  // namespace softrb
