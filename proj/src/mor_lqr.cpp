#include "softrb/mor_lqr.hpp"

#include <sstream>

namespace softrb {

std::string_view to_string(RbAreMethod method) {
  switch (method) {
    case RbAreMethod::PodOfP: return "pod-of-P";
    case RbAreMethod::WeightedPod: return "weighted-pod";
    case RbAreMethod::PodFixedSolidP: return "pod-fixed-solid-P";
    case RbAreMethod::ComponentwisePodP: return "cw-pod-P";
    case RbAreMethod::PodDecomposedP: return "pod-decomposed-P";
  }
  return "unknown";
}

RbAreMethod parse_rb_are_method(std::string_view tag) {
  for (RbAreMethod m : kAllRbAreMethods) {
    if (to_string(m) == tag) return m;
  }
  throw NumericalError("unknown RB-ARE method '" + std::string(tag) + "'");
}

namespace {

void require_square(const Matrix& P, Index n, const char* what) {
  if (P.rows() != n || P.cols() != n) {
    throw NumericalError(std::string(what) + ": P has the wrong size");
  }
}

RbAreBasis with_identity(const StateLayout& layout,
                         const std::vector<const Matrix*>& elastic_blocks) {
  const Index s = layout.solid_size();
  Index cols = s;
  for (const Matrix* b : elastic_blocks) cols += b->cols();
  RbAreBasis out;
  out.V = Matrix::Zero(layout.size(), cols);
  out.V.topLeftCorner(s, s).setIdentity();
  Index r = s, c = s;
  for (const Matrix* b : elastic_blocks) {
    out.V.block(r, c, b->rows(), b->cols()) = *b;
    r += b->rows();
    c += b->cols();
  }
  out.solid_identity = s;
  return out;
}

}  // namespace

RbAreBasis pod_of_P(const Matrix& P, Index k) {
  RbAreBasis out;
  out.V = pod(P, k);
  out.tag = std::string(to_string(RbAreMethod::PodOfP));
  out.blocks = {{"x", k}};
  return out;
}

RbAreBasis weighted_pod_of_P(const Matrix& P, const Matrix& E, Index k) {
  require_square(P, E.rows(), "weighted_pod_of_P");
  const Matrix W = 0.5 * (E + E.transpose());
  const auto roots = spd_sqrt_and_inv_sqrt(W);
  RbAreBasis out;
  out.V = roots.inv_sqrt * pod(roots.sqrt * P, k);
  out.tag = std::string(to_string(RbAreMethod::WeightedPod));
  out.blocks = {{"x (W-orthonormal)", k}};
  out.weight = W;
  return out;
}

RbAreBasis pod_fixed_solid_P(const Matrix& P, const StateLayout& layout,
                             Index k) {
  require_square(P, layout.size(), "pod_fixed_solid_P");
  // [P_es, P_ee] is the full elastic row block.
  const Matrix Ve = pod(P.bottomRows(layout.elastic_size()), k);
  RbAreBasis out = with_identity(layout, {&Ve});
  out.tag = std::string(to_string(RbAreMethod::PodFixedSolidP));
  out.blocks = {{"q_s,v_s", layout.solid_size()}, {"q_e,v_e", k}};
  return out;
}

RbAreBasis componentwise_pod_P(const Matrix& P, const StateLayout& layout,
                               Index k_q, Index k_v) {
  require_square(P, layout.size(), "componentwise_pod_P");
  const Index ns = layout.n_s, ne = layout.n_e;
  auto concat = [&](Index row) {
    Matrix M(ne, ns + 2 * ne);
    M << P.block(row, layout.q_s(), ne, ns), P.block(row, layout.q_e(), ne, ne),
        P.block(row, layout.v_e(), ne, ne);
    return M;
  };
  const Matrix Vq = pod(concat(layout.q_e()), k_q);
  const Matrix Vv = pod(concat(layout.v_e()), k_v);
  RbAreBasis out = with_identity(layout, {&Vq, &Vv});
  out.tag = std::string(to_string(RbAreMethod::ComponentwisePodP));
  out.blocks = {{"q_s,v_s", layout.solid_size()}, {"q_e", k_q}, {"v_e", k_v}};
  return out;
}

RbAreBasis pod_decomposed_P(const Matrix& P, const StateLayout& layout,
                            Index k) {
  require_square(P, layout.size(), "pod_decomposed_P");
  const Index ne = layout.n_e;
  const Index q = layout.q_e(), v = layout.v_e();
  Matrix M(ne, 4 * ne);
  M << P.block(q, q, ne, ne), P.block(q, v, ne, ne), P.block(v, q, ne, ne),
      P.block(v, v, ne, ne);
  const Matrix V1 = pod(M, k);
  RbAreBasis out = with_identity(layout, {&V1, &V1});
  out.tag = std::string(to_string(RbAreMethod::PodDecomposedP));
  out.blocks = {{"q_s,v_s", layout.solid_size()}, {"q_e", k}, {"v_e", k}};
  return out;
}

RbAreBasis build_rb_are_basis(RbAreMethod method, const Matrix& P,
                              const FirstOrderSystem& sys, Index dimension) {
  const Index s = sys.layout.solid_size();
  auto elastic_part = [&](Index min_extra) {
    const Index rest = dimension - s;
    if (rest < min_extra) {
      std::ostringstream msg;
      msg << to_string(method) << ": dimension " << dimension
          << " leaves no room beyond the " << s << " fixed solid modes";
      throw NumericalError(msg.str());
    }
    return rest;
  };
  switch (method) {
    case RbAreMethod::PodOfP:
      return pod_of_P(P, dimension);
    case RbAreMethod::WeightedPod:
      return weighted_pod_of_P(P, sys.E, dimension);
    case RbAreMethod::PodFixedSolidP:
      return pod_fixed_solid_P(P, sys.layout, elastic_part(1));
    case RbAreMethod::ComponentwisePodP: {
      const Index rest = elastic_part(2);
      const Index kq = (rest + 1) / 2;
      return componentwise_pod_P(P, sys.layout, kq, rest - kq);
    }
    case RbAreMethod::PodDecomposedP: {
      const Index rest = elastic_part(2);
      if (rest % 2 != 0) {
        std::ostringstream msg;
        msg << "pod-decomposed-P: dimension " << dimension
            << " must exceed the solid block by an even number";
        throw NumericalError(msg.str());
      }
      return pod_decomposed_P(P, sys.layout, rest / 2);
    }
  }
  throw NumericalError("build_rb_are_basis: unknown method");
}

ReducedAre solve_reduced_are(const FirstOrderSystem& sys, const CostWeights& w,
                             const Matrix& V) {
  if (V.rows() != sys.size()) throw NumericalError("solve_reduced_are: basis row count mismatch");
  ReducedAre out;
  const Matrix Vt = V.transpose();
  out.E_N = Vt * sys.E * V;
  out.A_N = Vt * sys.A * V;
  out.B_N = Vt * sys.B;
  out.C_N = sys.C * V;
  GareOptions options;
  options.low_rank_tolerance = -1.0;
  out.reduced = solve_gare_dense(out.E_N, out.A_N, out.B_N, out.C_N, w, options);
  out.P_hat = V * out.reduced.P * Vt;
  out.P_hat = (0.5 * (out.P_hat + out.P_hat.transpose())).eval();
  out.gain = feedback_gain(sys.E, sys.B, w.R, out.P_hat);
  return out;
}

double rb_are_error(const Matrix& P, const Matrix& P_hat) {
  return relative_error(P, P_hat);
}

}  // namespace softrb
