#ifndef SOFTRB_MOR_LQR_HPP
#define SOFTRB_MOR_LQR_HPP

///
/// \file mor_lqr.hpp
///
/// Reduced bases built from the Riccati solution P and the Galerkin-reduced
/// Riccati equation
///
///   E_NᵀP_N A_N + A_NᵀP_N E_N − E_NᵀP_N B_N R⁻¹B_NᵀP_N E_N + C_NᵀQC_N = 0
///
/// with E_N = VᵀEV, A_N = VᵀAV, B_N = VᵀB, C_N = CV and P̂ = V P_N Vᵀ.
///
/// Block names follow the state ordering [q_s, v_s, q_e, v_e]: "s" rows are
/// (q_s, v_s), "e" rows are (q_e, v_e), and the index pairs 1/2 denote the
/// displacement/velocity halves of a block.
///

#include <string>
#include <string_view>
#include <vector>

#include "softrb/lqr.hpp"
#include "softrb/mor_forward.hpp"

namespace softrb {

enum class RbAreMethod {
  PodOfP,
  WeightedPod,
  PodFixedSolidP,
  ComponentwisePodP,
  PodDecomposedP,
};

inline constexpr RbAreMethod kAllRbAreMethods[] = {
    RbAreMethod::PodOfP, RbAreMethod::WeightedPod, RbAreMethod::PodFixedSolidP,
    RbAreMethod::ComponentwisePodP, RbAreMethod::PodDecomposedP,
};

std::string_view to_string(RbAreMethod method);
RbAreMethod parse_rb_are_method(std::string_view tag);

struct RbAreBasis {
  Matrix V;
  std::string tag;
  std::vector<BasisBlock> blocks;
  Index solid_identity = 0;
  /// Inner-product weight W with VᵀWV = I; empty means the Euclidean one.
  Matrix weight;

  Index dimension() const { return V.cols(); }
};

RbAreBasis pod_of_P(const Matrix& P, Index k);

/// V = W^{-1/2}·POD_k(W^{1/2}P) with W = (E + Eᵀ)/2; throws if W is not SPD.
RbAreBasis weighted_pod_of_P(const Matrix& P, const Matrix& E, Index k);

/// V = blkdiag(I, POD_k([P_es, P_ee])).
RbAreBasis pod_fixed_solid_P(const Matrix& P, const StateLayout& layout,
                             Index k);

/// V = blkdiag(I, POD_{k_q}([P_es11, P_ee11, P_ee12]),
///                POD_{k_v}([P_es21, P_ee21, P_ee22])).
RbAreBasis componentwise_pod_P(const Matrix& P, const StateLayout& layout,
                               Index k_q, Index k_v);

/// V = blkdiag(I, V₁, V₁), V₁ = POD_k([P_ee11, P_ee12, P_ee21, P_ee22]).
RbAreBasis pod_decomposed_P(const Matrix& P, const StateLayout& layout,
                            Index k);

/// Builds `method` with total dimension N (fixed-solid methods spend 2n_s of
/// it on the identity block; pod-decomposed-P needs N − 2n_s even).
RbAreBasis build_rb_are_basis(RbAreMethod method, const Matrix& P,
                              const FirstOrderSystem& sys, Index dimension);

struct ReducedAre {
  Matrix E_N, A_N, B_N, C_N;
  AreSolution reduced;  // P_N and its diagnostics
  Matrix P_hat;
  Matrix gain;          // K̂_f = −R⁻¹BᵀP̂E
};

/// Throws NumericalError when the reduced system is not stabilizable.
ReducedAre solve_reduced_are(const FirstOrderSystem& sys, const CostWeights& w,
                             const Matrix& V);

/// ‖P − P̂‖_F / ‖P‖_F.
double rb_are_error(const Matrix& P, const Matrix& P_hat);

}  // namespace softrb

#endif  // SOFTRB_MOR_LQR_HPP
