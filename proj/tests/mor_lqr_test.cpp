#include "softrb/mor_lqr.hpp"

#include <gtest/gtest.h>

#include "softrb/fem.hpp"
#include "test_util.hpp"

namespace softrb {
namespace {

using test::random_matrix;
using test::subspace_distance;

Matrix random_spd(Index n, unsigned seed) {
  const Matrix G = random_matrix(n, n, seed);
  return G * G.transpose() + 0.1 * Matrix::Identity(n, n);
}

CostWeights unit_weights(Index p, Index m) {
  return {Matrix::Identity(p, p), Matrix::Identity(m, m)};
}

struct SmallCase {
  FirstOrderSystem sys;
  AreSolution full;
};

const SmallCase& small() {
  static const SmallCase c = [] {
    SmallCase s;
    const fem::Mesh2D mesh = fem::build_mesh(2, 4);
    const CoupledSecondOrder cs =
        build_coupled(fem::assemble(mesh, {50, 50, 1}), {}, {0.0, 0.1});
    s.sys = to_first_order(cs, fem::nearest_free_node(mesh, 1.0, 0.0));
    s.full = solve_gare_dense(s.sys, unit_weights(2, 2));
    return s;
  }();
  return c;
}

GTEST_TEST(MethodTags, RoundTrip) {
  for (RbAreMethod m : kAllRbAreMethods) EXPECT_EQ(parse_rb_are_method(to_string(m)), m);
  EXPECT_THROW(parse_rb_are_method("balanced-truncation"), NumericalError);
}

GTEST_TEST(PodOfP, FullDimensionReproducesP) {
  const Matrix P = random_spd(4, 1);
  const RbAreBasis b = pod_of_P(P, 4);
  EXPECT_LE(rb_are_error(P, b.V * (b.V.transpose() * P * b.V) * b.V.transpose()), 1e-14);
}

GTEST_TEST(PodOfP, LowRankRange) {
  const Matrix Z = random_matrix(8, 3, 2);
  const RbAreBasis b = pod_of_P(Z * Z.transpose(), 3);
  EXPECT_LE(subspace_distance(b.V, test::orthonormalize(Z)), 1e-12);
}

GTEST_TEST(WeightedPod, EuclideanWeightMatchesPlainPod) {
  const Matrix P = random_spd(6, 3);
  const RbAreBasis w = weighted_pod_of_P(P, Matrix::Identity(6, 6), 3);
  EXPECT_LE(subspace_distance(w.V, pod_of_P(P, 3).V), 1e-12);
}

GTEST_TEST(WeightedPod, DiagonalWeight) {
  const RbAreBasis b =
      weighted_pod_of_P(Eigen::Vector2d(1, 0).asDiagonal(), Eigen::Vector2d(4, 1).asDiagonal(), 1);
  EXPECT_NEAR(std::abs(b.V(0, 0)), 0.5, 1e-15);
  EXPECT_EQ(b.V(1, 0), 0.0);
  EXPECT_NEAR((b.V.transpose() * b.weight * b.V)(0, 0), 1.0, 1e-15);
}

GTEST_TEST(WeightedPod, IndefiniteWeightThrows) {
  Matrix E(2, 2);
  E << 1, 0, 4, 1;
  EXPECT_THROW(weighted_pod_of_P(Matrix::Identity(2, 2), E, 1), NumericalError);
}

GTEST_TEST(WeightedPod, CoupledMassWeightOrthonormal) {
  const SmallCase& c = small();
  const RbAreBasis b = weighted_pod_of_P(c.full.P, c.sys.E, 10);
  const Matrix G = b.V.transpose() * b.weight * b.V;
  EXPECT_LE((G - Matrix::Identity(10, 10)).norm(), 1e-10);
}

GTEST_TEST(PodFixedSolidP, StructureAndElasticRange) {
  const StateLayout L{1, 3};
  const Matrix P = random_spd(L.size(), 4);
  const RbAreBasis b = pod_fixed_solid_P(P, L, 2);
  const Index s = L.solid_size();
  EXPECT_EQ(b.dimension(), s + 2);
  EXPECT_EQ(Matrix(b.V.topLeftCorner(s, s)), Matrix::Identity(s, s));
  EXPECT_EQ(b.V.topRightCorner(s, 2).norm(), 0.0);
  EXPECT_EQ(b.V.bottomLeftCorner(L.elastic_size(), s).norm(), 0.0);
  Eigen::JacobiSVD<Matrix> oracle(Matrix(P.bottomRows(L.elastic_size())),
                                  Eigen::ComputeThinU);
  EXPECT_LE(subspace_distance(Matrix(b.V.bottomRightCorner(L.elastic_size(), 2)),
                              oracle.matrixU().leftCols(2)),
            1e-12);
}

GTEST_TEST(ComponentwisePodP, BlockStructure) {
  const StateLayout L{1, 3};
  const Matrix P = random_spd(L.size(), 5);
  const RbAreBasis b = componentwise_pod_P(P, L, 2, 1);
  const Index s = L.solid_size();
  EXPECT_EQ(b.dimension(), s + 3);
  EXPECT_EQ(b.V.block(L.q_e(), s + 2, L.n_e, 1).norm(), 0.0);
  EXPECT_EQ(b.V.block(L.v_e(), s, L.n_e, 2).norm(), 0.0);
  Matrix rows(L.n_e, L.n_s + 2 * L.n_e);
  rows << P.block(L.q_e(), L.q_s(), L.n_e, L.n_s), P.block(L.q_e(), L.q_e(), L.n_e, L.n_e),
      P.block(L.q_e(), L.v_e(), L.n_e, L.n_e);
  Eigen::JacobiSVD<Matrix> oracle(rows, Eigen::ComputeThinU);
  EXPECT_LE(subspace_distance(Matrix(b.V.block(L.q_e(), s, L.n_e, 2)),
                              oracle.matrixU().leftCols(2)),
            1e-12);
}

GTEST_TEST(PodDecomposedP, SharedElasticBasis) {
  const StateLayout L{1, 4};
  const Matrix P = random_spd(L.size(), 6);
  const RbAreBasis b = pod_decomposed_P(P, L, 2);
  const Index s = L.solid_size();
  EXPECT_EQ(b.dimension(), s + 4);
  EXPECT_EQ(Matrix(b.V.block(L.q_e(), s, L.n_e, 2)),
            Matrix(b.V.block(L.v_e(), s + 2, L.n_e, 2)));
  EXPECT_EQ(b.V.block(L.q_e(), s + 2, L.n_e, 2).norm(), 0.0);
  EXPECT_LE(orthonormality_residual(b.V), 1e-12);
}

GTEST_TEST(BuildRbAreBasis, DimensionRules) {
  const SmallCase& c = small();
  for (RbAreMethod m : kAllRbAreMethods) {
    const RbAreBasis b = build_rb_are_basis(m, c.full.P, c.sys, 10);
    EXPECT_EQ(b.dimension(), 10) << to_string(m);
  }
  EXPECT_THROW(build_rb_are_basis(RbAreMethod::PodFixedSolidP, c.full.P, c.sys, 4),
               NumericalError);
  EXPECT_THROW(build_rb_are_basis(RbAreMethod::ComponentwisePodP, c.full.P, c.sys, 5),
               NumericalError);
  EXPECT_THROW(build_rb_are_basis(RbAreMethod::PodDecomposedP, c.full.P, c.sys, 9),
               NumericalError);
}

GTEST_TEST(SolveReducedAre, IdentityBasisReproducesP) {
  const SmallCase& c = small();
  const Index n = c.sys.size();
  const ReducedAre r = solve_reduced_are(c.sys, unit_weights(2, 2), Matrix::Identity(n, n));
  EXPECT_LE(rb_are_error(c.full.P, r.P_hat), 1e-8);
  EXPECT_LE((r.gain - c.full.gain).norm(), 1e-8 * c.full.gain.norm());
}

// Stable unobserved second block: P = blkdiag(P₁, 0), recovered from the
// first block alone.
GTEST_TEST(SolveReducedAre, InvariantBlockIsExact) {
  const Index n1 = 4, n2 = 3, n = n1 + n2;
  FirstOrderSystem sys;
  sys.E = Matrix::Identity(n, n);
  sys.A = Matrix::Zero(n, n);
  sys.A.topLeftCorner(n1, n1) = random_matrix(n1, n1, 31);
  sys.A.bottomRightCorner(n2, n2) = -2.0 * Matrix::Identity(n2, n2);
  sys.B = Matrix::Zero(n, 2);
  sys.B.topRows(n1) = random_matrix(n1, 2, 32);
  sys.C = Matrix::Zero(2, n);
  sys.C.leftCols(n1) = random_matrix(2, n1, 33);
  const ReducedAre r =
      solve_reduced_are(sys, unit_weights(2, 2), Matrix::Identity(n, n1));
  EXPECT_LE(gare_residual(sys.E, sys.A, sys.B, sys.C, unit_weights(2, 2), r.P_hat), 1e-10);
  EXPECT_EQ(r.P_hat.bottomRows(n2).norm(), 0.0);
}

GTEST_TEST(SolveReducedAre, ReducedResidualAndSymmetry) {
  const SmallCase& c = small();
  for (RbAreMethod m : kAllRbAreMethods) {
    const RbAreBasis b = build_rb_are_basis(m, c.full.P, c.sys, 12);
    const ReducedAre r = solve_reduced_are(c.sys, unit_weights(2, 2), b.V);
    EXPECT_LE(r.reduced.residual, 1e-8) << to_string(m);
    EXPECT_EQ((r.P_hat - r.P_hat.transpose()).norm(), 0.0) << to_string(m);
    EXPECT_LE(gare_residual(r.E_N, r.A_N, r.B_N, r.C_N, unit_weights(2, 2), r.reduced.P),
              1e-8)
        << to_string(m);
  }
}

GTEST_TEST(SolveReducedAre, Errors) {
  FirstOrderSystem sys;
  sys.E = Matrix::Identity(2, 2);
  sys.A = Eigen::Vector2d(1, -1).asDiagonal();
  sys.B = Eigen::Vector2d(0, 1);
  sys.C = Matrix::Identity(2, 2);
  // Unstable mode with no actuation in the reduced space.
  EXPECT_THROW(solve_reduced_are(sys, unit_weights(2, 1), Matrix::Identity(2, 1)),
               NumericalError);
  EXPECT_THROW(solve_reduced_are(sys, unit_weights(2, 1), Matrix::Identity(3, 1)),
               NumericalError);
}

GTEST_TEST(RbAreError, Definition) {
  const Matrix P = random_spd(5, 7);
  EXPECT_EQ(rb_are_error(P, P), 0.0);
  EXPECT_NEAR(rb_are_error(P, Matrix::Zero(5, 5)), 1.0, 1e-15);
}

}  // namespace
}  // namespace softrb
