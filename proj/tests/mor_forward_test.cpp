#include "softrb/mor_forward.hpp"

#include <gtest/gtest.h>

#include "softrb/fem.hpp"
#include "softrb/timeint.hpp"
#include "test_util.hpp"

namespace softrb {
namespace {

using test::random_matrix;
using test::subspace_distance;

struct ForwardCase {
  CoupledSecondOrder coupled;
  FirstOrderSystem sys;
  InputFunction input;
  TimeGrid grid{3.0, 600};
  Trajectory fom;
  SnapshotSet S;
};

// Desk-scale forward problem: quintic hand motion from 0 to (5, 5) over T = 3.
const ForwardCase& desk() {
  static const ForwardCase c = [] {
    ForwardCase f;
    const fem::Mesh2D mesh = fem::build_mesh(10, 20);
    f.coupled = build_coupled(fem::assemble(mesh, {50, 50, 1}), {});
    f.sys = to_first_order(f.coupled, fem::nearest_free_node(mesh, 0.5, 0.0));
    f.input = quintic_solid_input(f.coupled, Eigen::Vector2d(5, 5), f.grid.final_time);
    f.fom = implicit_midpoint(f.sys, f.input, f.grid);
    f.S = snapshots_from(f.fom, f.sys.layout);
    return f;
  }();
  return c;
}

double rom_error(const ForwardCase& c, const ReducedBasis& b) {
  const ReducedForwardModel rom = galerkin_project(c.sys, b.V);
  const Trajectory r = simulate_reduced(rom, c.input, c.grid);
  return reconstruct_and_error(b.V, r.states.rightCols(c.grid.steps), c.S.X).error;
}

SnapshotSet random_snapshots(Index n_s, Index n_e, Index cols, unsigned seed) {
  SnapshotSet S;
  S.layout = StateLayout{n_s, n_e};
  S.X = random_matrix(S.layout.size(), cols, seed);
  return S;
}

GTEST_TEST(MethodTags, RoundTrip) {
  for (ForwardMethod m : kAllForwardMethods) {
    EXPECT_EQ(parse_forward_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_forward_method("dmd"), NumericalError);
  EXPECT_TRUE(is_symplectic(ForwardMethod::Gpsd));
  EXPECT_FALSE(is_symplectic(ForwardMethod::ComponentwisePod));
  EXPECT_TRUE(has_fixed_solid(ForwardMethod::PsdFixedSolid));
}

GTEST_TEST(Snapshots, InitialStateDropped) {
  Trajectory t;
  t.grid = {1.0, 3};
  t.states = random_matrix(6, 4, 1);
  const SnapshotSet S = snapshots_from(t, {1, 2});
  EXPECT_EQ(S.X, Matrix(t.states.rightCols(3)));
}

GTEST_TEST(PoissonMatrix, LayoutFormIsPermutedCanonical) {
  const StateLayout L{2, 3};
  const Matrix J = poisson_matrix(L);
  const Matrix Jc = poisson_matrix(L.n());
  const auto perm = L.canonical_permutation();
  for (Index i = 0; i < L.size(); ++i) {
    for (Index j = 0; j < L.size(); ++j) EXPECT_EQ(J(perm[i], perm[j]), Jc(i, j));
  }
  EXPECT_EQ(Matrix(J + J.transpose()).norm(), 0.0);
}

GTEST_TEST(PodEnergyRank, Arithmetic) {
  EXPECT_EQ(pod_energy_rank(Eigen::Vector2d(1, 0.01), 0.999), 1);
  EXPECT_EQ(pod_energy_rank(Eigen::Vector4d(1, 1, 1, 1), 0.999), 4);
  EXPECT_THROW(pod_energy_rank(Eigen::Vector2d(0, 0), 0.9), NumericalError);
  EXPECT_THROW(pod_energy_rank(Eigen::Vector2d(1, 0), 0.0), NumericalError);
}

GTEST_TEST(PodEnergyRank, DeskScaleCumulativeSum) {
  const Vector sigma = singular_values(desk().S.X);
  const Index k = pod_energy_rank(sigma, 0.999);
  const double total = sigma.squaredNorm();
  EXPECT_GE(sigma.head(k).squaredNorm(), 0.999 * total);
  EXPECT_LT(sigma.head(k - 1).squaredNorm(), 0.999 * total);
}

GTEST_TEST(GlobalPod, RepeatedColumn) {
  SnapshotSet S = random_snapshots(1, 2, 1, 3);
  const Vector c = S.X.col(0);
  S.X = c.replicate(1, 5);
  const ReducedBasis b = global_pod(S, 1);
  EXPECT_NEAR(std::abs(b.V.col(0).dot(c.normalized())), 1.0, 1e-14);
}

GTEST_TEST(GlobalPod, OrthogonalColumnsPickLargest) {
  SnapshotSet S;
  S.layout = {1, 4};
  const Matrix Q = test::random_orthonormal(10, 4, 5);
  S.X = Q * Eigen::Vector4d(1, 5, 0.5, 3).asDiagonal();
  const ReducedBasis b = global_pod(S, 2);
  Matrix expected(10, 2);
  expected << Q.col(1), Q.col(3);
  EXPECT_LE(subspace_distance(b.V, expected), 1e-12);
}

double tail_identity_defect(const Matrix& X, Index k) {
  SnapshotSet S;
  S.X = X;
  const Matrix V = global_pod(S, k).V;
  const Vector sigma = singular_values(X);
  const double tail = sigma.tail(sigma.size() - k).squaredNorm();
  const double err = projection_error(V, X);
  return std::abs(err * err - tail) / std::max(tail, 1e-300);
}

GTEST_TEST(GlobalPod, TailEnergyIdentity) {
  const Matrix X = random_matrix(40, 15, 9);
  for (Index k : {1, 4, 9, 14}) EXPECT_LE(tail_identity_defect(X, k), 1e-9) << k;
  for (Index k : {2, 6, 14}) {
    EXPECT_LE(tail_identity_defect(desk().S.X, k), 1e-9) << k;
  }
}

GTEST_TEST(GlobalPod, BeatsRandomCandidates) {
  const SnapshotSet& S = desk().S;
  const Index k = 6;
  const double best = projection_error(global_pod(S, k).V, S.X);
  // Candidates: random subspaces, and perturbations of the POD subspace.
  const Matrix V = global_pod(S, k).V;
  for (unsigned seed = 0; seed < 100; ++seed) {
    Matrix W = seed % 2 ? random_matrix(S.X.rows(), k, 1000 + seed)
                        : Matrix(V + 0.05 * random_matrix(S.X.rows(), k, 1000 + seed));
    W = test::orthonormalize(W);
    EXPECT_GE(projection_error(W, S.X), best * (1 - 1e-12)) << seed;
  }
}

GTEST_TEST(ComponentwisePod, RepeatedColumn) {
  SnapshotSet S = random_snapshots(1, 2, 1, 4);
  S.X = S.X.col(0).replicate(1, 4).eval();
  const ReducedBasis b = componentwise_pod(S, 1, 1);
  EXPECT_LE(projection_error(b.V, S.X), 1e-14 * S.X.norm());
}

GTEST_TEST(ComponentwisePod, BlockDiagonalStructure) {
  const SnapshotSet S = random_snapshots(2, 5, 10, 6);
  const ReducedBasis b = componentwise_pod(S, 3, 2);
  const auto q = S.layout.displacement_indices();
  const auto v = S.layout.velocity_indices();
  EXPECT_EQ(Matrix(b.V(q, Eigen::seq(3, 4))).norm(), 0.0);
  EXPECT_EQ(Matrix(b.V(v, Eigen::seq(0, 2))).norm(), 0.0);
  EXPECT_LE(orthonormality_residual(b.V), 1e-12);
}

GTEST_TEST(ComponentwisePod, SubspaceMatchesOracle) {
  const SnapshotSet& S = desk().S;
  const ReducedBasis b = componentwise_pod(S, 4, 3);
  const auto q = S.layout.displacement_indices();
  Eigen::JacobiSVD<Matrix> oracle(S.displacement(), Eigen::ComputeThinU);
  EXPECT_LE(subspace_distance(Matrix(b.V(q, Eigen::seq(0, 3))),
                              oracle.matrixU().leftCols(4)),
            1e-8);
}

GTEST_TEST(PodFixedSolid, IdentityBlockAndExactSolid) {
  const SnapshotSet& S = desk().S;
  const ReducedBasis b = pod_fixed_solid(S, 6);
  const Index s = S.layout.solid_size();
  EXPECT_EQ(b.solid_identity, s);
  EXPECT_EQ(Matrix(b.V.topLeftCorner(s, s)), Matrix::Identity(s, s));
  EXPECT_EQ(b.V.topRightCorner(s, 6).norm(), 0.0);
  EXPECT_EQ(b.V.bottomLeftCorner(S.layout.elastic_size(), s).norm(), 0.0);
  const Matrix proj = b.V * (b.V.transpose() * S.X);
  EXPECT_LE((proj.topRows(s) - S.solid()).norm(), 1e-14 * S.solid().norm());
  Eigen::JacobiSVD<Matrix> oracle(S.elastic(), Eigen::ComputeThinU);
  EXPECT_LE(subspace_distance(Matrix(b.V.bottomRightCorner(S.layout.elastic_size(), 6)),
                              oracle.matrixU().leftCols(6)),
            1e-8);
}

GTEST_TEST(ComponentwisePodFixedSolid, Structure) {
  const SnapshotSet& S = desk().S;
  const ReducedBasis b = componentwise_pod_fixed_solid(S, 4, 3);
  const StateLayout& L = S.layout;
  const Index s = L.solid_size();
  EXPECT_EQ(Matrix(b.V.topLeftCorner(s, s)), Matrix::Identity(s, s));
  EXPECT_EQ(b.V.block(L.q_e(), s + 4, L.n_e, 3).norm(), 0.0);
  EXPECT_EQ(b.V.block(L.v_e(), s, L.n_e, 4).norm(), 0.0);
  Eigen::JacobiSVD<Matrix> oracle(S.elastic_velocity(), Eigen::ComputeThinU);
  EXPECT_LE(subspace_distance(Matrix(b.V.block(L.v_e(), s + 4, L.n_e, 3)),
                              oracle.matrixU().leftCols(3)),
            1e-8);
}

GTEST_TEST(Gpsd, CanonicalPairIsExact) {
  SnapshotSet S;
  S.layout = {1, 2};
  const auto q = S.layout.displacement_indices();
  const auto v = S.layout.velocity_indices();
  const Matrix coef = random_matrix(2, 7, 8);
  S.X = Matrix::Zero(6, 7);
  S.X.row(q[0]) = coef.row(0);
  S.X.row(v[0]) = coef.row(1);
  const ReducedBasis b = gpsd(S, 2);
  EXPECT_LE(projection_error(b.V, S.X), 1e-14 * S.X.norm());
}

GTEST_TEST(Gpsd, OrthosymplecticOnRandomSnapshots) {
  const SnapshotSet S = random_snapshots(2, 9, 20, 12);
  for (Index N : {2, 6, 10}) {
    const ReducedBasis b = gpsd(S, N);
    EXPECT_LE(symplecticity_residual(b, S.layout), 1e-10) << N;
    EXPECT_LE(orthonormality_residual(b.V), 1e-10) << N;
  }
  EXPECT_THROW(gpsd(S, 3), NumericalError);
  EXPECT_THROW(gpsd(S, 0), NumericalError);
}

// Frozen-hand elastic block, reduced with GPSD and integrated by the
// midpoint rule: ½ x̂ᵀ S x̂ with S = blkdiag(K_ee, M_ee) and x̂ = V x_r.
GTEST_TEST(Gpsd, ReducedEnergyConservedOnFrozenSolid) {
  const ForwardCase& c = desk();
  const FirstOrderSystem fz = frozen_solid_system(c.coupled);
  const Index e = c.coupled.n_e();
  const Vector x0 = c.S.X.bottomRows(2 * e).col(300);
  const TimeGrid grid{3.0, 600};
  const Trajectory fom =
      implicit_midpoint(fz.E, fz.A, fz.B, x0, {}, {}, grid);
  const SnapshotSet S = snapshots_from(fom, fz.layout);
  const ReducedBasis b = gpsd(S, 12);
  ReducedForwardModel rom = galerkin_project(fz, b.V);
  rom.x0 = b.V.transpose() * x0;
  const Trajectory r = simulate_reduced(rom, {}, grid);
  auto energy = [&](const Vector& x) {
    return x.head(e).dot(c.coupled.K_ee * x.head(e)) +
           x.tail(e).dot(c.coupled.M_ee * x.tail(e));
  };
  const double h0 = energy(b.V * r.states.col(0));
  double worst = 0;
  for (Index k = 1; k <= grid.steps; ++k) {
    worst = std::max(worst, std::abs(energy(b.V * r.states.col(k)) - h0) / h0);
  }
  const Eigen::VectorXcd lam = Matrix(rom.E.lu().solve(rom.A)).eigenvalues();
  EXPECT_LE(worst, 1e-10) << "h0 = " << h0 << ", max Re(lambda) = "
                          << lam.real().maxCoeff();
}

GTEST_TEST(PsdFixedSolid, StructureAndExactness) {
  const SnapshotSet& S = desk().S;
  const ReducedBasis b = psd_fixed_solid(S, 8);
  const Index s = S.layout.solid_size();
  EXPECT_EQ(Matrix(b.V.topLeftCorner(s, s)), Matrix::Identity(s, s));
  EXPECT_LE(symplecticity_residual(b, S.layout), 1e-10);
  EXPECT_LE(orthonormality_residual(b.V), 1e-10);

  ComplexMatrix Z(S.layout.n_e, S.count());
  Z.real() = S.elastic_displacement();
  Z.imag() = S.elastic_velocity();
  const Index r = numerical_rank(singular_values(Z));
  const ReducedBasis full = psd_fixed_solid(S, 2 * r);
  EXPECT_LE(projection_error(full.V, S.X) / S.X.norm(), 1e-8);
}

GTEST_TEST(AllBases, OrthonormalWithDeclaredStructure) {
  const ForwardCase& c = desk();
  for (ForwardMethod m : kAllForwardMethods) {
    for (Index N : {8, 14}) {
      const ReducedBasis b = build_forward_basis(m, c.S, N);
      EXPECT_EQ(b.dimension(), N) << to_string(m);
      EXPECT_LE(orthonormality_residual(b.V), 1e-10) << to_string(m);
      if (is_symplectic(m)) {
        EXPECT_LE(symplecticity_residual(b, c.sys.layout), 1e-10) << to_string(m);
      } else {
        EXPECT_THROW(symplecticity_residual(b, c.sys.layout), NumericalError);
      }
      if (has_fixed_solid(m)) {
        const Index s = c.sys.layout.solid_size();
        EXPECT_EQ(Matrix(b.V.topLeftCorner(s, s)), Matrix::Identity(s, s));
      }
    }
    const ReducedBasis e = build_forward_basis_by_energy(m, c.S, 0.999);
    EXPECT_LE(orthonormality_residual(e.V), 1e-10) << to_string(m);
  }
  EXPECT_THROW(build_forward_basis(ForwardMethod::PodFixedSolid, c.S, 4), NumericalError);
  EXPECT_THROW(build_forward_basis(ForwardMethod::PsdFixedSolid, c.S, 9), NumericalError);
}

GTEST_TEST(GalerkinProject, IdentityBasisIsTheFullModel) {
  const ForwardCase& c = desk();
  const Matrix I = Matrix::Identity(c.sys.size(), c.sys.size());
  const ReducedForwardModel rom = galerkin_project(c.sys, I);
  EXPECT_EQ(rom.E, c.sys.E);
  EXPECT_EQ(rom.A, c.sys.A);
  EXPECT_EQ(rom.B, c.sys.B);
  const Trajectory r = simulate_reduced(rom, c.input, c.grid);
  EXPECT_LE(relative_error(c.fom.states, r.states), 1e-12);
}

GTEST_TEST(GalerkinProject, SingleVector) {
  const ForwardCase& c = desk();
  const Matrix e1 = Matrix::Identity(c.sys.size(), 1);
  const ReducedForwardModel rom = galerkin_project(c.sys, e1);
  EXPECT_EQ(rom.E(0, 0), c.sys.E(0, 0));
  EXPECT_EQ(rom.A(0, 0), c.sys.A(0, 0));
  const Matrix ev = Matrix::Identity(c.sys.size(), 3).rightCols(1);  // v_s(0)
  EXPECT_EQ(galerkin_project(c.sys, ev).E(0, 0), 100.0);
}

GTEST_TEST(GalerkinProject, InvariantSubspaceIsExact) {
  const Index n = 12, k = 4;
  Matrix T = random_matrix(n, n, 81) - 4 * Matrix::Identity(n, n);
  T.bottomLeftCorner(n - k, k).setZero();  // span(e_1..e_k) invariant
  const Matrix Q = test::random_orthonormal(n, n, 82);
  FirstOrderSystem sys;
  sys.E = Matrix::Identity(n, n);
  sys.A = Q * T * Q.transpose();
  sys.B = Matrix::Zero(n, 1);
  sys.C = Matrix::Zero(1, n);
  sys.F = Vector::Zero(n);
  const Matrix V = Q.leftCols(k);
  sys.x0 = V * random_matrix(k, 1, 83);
  const TimeGrid grid{2.0, 200};
  const Trajectory full = implicit_midpoint(sys, {}, grid);
  const Trajectory red = simulate_reduced(galerkin_project(sys, V), {}, grid);
  EXPECT_LE(relative_error(full.states, V * red.states), 1e-9);
}

GTEST_TEST(GalerkinProject, SingularReducedMassThrows) {
  FirstOrderSystem sys;
  sys.E = Eigen::Vector2d(1, 0).asDiagonal();
  sys.A = Matrix::Identity(2, 2);
  sys.B = Matrix::Zero(2, 1);
  sys.C = Matrix::Zero(1, 2);
  sys.F = Vector::Zero(2);
  sys.x0 = Vector::Zero(2);
  EXPECT_THROW(galerkin_project(sys, Matrix::Identity(2, 2).rightCols(1)),
               NumericalError);
}

GTEST_TEST(ReconstructAndError, Basics) {
  const Matrix X = random_matrix(6, 5, 91);
  const Matrix I = Matrix::Identity(6, 6);
  EXPECT_EQ(reconstruct_and_error(I, X, X).error, 0.0);
  EXPECT_NEAR(reconstruct_and_error(I, Matrix::Zero(6, 5), X).error, 1.0, 1e-15);
  const Matrix V = test::random_orthonormal(6, 3, 92);
  const Matrix Xr = random_matrix(3, 5, 93);
  const auto rec = reconstruct_and_error(V, Xr, X);
  EXPECT_NEAR(rec.error, (X - V * Xr).norm() / X.norm(), 1e-15);
  EXPECT_THROW(reconstruct_and_error(V, X, X), NumericalError);
}

GTEST_TEST(NestedBases, ProjectionErrorNonIncreasing) {
  const SnapshotSet& S = desk().S;
  double prev = S.X.norm();
  for (Index k = 1; k <= 30; ++k) {
    const double err = projection_error(global_pod(S, k).V, S.X);
    EXPECT_LE(err, prev + 1e-12 * S.X.norm()) << k;
    prev = err;
  }
}

// Galerkin ROM error along nested global POD bases, N_V = 1..20.
GTEST_TEST(NestedBases, GlobalPodRomErrorNonIncreasing) {
  const ForwardCase& c = desk();
  double prev = std::numeric_limits<double>::infinity();
  for (Index k = 1; k <= 20; ++k) {
    const double err = rom_error(c, global_pod(c.S, k));
    EXPECT_LE(err, prev + 1e-12) << "N_V = " << k;
    prev = err;
  }
}

GTEST_TEST(ExactRecovery, RankSizedGlobalPod) {
  const ForwardCase& c = desk();
  const Index r = numerical_rank(singular_values(c.S.X));
  EXPECT_LE(rom_error(c, global_pod(c.S, r)), 1e-8) << "rank " << r;
}

}  // namespace
}  // namespace softrb
