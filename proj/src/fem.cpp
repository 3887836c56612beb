#include "softrb/fem.hpp"

#include <limits>
#include <sstream>

namespace softrb::fem {

std::vector<Index> Mesh2D::dirichlet_nodes() const {
  std::vector<Index> out;
  for (Index k = 0; k < num_nodes(); ++k) {
    if (dirichlet[k]) out.push_back(k);
  }
  return out;
}

Mesh2D build_mesh(Index nx, Index ny, double width, double height) {
  if (nx < 1 || ny < 1) throw NumericalError("build_mesh: need nx, ny >= 1");
  if (ny % 4 != 0) {
    std::ostringstream msg;
    msg << "build_mesh: ny = " << ny
        << " is not a multiple of 4, the Dirichlet strip would not start on a "
           "grid line";
    throw NumericalError(msg.str());
  }
  if (!(width > 0) || !(height > 0)) {
    throw NumericalError("build_mesh: domain extents must be positive");
  }
  Mesh2D mesh;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.width = width;
  mesh.height = height;
  const Index nodes = (nx + 1) * (ny + 1);
  mesh.coords.resize(nodes, 2);
  mesh.dirichlet.assign(nodes, false);
  const Index strip_start = 3 * ny / 4;
  for (Index j = 0; j <= ny; ++j) {
    for (Index i = 0; i <= nx; ++i) {
      const Index id = mesh.node_id(i, j);
      mesh.coords(id, 0) = width * static_cast<double>(i) / nx;
      mesh.coords(id, 1) = height * static_cast<double>(j) / ny;
      mesh.dirichlet[id] = (i == 0 || i == nx) && j >= strip_start;
    }
  }
  mesh.elements.reserve(nx * ny);
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      mesh.elements.push_back({mesh.node_id(i, j), mesh.node_id(i + 1, j),
                               mesh.node_id(i + 1, j + 1),
                               mesh.node_id(i, j + 1)});
    }
  }
  return mesh;
}

void validate(const MaterialParams& mat) {
  if (!(mat.lambda > 0) || !(mat.mu > 0) || !(mat.rho > 0)) {
    throw NumericalError("material: lambda, mu and rho must be positive");
  }
}

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1/√3

struct ShapeEval {
  Eigen::Vector4d N;
  Eigen::Matrix<double, 2, 4> dN_ref;  // d/dξ, d/dη
};

ShapeEval shape(double xi, double eta) {
  ShapeEval s;
  s.N << (1 - xi) * (1 - eta), (1 + xi) * (1 - eta), (1 + xi) * (1 + eta),
      (1 - xi) * (1 + eta);
  s.N *= 0.25;
  s.dN_ref << -(1 - eta), (1 - eta), (1 + eta), -(1 + eta),  //
      -(1 - xi), -(1 + xi), (1 + xi), (1 - xi);
  s.dN_ref *= 0.25;
  return s;
}

}  // namespace

ElementMatrices element_matrices(const Eigen::Matrix<double, 4, 2>& coords,
                                 const MaterialParams& mat) {
  validate(mat);
  // Plane strain, engineering shear strain.
  Eigen::Matrix3d D;
  D << mat.lambda + 2 * mat.mu, mat.lambda, 0,  //
      mat.lambda, mat.lambda + 2 * mat.mu, 0,   //
      0, 0, mat.mu;

  ElementMatrices out;
  out.stiffness.setZero();
  out.mass.setZero();
  for (double xi : {-kGauss, kGauss}) {
    for (double eta : {-kGauss, kGauss}) {
      const ShapeEval s = shape(xi, eta);
      const Eigen::Matrix2d J = s.dN_ref * coords;
      const double det = J.determinant();
      if (!(det > 0)) {
        throw NumericalError(
            "element_matrices: degenerate or inverted element geometry");
      }
      const Eigen::Matrix<double, 2, 4> dN = J.inverse() * s.dN_ref;
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      Eigen::Matrix<double, 2, 8> Nmat = Eigen::Matrix<double, 2, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        B(0, 2 * a) = dN(0, a);
        B(1, 2 * a + 1) = dN(1, a);
        B(2, 2 * a) = dN(1, a);
        B(2, 2 * a + 1) = dN(0, a);
        Nmat(0, 2 * a) = s.N(a);
        Nmat(1, 2 * a + 1) = s.N(a);
      }
      out.stiffness += det * B.transpose() * D * B;
      out.mass += det * mat.rho * Nmat.transpose() * Nmat;
    }
  }
  return out;
}

DofMap make_dof_map(const Mesh2D& mesh) {
  DofMap map;
  map.free_position.assign(mesh.num_dofs(), -1);
  for (Index node = 0; node < mesh.num_nodes(); ++node) {
    for (Index c = 0; c < 2; ++c) {
      const Index dof = 2 * node + c;
      if (mesh.dirichlet[node]) {
        map.dirichlet.push_back(dof);
      } else {
        map.free_position[dof] = static_cast<Index>(map.free.size());
        map.free.push_back(dof);
      }
    }
  }
  return map;
}

namespace {

Eigen::Matrix<double, 4, 2> element_coords(const Mesh2D& mesh,
                                           const std::array<Index, 4>& el) {
  Eigen::Matrix<double, 4, 2> c;
  for (int a = 0; a < 4; ++a) c.row(a) = mesh.coords.row(el[a]);
  return c;
}

}  // namespace

Assembly assemble(const Mesh2D& mesh, const MaterialParams& mat) {
  validate(mat);
  const Index n = mesh.num_dofs();
  Assembly out;
  out.K = Matrix::Zero(n, n);
  out.M = Matrix::Zero(n, n);
  for (const auto& el : mesh.elements) {
    const ElementMatrices em = element_matrices(element_coords(mesh, el), mat);
    for (int a = 0; a < 8; ++a) {
      const Index ga = 2 * el[a / 2] + a % 2;
      for (int b = 0; b < 8; ++b) {
        const Index gb = 2 * el[b / 2] + b % 2;
        out.K(ga, gb) += em.stiffness(a, b);
        out.M(ga, gb) += em.mass(a, b);
      }
    }
  }
  out.dofs = make_dof_map(mesh);
  return out;
}

Vector body_force(const Mesh2D& mesh, const Eigen::Vector2d& force) {
  if (!force.allFinite()) throw NumericalError("body_force: non-finite force");
  Vector f = Vector::Zero(mesh.num_dofs());
  for (const auto& el : mesh.elements) {
    const Eigen::Matrix<double, 4, 2> c = element_coords(mesh, el);
    for (double xi : {-kGauss, kGauss}) {
      for (double eta : {-kGauss, kGauss}) {
        const ShapeEval s = shape(xi, eta);
        const double det = (s.dN_ref * c).determinant();
        for (int a = 0; a < 4; ++a) {
          f(2 * el[a]) += det * s.N(a) * force(0);
          f(2 * el[a] + 1) += det * s.N(a) * force(1);
        }
      }
    }
  }
  return f;
}

Index nearest_free_node(const Mesh2D& mesh, double x, double y) {
  Index best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < mesh.num_nodes(); ++k) {
    if (mesh.dirichlet[k]) continue;
    const double dx = mesh.coords(k, 0) - x;
    const double dy = mesh.coords(k, 1) - y;
    const double d = dx * dx + dy * dy;
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  if (best < 0) throw NumericalError("nearest_free_node: mesh has no free node");
  return best;
}

}  // namespace softrb::fem
