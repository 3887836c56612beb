#ifndef SOFTRB_FEM_HPP
#define SOFTRB_FEM_HPP

///
/// \file fem.hpp
///
/// Plane-strain linear elasticity on the rectangle (0, w) × (0, h) with
/// 4-node bilinear quadrilaterals and 2×2 Gauss quadrature. The Dirichlet
/// strip is the part of both vertical edges with y ≥ 3h/4.
///
/// Unknowns are interleaved (u_x, u_y) per node, nodes numbered
/// lexicographically by (y, x).
///

#include <array>
#include <vector>

#include "softrb/numerics.hpp"

namespace softrb::fem {

struct Mesh2D {
  Index nx = 0;
  Index ny = 0;
  double width = 1.0;
  double height = 2.0;
  /// (#nodes × 2) node coordinates.
  Matrix coords;
  /// Counter-clockwise node ids per element.
  std::vector<std::array<Index, 4>> elements;
  std::vector<bool> dirichlet;

  Index num_nodes() const { return coords.rows(); }
  Index num_dofs() const { return 2 * coords.rows(); }
  Index node_id(Index i, Index j) const { return j * (nx + 1) + i; }
  double area() const { return width * height; }
  std::vector<Index> dirichlet_nodes() const;
};

struct MaterialParams {
  double lambda = 50.0;
  double mu = 50.0;
  double rho = 1.0;
};

struct DofMap {
  std::vector<Index> free;       // global dof ids, ascending
  std::vector<Index> dirichlet;  // global dof ids, ascending
  /// global dof → position in `free`, or −1 for Dirichlet dofs.
  std::vector<Index> free_position;
};

struct ElementMatrices {
  Eigen::Matrix<double, 8, 8> stiffness;
  Eigen::Matrix<double, 8, 8> mass;
};

struct Assembly {
  Matrix K;  // over all displacement unknowns
  Matrix M;
  DofMap dofs;
};

/// Throws unless ny is a multiple of 4 (y = 3h/4 must be a grid line).
Mesh2D build_mesh(Index nx, Index ny, double width = 1.0, double height = 2.0);

void validate(const MaterialParams& mat);

ElementMatrices element_matrices(const Eigen::Matrix<double, 4, 2>& coords,
                                 const MaterialParams& mat);

DofMap make_dof_map(const Mesh2D& mesh);

Assembly assemble(const Mesh2D& mesh, const MaterialParams& mat);

/// Consistent nodal load of a constant body force per unit volume.
Vector body_force(const Mesh2D& mesh, const Eigen::Vector2d& force);

/// Free node nearest to (x, y).
Index nearest_free_node(const Mesh2D& mesh, double x, double y);

}  // namespace softrb::fem

#endif  // SOFTRB_FEM_HPP
