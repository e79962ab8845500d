#pragma once

#include "fracsob/bubble.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace fracsob {

/// Triangulation of the unit ball. Nodes are ordered interior first, so the
/// free degrees of freedom are exactly the indices below num_free.
struct BallMesh {
  int N = 1;
  int level = 0;
  std::vector<Point> nodes;
  /// Node indices per element; for N = 1 the third entry is -1.
  std::vector<std::array<int, 3>> elements;
  std::vector<bool> boundary;
  int num_free = 0;
  double h = 0.0;
  double h_min = 0.0;
  double sigma = 0.0;
  double rho = 0.0;

  [[nodiscard]] int vertices_per_element() const { return N + 1; }
  [[nodiscard]] int num_nodes() const { return static_cast<int>(nodes.size()); }
  [[nodiscard]] int num_elements() const { return static_cast<int>(elements.size()); }
  /// Length (N = 1) or area (N = 2) of element e.
  [[nodiscard]] double measure(int e) const;
  [[nodiscard]] double diameter(int e) const;
};

using MeshPtr = std::shared_ptr<const BallMesh>;

struct MeshQuality {
  double sigma = 0.0;
  double rho = 0.0;
  double h = 0.0;
  double h_min = 0.0;
};

struct MeshOptions {
  /// Upper bound on the dense stiffness matrix size the mesh implies.
  std::size_t memory_budget_bytes = std::size_t{3} << 30;
};

/// N = 1: uniform partition of [-1,1] into 2^(level+1) segments.
/// N = 2: concentric rings; ring j of 2^level rings carries 6j nodes at radius j/2^level,
/// joined by shortest diagonals. Level 0 is the inscribed square cut at the center.
MeshPtr build_mesh(int N, int level, const MeshOptions& options = {});

/// Dense-matrix bytes a (N, level) mesh would need; used by the budget check.
std::size_t estimated_matrix_bytes(int N, int level);

MeshQuality mesh_quality(const BallMesh& mesh);

/// Nodal values on a mesh, zero outside the meshed polytope.
struct FeFunction {
  MeshPtr mesh;
  Eigen::VectorXd values;

  FeFunction() = default;
  FeFunction(MeshPtr m, Eigen::VectorXd v);

  /// Coefficients of the free (interior) nodes.
  [[nodiscard]] Eigen::VectorXd free_values() const { return values.head(mesh->num_free); }
  static FeFunction from_free(MeshPtr m, const Eigen::VectorXd& free);
  /// Value at x, located by brute force; intended for tests and diagnostics.
  [[nodiscard]] double evaluate(const Point& x) const;
};

/// Nodal interpolant; boundary nodes are forced to zero.
FeFunction interpolate(const MeshPtr& mesh, const std::function<double(const Point&)>& f);

/// "index x [y]" per node followed by "index n0 n1 [n2]" per element.
void write_mesh(const BallMesh& mesh, std::ostream& os);

/// Barycentric gradients of the element's vertices (rows), size (N+1) x N.
Eigen::MatrixXd barycentric_gradients(const BallMesh& mesh, int e);

}  // namespace fracsob
