#pragma once

// Internal helpers shared by the pair quadrature and the assembly loop.

#include "fracsob/gagliardo.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace fracsob::detail {

/// Geometry of one element with affine-extended barycentric coordinates.
struct ElementGeom {
  int n = 0;  ///< vertex count, N + 1
  std::array<int, 3> nodes{};
  std::array<Point, 3> P{};
  std::array<Point, 3> grad{};  ///< barycentric gradients (y = 0 in 1D)
  double measure = 0.0;
  double diameter = 0.0;
  Point centroid = Point::Zero();
  double radius = 0.0;  ///< max vertex distance from the centroid

  ElementGeom() = default;
  ElementGeom(const BallMesh& mesh, int e);

  [[nodiscard]] double bary(int k, const Point& x) const { return 1.0 + grad[k].dot(x - P[k]); }
};

/// Boundary chords of B_h, CCW, as consecutive vertex pairs.
struct Polytope {
  int N = 1;
  std::vector<Point> vertices;
};

Polytope polytope_of(const BallMesh& mesh);

/// int over R^N minus the polytope of |x-y|^{-(N+2s)} dy for x strictly inside.
double polytope_kappa(const Polytope& poly, const Point& x, double s);

PairMatrix pair_matrix(const std::vector<ElementGeom>& geoms, int T, int Tp, double s,
                       const QuadSpec& quad);

Eigen::MatrixXd complement_matrix(const ElementGeom& g, const BallMesh& mesh, const Polytope& poly,
                                  double s, const QuadSpec& quad, std::int64_t* points);

}  // namespace fracsob::detail
