#pragma once

#include "fracsob/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracsob {

/// Quadrature orders for the nonlocal form. Zero means "dimension default".
struct QuadSpec {
  int far_order = 0;        ///< q0: Gauss points per direction for well-separated pairs
  int near_increment = 2;   ///< added to q0 for non-touching pairs closer than a diameter
  int singular_order = 0;   ///< points per direction in the touching-pair transforms
  int angular_order = 0;    ///< points per arc for identical pairs (N = 2)
  int complement_order = 0; ///< points per direction for the exterior term (N = 2)
  std::int64_t max_kernel_evals = std::int64_t{1} << 40;
  int threads = 0;          ///< 0: OpenMP default

  /// Fills zero fields with the defaults for dimension N.
  [[nodiscard]] QuadSpec resolved(int N) const;
  /// Every order raised by `by`; used for the quadrature slack estimate.
  [[nodiscard]] QuadSpec refined(int by = 2) const;
};

enum class PairCategory : int { Identical = 0, Edge = 1, Vertex = 2, NearDisjoint = 3, FarDisjoint = 4 };

struct AssemblyReport {
  std::array<std::int64_t, 5> pairs{};          ///< indexed by PairCategory
  std::array<std::int64_t, 5> kernel_evals{};
  std::int64_t complement_points = 0;
  double seconds = 0.0;
  double symmetry_error = 0.0;  ///< max |A_ij - A_ji| / max |A|
};

std::string category_name(PairCategory c);

/// Which double integral the form represents.
enum class FormDomain {
  WholeSpace,  ///< R^N x R^N for the zero extension (the Gagliardo seminorm)
  MeshOnly     ///< B_h x B_h only, no exterior term
};

/// Symmetric dense matrix of the Gagliardo form on free nodes, s(1-s) included.
struct NonlocalForm {
  MeshPtr mesh;
  double s = 0.0;
  QuadSpec quad;
  FormDomain domain = FormDomain::WholeSpace;
  Eigen::MatrixXd matrix;
  AssemblyReport report;

  [[nodiscard]] int size() const { return static_cast<int>(matrix.rows()); }
};

/// kappa(x) = int over R^N minus the unit ball of |x-y|^{-(N+2s)} dy, |x| < 1.
double complement_weight(const Point& x, int N, double s);

/// Same integral over the complement of the meshed polytope B_h (convex, with
/// all vertices on the sphere). In 1D it coincides with complement_weight.
double polytope_complement_weight(const BallMesh& mesh, const Point& x, double s);

NonlocalForm assemble(const MeshPtr& mesh, double s, const QuadSpec& quad = {},
                      FormDomain domain = FormDomain::WholeSpace);

/// coeff^T A coeff for a function on the form's mesh.
double seminorm_sq(const NonlocalForm& form, const FeFunction& u);

/// Writes "i j value" lines for every nonzero entry.
void write_triplets(const NonlocalForm& form, std::ostream& os);

/// Interaction integral of one element pair without the s(1-s) factor, as a
/// dense matrix over the listed union of node indices; exposed for tests.
struct PairMatrix {
  std::vector<int> nodes;
  Eigen::MatrixXd values;
  PairCategory category = PairCategory::FarDisjoint;
  std::int64_t kernel_evals = 0;
};

/// int_T int_T' (u(x)-u(y))^2 |x-y|^{-N-2s} for T != T' (one ordered copy) or
/// T = T', as a quadratic form in the union nodal values.
PairMatrix pair_matrix(const BallMesh& mesh, int T, int Tp, double s, const QuadSpec& quad);

/// int_T phi_a phi_b kappa_h over element T, for the element's local nodes.
/// In 2D, rows and columns of nodes on the sphere are left at zero.
Eigen::MatrixXd complement_element_matrix(const BallMesh& mesh, int T, double s, const QuadSpec& quad,
                                          std::int64_t* points = nullptr);

}  // namespace fracsob
