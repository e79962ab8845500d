// Element-pair integrals of the Gagliardo kernel.
//
// For elements T, T' and union nodes a, the pair contributes
//   M_ab = int_T int_T' d_a(x,y) d_b(x,y) |x-y|^{-N-2s} dy dx,
//   d_a(x,y) = phi_a|_T(x) - phi_a|_T'(y),
// with each element's barycentric functions extended affinely. Touching pairs
// use the fact that d is linear in the offsets from the shared vertex (or in
// x - y on a single element), which makes the integrand homogeneous and lets
// the radial variable be integrated in closed form.

#include "pair_kernels.hpp"

#include "fracsob/errors.hpp"
#include "fracsob/quadrature.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fracsob::detail {

namespace {

constexpr double kPi = std::numbers::pi;

using Local = Eigen::Matrix<double, 6, 6>;

inline double kernel(const Point& z, double half_exp) { return std::pow(z.squaredNorm(), -half_exp); }

// Adds w k(x-y) d d^T for one point pair; map_b gives the union slot of each
// vertex of B (A's vertices occupy slots 0..A.n-1).
inline void accumulate(const ElementGeom& A, const ElementGeom& B, const std::array<int, 3>& map_b,
                       const Point& x, const Point& y, double w, double half_exp, Local& M, int nu) {
  double d[6] = {0, 0, 0, 0, 0, 0};
  for (int k = 0; k < A.n; ++k) d[k] += A.bary(k, x);
  for (int k = 0; k < B.n; ++k) d[map_b[k]] -= B.bary(k, y);
  const double f = w * kernel(x - y, half_exp);
  for (int a = 0; a < nu; ++a) {
    const double fa = f * d[a];
    for (int b = 0; b < nu; ++b) M(a, b) += fa * d[b];
  }
}

struct PointSet {
  std::vector<Point> x;
  std::vector<std::array<double, 3>> bary;
  std::vector<double> w;
};

void element_points(const ElementGeom& g, int order, PointSet& out) {
  out.x.clear();
  out.bary.clear();
  out.w.clear();
  if (g.n == 2) {
    const Rule1D& r = gauss_legendre(order);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double t = r.x[i];
      out.x.push_back((1.0 - t) * g.P[0] + t * g.P[1]);
      out.bary.push_back({1.0 - t, t, 0.0});
      out.w.push_back(r.w[i] * g.measure);
    }
  } else {
    const TriangleRule& r = triangle_rule(order);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const auto& b = r.bary[i];
      out.x.push_back(b(0) * g.P[0] + b(1) * g.P[1] + b(2) * g.P[2]);
      out.bary.push_back({b(0), b(1), b(2)});
      out.w.push_back(r.w[i] * g.measure);
    }
  }
}

PairMatrix identical_pair(const ElementGeom& g, int N, double s, int angular_order) {
  PairMatrix pm;
  pm.category = PairCategory::Identical;
  pm.nodes.assign(g.nodes.begin(), g.nodes.begin() + g.n);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(g.n, g.n);
  // Overlap |T cap (T + z)| = |T| (1 - m(z))_+^N with m(z) = sum_k max(0, grad_k . z);
  // the radial integral then gives |T| B(2-2s, N+1) m(w)^{2s-2} on the unit sphere.
  auto add_direction = [&](const Point& w, double weight) {
    double m = 0.0;
    double gw[3];
    for (int k = 0; k < g.n; ++k) {
      gw[k] = g.grad[k].dot(w);
      m += std::max(0.0, gw[k]);
    }
    const double f = weight * std::pow(m, 2.0 * s - 2.0);
    for (int a = 0; a < g.n; ++a)
      for (int b = 0; b < g.n; ++b) M(a, b) += f * gw[a] * gw[b];
    ++pm.kernel_evals;
  };
  if (N == 1) {
    add_direction(Point(1.0, 0.0), 1.0);
    add_direction(Point(-1.0, 0.0), 1.0);
  } else {
    // m is smooth between the directions orthogonal to some gradient.
    std::vector<double> kinks;
    for (int k = 0; k < 3; ++k) {
      const double t = std::atan2(g.grad[k].y(), g.grad[k].x());
      for (double c : {t + 0.5 * kPi, t - 0.5 * kPi}) {
        double a = std::fmod(c, 2.0 * kPi);
        if (a < 0.0) a += 2.0 * kPi;
        kinks.push_back(a);
      }
    }
    std::sort(kinks.begin(), kinks.end());
    kinks.push_back(kinks.front() + 2.0 * kPi);
    const Rule1D& r = gauss_legendre(angular_order);
    for (std::size_t i = 0; i + 1 < kinks.size(); ++i) {
      const double len = kinks[i + 1] - kinks[i];
      if (len <= 1e-15) continue;
      for (std::size_t q = 0; q < r.size(); ++q) {
        const double t = kinks[i] + len * r.x[q];
        add_direction(Point(std::cos(t), std::sin(t)), len * r.w[q]);
      }
    }
  }
  const double beta = std::exp(std::lgamma(2.0 - 2.0 * s) + std::lgamma(N + 1.0) -
                               std::lgamma(3.0 - 2.0 * s + N));
  pm.values = M * (g.measure * beta);
  return pm;
}

PairMatrix disjoint_pair(const ElementGeom& A, const ElementGeom& B, double half_exp, int order,
                         PairCategory cat) {
  thread_local PointSet pa;
  thread_local PointSet pb;
  thread_local std::vector<double> colk;
  element_points(A, order, pa);
  element_points(B, order, pb);
  const int na = A.n;
  const int nb = B.n;
  Local M = Local::Zero();
  colk.assign(pb.x.size(), 0.0);
  for (std::size_t i = 0; i < pa.x.size(); ++i) {
    double rowk = 0.0;
    double v[3] = {0, 0, 0};
    for (std::size_t j = 0; j < pb.x.size(); ++j) {
      const double k = kernel(pa.x[i] - pb.x[j], half_exp);
      const double wk = pb.w[j] * k;
      rowk += wk;
      for (int b = 0; b < nb; ++b) v[b] += wk * pb.bary[j][b];
      colk[j] += pa.w[i] * k;
    }
    const auto& la = pa.bary[i];
    for (int a = 0; a < na; ++a) {
      for (int b = 0; b < na; ++b) M(a, b) += pa.w[i] * rowk * la[a] * la[b];
      for (int b = 0; b < nb; ++b) M(a, na + b) -= pa.w[i] * la[a] * v[b];
    }
  }
  for (std::size_t j = 0; j < pb.x.size(); ++j) {
    const auto& lb = pb.bary[j];
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b) M(na + a, na + b) += pb.w[j] * colk[j] * lb[a] * lb[b];
  }
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b) M(na + b, a) = M(a, na + b);

  PairMatrix pm;
  pm.category = cat;
  pm.nodes.assign(A.nodes.begin(), A.nodes.begin() + na);
  pm.nodes.insert(pm.nodes.end(), B.nodes.begin(), B.nodes.begin() + nb);
  pm.values = M.topLeftCorner(na + nb, na + nb);
  pm.kernel_evals = static_cast<std::int64_t>(pa.x.size() * pb.x.size());
  return pm;
}

// Union slots for B's vertices; shared vertices reuse A's slot.
int union_map(const ElementGeom& A, const ElementGeom& B, std::array<int, 3>& map_b, std::vector<int>& nodes) {
  nodes.assign(A.nodes.begin(), A.nodes.begin() + A.n);
  for (int k = 0; k < B.n; ++k) {
    int slot = -1;
    for (int j = 0; j < A.n; ++j)
      if (A.nodes[j] == B.nodes[k]) slot = j;
    if (slot < 0) {
      slot = static_cast<int>(nodes.size());
      nodes.push_back(B.nodes[k]);
    }
    map_b[k] = slot;
  }
  return static_cast<int>(nodes.size());
}

PairMatrix vertex_pair_1d(const ElementGeom& A, const ElementGeom& B, int ka, int kb, double s,
                          int order) {
  PairMatrix pm;
  pm.category = PairCategory::Vertex;
  std::array<int, 3> map_b{};
  const int nu = union_map(A, B, map_b, pm.nodes);
  const double half_exp = 0.5 * (1.0 + 2.0 * s);
  const Point& V = A.P[ka];
  const Point& Ao = A.P[1 - ka];
  const Point& Bo = B.P[1 - kb];
  const double scale = A.measure * B.measure / (3.0 - 2.0 * s);
  Local M = Local::Zero();
  const Rule1D& r = gauss_legendre(order);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double w = r.x[i];
    const double wt = scale * r.w[i];
    accumulate(A, B, map_b, Ao, V + w * (Bo - V), wt, half_exp, M, nu);
    accumulate(A, B, map_b, V + w * (Ao - V), Bo, wt, half_exp, M, nu);
  }
  pm.values = M.topLeftCorner(nu, nu);
  pm.kernel_evals = 2 * static_cast<std::int64_t>(r.size());
  return pm;
}

PairMatrix vertex_pair_2d(const ElementGeom& A, const ElementGeom& B, int ka, int kb, double s,
                          int order) {
  PairMatrix pm;
  pm.category = PairCategory::Vertex;
  std::array<int, 3> map_b{};
  const int nu = union_map(A, B, map_b, pm.nodes);
  const double half_exp = 1.0 + s;
  const Point& P0 = A.P[ka];
  const Point e1 = A.P[(ka + 1) % 3] - P0;
  const Point u1 = A.P[(ka + 2) % 3] - A.P[(ka + 1) % 3];
  const Point e2 = B.P[(kb + 1) % 3] - P0;
  const Point u2 = B.P[(kb + 2) % 3] - B.P[(kb + 1) % 3];
  const double scale = 4.0 * A.measure * B.measure / (4.0 - 2.0 * s);
  Local M = Local::Zero();
  const Rule1D& r = gauss_legendre(order);
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const double h1 = r.x[i], h2 = r.x[j], h3 = r.x[k];
        const double wt = scale * h2 * r.w[i] * r.w[j] * r.w[k];
        // Sub-domain a1 >= a2: (a1, b1, a2, b2) = (1, h1, h2, h2 h3) on the unit slice.
        accumulate(A, B, map_b, P0 + e1 + h1 * u1, P0 + h2 * e2 + h2 * h3 * u2, wt, half_exp, M, nu);
        // Sub-domain a2 >= a1, roles swapped.
        accumulate(A, B, map_b, P0 + h2 * e1 + h2 * h3 * u1, P0 + e2 + h1 * u2, wt, half_exp, M, nu);
      }
  pm.values = M.topLeftCorner(nu, nu);
  pm.kernel_evals = 2 * static_cast<std::int64_t>(n * n * n);
  return pm;
}

PairMatrix edge_pair_2d(const ElementGeom& A, const ElementGeom& B, int ka0, int ka1, int kb2,
                        double s, int order) {
  PairMatrix pm;
  pm.category = PairCategory::Edge;
  std::array<int, 3> map_b{};
  const int nu = union_map(A, B, map_b, pm.nodes);
  const double half_exp = 1.0 + s;
  const int ka2 = 3 - ka0 - ka1;
  const Point& P0 = A.P[ka0];
  const Point e = A.P[ka1] - P0;
  const Point u = A.P[ka2] - A.P[ka1];
  const Point up = B.P[kb2] - A.P[ka1];
  // Integrating out the common edge coordinate leaves z = (z1, b, b') with
  // x = P0 + z1 e + b u and y = P0 + b' u'. The cone over {m(z) = 1} splits into
  // four faces parametrized by (p, q) in the unit square.
  const double scale = 4.0 * A.measure * B.measure / ((3.0 - 2.0 * s) * (4.0 - 2.0 * s));
  Local M = Local::Zero();
  const Rule1D& r = gauss_legendre(order);
  const std::size_t n = r.size();
  auto add = [&](double z1, double b, double bp, double J, double w) {
    accumulate(A, B, map_b, P0 + z1 * e + b * u, P0 + bp * up, scale * J * w, half_exp, M, nu);
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double p = r.x[i], q = r.x[j];
      const double w = r.w[i] * r.w[j];
      add(p, 1.0, (1.0 - p) * q, 1.0 - p, w);
      add(p, q, 1.0 - p, 1.0, w);
      add(-p, 1.0 - p, q, 1.0, w);
      add(-p, (1.0 - p) * q, 1.0, 1.0 - p, w);
    }
  pm.values = M.topLeftCorner(nu, nu);
  pm.kernel_evals = 4 * static_cast<std::int64_t>(n * n);
  return pm;
}

}  // namespace

ElementGeom::ElementGeom(const BallMesh& mesh, int e) {
  n = mesh.N + 1;
  const Eigen::MatrixXd g = barycentric_gradients(mesh, e);
  centroid = Point::Zero();
  for (int k = 0; k < n; ++k) {
    nodes[k] = mesh.elements[e][k];
    P[k] = mesh.nodes[nodes[k]];
    grad[k] = Point(g(k, 0), mesh.N == 2 ? g(k, 1) : 0.0);
    centroid += P[k] / n;
  }
  measure = mesh.measure(e);
  diameter = mesh.diameter(e);
  radius = 0.0;
  for (int k = 0; k < n; ++k) radius = std::max(radius, (P[k] - centroid).norm());
}

Polytope polytope_of(const BallMesh& mesh) {
  Polytope poly;
  poly.N = mesh.N;
  if (mesh.N == 2) {
    // Boundary nodes are stored last, in counterclockwise order around the circle.
    for (int i = mesh.num_free; i < mesh.num_nodes(); ++i) poly.vertices.push_back(mesh.nodes[i]);
  } else {
    poly.vertices = {Point(-1.0, 0.0), Point(1.0, 0.0)};
  }
  return poly;
}

double polytope_kappa(const Polytope& poly, const Point& x, double s) {
  if (poly.N == 1) {
    const double t = x.x();
    if (!(std::abs(t) < 1.0)) throw InvalidInput("complement weight evaluated outside the interval");
    return (std::pow(1.0 - t, -2.0 * s) + std::pow(1.0 + t, -2.0 * s)) / (2.0 * s);
  }
  // Polar coordinates around x: each chord at distance p subtends the angles
  // [psi_P, psi_Q] measured from its normal, and contributes
  // p^{-2s} int cos^{2s}(psi) dpsi = p^{-2s} [G(psi_Q) - G(psi_P)].
  auto G = [s](double psi) {
    const double sn = std::sin(psi);
    const double v = 0.5 * boost::math::beta(0.5, s + 0.5, sn * sn);
    return psi < 0.0 ? -v : v;
  };
  const std::size_t m = poly.vertices.size();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Point& P = poly.vertices[i];
    const Point& Q = poly.vertices[(i + 1) % m];
    const Point edge = Q - P;
    const Point normal = Point(edge.y(), -edge.x()) / edge.norm();
    const Point dp = P - x;
    const Point dq = Q - x;
    const double p = dp.dot(normal);
    if (!(p > 0.0)) throw InvalidInput("complement weight evaluated outside the polytope");
    const double psi_p = std::atan2(normal.x() * dp.y() - normal.y() * dp.x(), p);
    const double psi_q = std::atan2(normal.x() * dq.y() - normal.y() * dq.x(), dq.dot(normal));
    total += std::pow(p, -2.0 * s) * (G(psi_q) - G(psi_p));
  }
  return total / (2.0 * s);
}

PairMatrix pair_matrix(const std::vector<ElementGeom>& geoms, int T, int Tp, double s,
                       const QuadSpec& quad) {
  const ElementGeom& A = geoms[T];
  const ElementGeom& B = geoms[Tp];
  const int N = A.n - 1;
  if (T == Tp) return identical_pair(A, N, s, quad.angular_order);

  int shared = 0;
  int ka[2] = {-1, -1};
  int kb[2] = {-1, -1};
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < B.n; ++j)
      if (A.nodes[i] == B.nodes[j]) {
        if (shared < 2) {
          ka[shared] = i;
          kb[shared] = j;
        }
        ++shared;
      }

  if (shared == 0) {
    const double half_exp = 0.5 * (N + 2.0 * s);
    double gap;
    if (N == 1) {
      const double a0 = std::min(A.P[0].x(), A.P[1].x()), a1 = std::max(A.P[0].x(), A.P[1].x());
      const double b0 = std::min(B.P[0].x(), B.P[1].x()), b1 = std::max(B.P[0].x(), B.P[1].x());
      gap = std::max(b0 - a1, a0 - b1);
    } else {
      gap = (A.centroid - B.centroid).norm() - A.radius - B.radius;
    }
    const double diam = std::max(A.diameter, B.diameter);
    const bool far = gap >= (1.0 - 1e-12) * diam;
    return disjoint_pair(A, B, half_exp, far ? quad.far_order : quad.far_order + quad.near_increment,
                         far ? PairCategory::FarDisjoint : PairCategory::NearDisjoint);
  }
  if (N == 1) return vertex_pair_1d(A, B, ka[0], kb[0], s, quad.singular_order);
  if (shared == 1) return vertex_pair_2d(A, B, ka[0], kb[0], s, quad.singular_order);
  if (shared == 2) {
    const int kb2 = 3 - kb[0] - kb[1];
    return edge_pair_2d(A, B, ka[0], ka[1], kb2, s, quad.singular_order);
  }
  std::ostringstream os;
  os << "elements " << T << " and " << Tp << " share " << shared << " vertices";
  throw InvalidInput(os.str());
}

Eigen::MatrixXd complement_matrix(const ElementGeom& g, const BallMesh& mesh, const Polytope& poly,
                                  double s, const QuadSpec& quad, std::int64_t* points) {
  const int n = g.n;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  std::int64_t count = 0;
  const int order = quad.complement_order;

  if (mesh.N == 1) {
    // kappa = ((1-x)^{-2s} + (1+x)^{-2s}) / (2s); each term gets a Jacobi rule
    // when the element touches its singular endpoint.
    for (double end : {1.0, -1.0}) {
      int touching = -1;
      for (int k = 0; k < 2; ++k)
        if (std::abs(g.P[k].x() - end) < 1e-14) touching = k;
      if (touching >= 0) {
        const Point& V = g.P[touching];
        const Point& W = g.P[1 - touching];
        const Rule1D& r = gauss_jacobi(order, 0.0, -2.0 * s);
        const double scale = g.measure * std::pow(g.measure, -2.0 * s) / (2.0 * s);
        for (std::size_t i = 0; i < r.size(); ++i) {
          const Point x = V + r.x[i] * (W - V);
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) M(a, b) += scale * r.w[i] * g.bary(a, x) * g.bary(b, x);
        }
        count += static_cast<std::int64_t>(r.size());
      } else {
        const Rule1D& r = gauss_legendre(order);
        for (std::size_t i = 0; i < r.size(); ++i) {
          const Point x = g.P[0] + r.x[i] * (g.P[1] - g.P[0]);
          const double k = std::pow(std::abs(end - x.x()), -2.0 * s) / (2.0 * s);
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) M(a, b) += g.measure * r.w[i] * k * g.bary(a, x) * g.bary(b, x);
        }
        count += static_cast<std::int64_t>(r.size());
      }
    }
    if (points) *points += count;
    return M;
  }

  int boundary_count = 0;
  int special = 0;  // the lone boundary vertex, or the lone interior vertex
  for (int k = 0; k < 3; ++k) boundary_count += mesh.boundary[g.nodes[k]] ? 1 : 0;
  for (int k = 0; k < 3; ++k) {
    const bool on = mesh.boundary[g.nodes[k]];
    if ((boundary_count == 1 && on) || (boundary_count == 2 && !on)) special = k;
  }
  TriangleRule singular;
  const TriangleRule* rule = &triangle_rule(order);
  if (boundary_count == 1) {
    singular = triangle_rule_vertex_singular(order, 2.0 * s);
    rule = &singular;
  } else if (boundary_count == 2) {
    // Only the interior vertex is free and its hat squared vanishes to second
    // order on the boundary chord, so the rule absorbs (1-u)^{2-2s}; this keeps
    // the weight integrable for every s < 1.
    singular = triangle_rule_edge_singular(order, 2.0 * s - 2.0);
    rule = &singular;
  } else if (boundary_count == 3) {
    throw InvalidInput("element with all vertices on the sphere");
  }
  const int perm[3] = {special, (special + 1) % 3, (special + 2) % 3};
  bool free[3];
  for (int k = 0; k < 3; ++k) free[k] = !mesh.boundary[g.nodes[k]];
  for (std::size_t i = 0; i < rule->size(); ++i) {
    const auto& b = rule->bary[i];
    const Point x = b(0) * g.P[perm[0]] + b(1) * g.P[perm[1]] + b(2) * g.P[perm[2]];
    double lam[3];
    for (int k = 0; k < 3; ++k) lam[perm[k]] = b(k);
    const double w = rule->w[i] * g.measure * polytope_kappa(poly, x, s);
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c)
        if (free[a] && free[c]) M(a, c) += w * lam[a] * lam[c];
  }
  count += static_cast<std::int64_t>(rule->size());
  if (points) *points += count;
  return M;
}

}  // namespace fracsob::detail
