#include "fracsob/bubble.hpp"
#include "fracsob/errors.hpp"
#include "fracsob/gagliardo.hpp"
#include "fracsob/params.hpp"
#include "fracsob/solver.hpp"

#include "oracles.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace fracsob;

namespace {

MeshPtr three_element_mesh() {
  auto m = std::make_shared<BallMesh>();
  m->N = 1;
  m->nodes = {Point(-1.0 / 3.0, 0), Point(1.0 / 3.0, 0), Point(-1, 0), Point(1, 0)};
  m->elements = {{2, 0, -1}, {0, 1, -1}, {1, 3, -1}};
  m->boundary = {false, false, true, true};
  m->num_free = 2;
  const MeshQuality q = mesh_quality(*m);
  m->h = q.h;
  m->h_min = q.h_min;
  m->sigma = q.sigma;
  m->rho = q.rho;
  return m;
}

// Boundary nodes of the mesh in angular order: the polygon B_h.
std::vector<Eigen::Vector2d> boundary_polygon(const BallMesh& m) {
  std::vector<Eigen::Vector2d> poly;
  for (int i = m.num_free; i < m.num_nodes(); ++i) poly.push_back(m.nodes[i]);
  std::sort(poly.begin(), poly.end(), [](const auto& a, const auto& b) { return std::atan2(a.y(), a.x()) < std::atan2(b.y(), b.x()); });
  return poly;
}

// Exit distance from x along w for the convex polygon.
double polygon_exit(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& x, const Eigen::Vector2d& w) {
  auto cross = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q) { return p.x() * q.y() - p.y() * q.x(); };
  double best = 1e300;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Eigen::Vector2d a = poly[k], e = poly[(k + 1) % poly.size()] - a;
    const double den = cross(w, e);
    if (den == 0.0) continue;
    const double t = cross(a - x, e) / den, u = cross(a - x, w) / den;
    if (t > 0 && u >= -1e-14 && u <= 1 + 1e-14) best = std::min(best, t);
  }
  return best;
}

double polygon_kappa(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& x, double s) {
  std::vector<double> cuts;
  for (const auto& p : poly) {
    const Eigen::Vector2d d = p - x;
    cuts.push_back(std::atan2(d.y(), d.x()));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(cuts.front() + 2 * oracle::kPi);
  double v = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    v += oracle::gk([&](double t) { return std::pow(polygon_exit(poly, x, {std::cos(t), std::sin(t)}), -2 * s); },
                    cuts[k], cuts[k + 1], 1e-12, 6);
  return v / (2 * s);
}

double polygon_kappa(const BallMesh& m, const Eigen::Vector2d& x, double s) {
  return polygon_kappa(boundary_polygon(m), x, s);
}

}  // namespace

TEST(ComplementWeight, ClosedForms) {
  for (double s : {0.1, 0.25, 0.4}) EXPECT_NEAR(complement_weight(Point(0, 0), 1, s), 1.0 / s, 1e-13);
  for (double s : {0.1, 0.5, 0.9}) EXPECT_NEAR(complement_weight(Point(0, 0), 2, s), oracle::kPi / s, 1e-12);
  EXPECT_NEAR(complement_weight(Point(0.5, 0), 1, 0.25), (std::pow(0.5, -0.5) + std::pow(1.5, -0.5)) / 0.5, 1e-14);
  EXPECT_THROW(complement_weight(Point(1.0 - 1e-13, 0), 1, 0.25), InvalidInput);
  EXPECT_THROW(complement_weight(Point(0.0, 1.0), 2, 0.25), InvalidInput);
}

TEST(ComplementWeight, DiskAgainstDirectIntegral) {
  // kappa(x) = int_{|y|>1} |x-y|^{-2-2s} dy in polar coordinates around the origin.
  const double s = 0.3;
  const Point x(0.4, 0.3);
  const double direct = oracle::gk(
      [&](double t) {
        return oracle::ts(
            [&](double u) {  // r = 1/u maps (1, inf) to (0, 1)
              const double r = 1.0 / u;
              const Point y(r * std::cos(t), r * std::sin(t));
              return r * std::pow((x - y).norm(), -2 - 2 * s) * r * r;
            },
            0.0, 1.0, 1e-12);
      },
      0.0, 2 * oracle::kPi, 1e-12);
  EXPECT_NEAR(complement_weight(x, 2, s) / direct, 1.0, 1e-9);
}

TEST(ComplementWeight, MonotoneAndRotationInvariant) {
  for (int N : {1, 2}) {
    double prev = 0.0;
    for (double r = 0.0; r < 0.999; r += 0.037) {
      const double v = complement_weight(Point(r, 0), N, 0.35);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
  for (double r : {0.2, 0.7, 0.95}) {
    const double ref = complement_weight(Point(r, 0), 2, 0.5);
    for (int k = 1; k < 8; ++k) {
      const double t = 2 * oracle::kPi * k / 8 + 0.1;
      EXPECT_NEAR(complement_weight(Point(r * std::cos(t), r * std::sin(t)), 2, 0.5), ref, 1e-8 * ref);
    }
  }
}

TEST(ComplementWeight, PolygonVersion) {
  const double s = 0.5;
  for (int level : {1, 2, 3}) {
    const MeshPtr m = build_mesh(2, level);
    const int sides = 6 << level;
    for (const Point x : {Point(0.1, 0.2), Point(-0.5, 0.3), Point(0.0, 0.8)}) {
      const double kh = polytope_complement_weight(*m, x, s);
      EXPECT_NEAR(kh / polygon_kappa(*m, x, s), 1.0, 1e-9);
      EXPECT_GT(kh, complement_weight(x, 2, s));
      // Symmetries of the inscribed polygon.
      for (int k = 1; k < 8; ++k) {
        const double t = 2 * oracle::kPi * k / sides;
        const Point y(std::cos(t) * x.x() - std::sin(t) * x.y(), std::sin(t) * x.x() + std::cos(t) * x.y());
        EXPECT_NEAR(polytope_complement_weight(*m, y, s), kh, 1e-10 * kh);
      }
    }
  }
  // Converges to the disk weight as the polygon fills the disk.
  const Point x(0.3, -0.2);
  const double k0 = complement_weight(x, 2, s);
  double prev = 1e300;
  for (int level = 1; level <= 6; ++level) {
    const double gap = polytope_complement_weight(*build_mesh(2, level), x, s) - k0;
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev / k0, 1e-3);
  const MeshPtr m1 = build_mesh(1, 3);
  EXPECT_NEAR(polytope_complement_weight(*m1, Point(0.3, 0), 0.25), complement_weight(Point(0.3, 0), 1, 0.25), 1e-14);
}

TEST(Assemble, OneDimensionalOracle) {
  std::vector<MeshPtr> meshes = {three_element_mesh()};
  for (int level = 0; level <= 2; ++level) meshes.push_back(build_mesh(1, level));
  for (const auto& m : meshes)
    for (double s : {0.1, 0.25, 0.4}) {
      const NonlocalForm f = assemble(m, s);
      const Eigen::MatrixXd ref = oracle::stiffness_1d(*m, s);
      for (int i = 0; i < f.size(); ++i)
        for (int j = 0; j < f.size(); ++j)
          EXPECT_NEAR(f.matrix(i, j), ref(i, j), 1e-4 * std::abs(ref(i, j))) << m->num_elements() << " " << s;
    }
}

TEST(Assemble, SymmetricPositiveDefinite) {
  for (auto [N, level, s] : {std::tuple{1, 6, 0.25}, {1, 4, 0.45}, {2, 2, 0.5}, {2, 2, 0.2}, {2, 1, 0.9}}) {
    const NonlocalForm f = assemble(build_mesh(N, level), s);
    const double scale = f.matrix.cwiseAbs().maxCoeff();
    EXPECT_LE((f.matrix - f.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-12 * scale);
    EXPECT_LE(f.report.symmetry_error, 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.matrix);
    EXPECT_GT(es.eigenvalues()(0), 0.0);
  }
}

TEST(Assemble, DeterministicAcrossThreadCounts) {
  QuadSpec one, many;
  one.threads = 1;
  many.threads = 4;
  for (int N : {1, 2}) {
    const MeshPtr m = build_mesh(N, N == 1 ? 5 : 2);
    const NonlocalForm a = assemble(m, 0.3, one), b = assemble(m, 0.3, many);
    EXPECT_EQ((a.matrix - b.matrix).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Assemble, PairOracle2D) {
  const MeshPtr m = build_mesh(2, 1);
  const double s = 0.5;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::array<bool, 5> seen{};
  for (int T = 0; T < m->num_elements(); ++T)
    for (int Tp = 0; Tp < m->num_elements(); ++Tp) {
      const PairMatrix pm = pair_matrix(*m, T, Tp, s, {});
      const int cat = static_cast<int>(pm.category);
      if (seen[cat]) continue;
      seen[cat] = true;
      std::map<int, double> values;
      Eigen::VectorXd v(pm.nodes.size());
      for (std::size_t k = 0; k < pm.nodes.size(); ++k) values[pm.nodes[k]] = v(k) = U(rng);
      const double ref = oracle::pair_form_2d(*m, T, Tp, s, values);
      EXPECT_NEAR(v.dot(pm.values * v), ref, 1e-4 * std::abs(ref)) << category_name(pm.category);
    }
  for (int c = 0; c < 5; ++c) EXPECT_TRUE(seen[c]) << c;
}

TEST(Assemble, ComplementElementMatrix2D) {
  const MeshPtr m = build_mesh(2, 1);
  const double s = 0.5;
  const auto poly = boundary_polygon(*m);
  for (int T = 0; T < m->num_elements(); ++T) {
    const Eigen::MatrixXd M = complement_element_matrix(*m, T, s, {});
    std::array<Point, 3> P;
    for (int k = 0; k < 3; ++k) P[k] = m->nodes[m->elements[T][k]];
    const Point e1 = P[1] - P[0], e2 = P[2] - P[0];
    const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
    std::map<std::pair<double, double>, double> kappa_cache;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (b < a) {
          EXPECT_NEAR(M(a, b), M(b, a), 1e-14 * std::abs(M(a, b)));
          continue;
        }
        if (m->boundary[m->elements[T][a]] || m->boundary[m->elements[T][b]]) {
          EXPECT_EQ(M(a, b), 0.0);
          continue;
        }
        auto lam = [&](int k, double u, double v) { return k == 0 ? 1 - u - v : (k == 1 ? u : v); };
        // Every entry samples the same abscissas, so the weight is cached.
        auto weight = [&](double u, double v) {
          auto [it, fresh] = kappa_cache.try_emplace({u, v}, 0.0);
          if (fresh) it->second = polygon_kappa(poly, P[0] + u * e1 + v * e2, s);
          return it->second;
        };
        const double ref = jac * oracle::ts(
                                     [&](double u) {
                                       return oracle::ts(
                                           [&](double v) {
                                             const double l = lam(a, u, v) * lam(b, u, v);
                                             return l == 0.0 ? 0.0 : l * weight(u, v);
                                           },
                                           0.0, 1.0 - u, 1e-7);
                                     },
                                     0.0, 1.0, 1e-7);
        EXPECT_NEAR(M(a, b), ref, 1e-4 * ref) << T << " " << a << " " << b;
      }
  }
}

TEST(Seminorm, BasicProperties) {
  const MeshPtr m = build_mesh(1, 5);
  const NonlocalForm f = assemble(m, 0.25);
  EXPECT_EQ(seminorm_sq(f, FeFunction::from_free(m, Eigen::VectorXd::Zero(m->num_free))), 0.0);
  const FeFunction u = interpolate(m, [](const Point& x) { return std::cos(1.3 * x.x()) - std::cos(1.3); });
  const FeFunction u3(m, 3.0 * u.values);
  EXPECT_NEAR(seminorm_sq(f, u3), 9.0 * seminorm_sq(f, u), 1e-13 * seminorm_sq(f, u3));
  EXPECT_GT(seminorm_sq(f, u), 0.0);
  EXPECT_THROW(seminorm_sq(f, FeFunction::from_free(build_mesh(1, 5), u.free_values())), InvalidInput);
}

TEST(Seminorm, SharpInequalityForInterpolatedBubble) {
  for (auto [N, level, s] : {std::tuple{1, 7, 0.25}, {1, 6, 0.3}, {2, 3, 0.5}}) {
    const MeshPtr m = build_mesh(N, level);
    const NonlocalForm f = assemble(m, s);
    EXPECT_GE(rayleigh_quotient(f, warm_start(m, s)), exact_constant(N, s));
  }
}

TEST(Seminorm, RefinementConsistency) {
  const TruncatedBubble psi = truncated_bubble(1, 0.25, 1.0, 0.5);
  std::vector<double> v;
  for (int level = 3; level <= 8; ++level) {
    const MeshPtr m = build_mesh(1, level);
    v.push_back(seminorm_sq(assemble(m, 0.25), interpolate(m, [&](const Point& x) { return psi.evaluate(x); })));
  }
  for (std::size_t k = 2; k < v.size(); ++k) EXPECT_LT(std::abs(v[k] - v[k - 1]), std::abs(v[k - 1] - v[k - 2]));
}

TEST(Assemble, ReportAndTriplets) {
  const MeshPtr m = build_mesh(2, 2);
  const NonlocalForm f = assemble(m, 0.4);
  for (int c = 0; c < 5; ++c) EXPECT_GT(f.report.pairs[c], 0) << c;
  EXPECT_GT(f.report.complement_points, 0);
  std::int64_t total = 0;
  for (auto p : f.report.pairs) total += p;
  EXPECT_EQ(total, std::int64_t(m->num_elements()) * (m->num_elements() + 1) / 2);
  std::ostringstream os;
  write_triplets(f, os);
  std::istringstream is(os.str());
  int i, j;
  double val;
  int count = 0;
  while (is >> i >> j >> val) {
    EXPECT_EQ(val, f.matrix(i, j));
    ++count;
  }
  EXPECT_EQ(count, f.size() * f.size());
}

TEST(Assemble, KernelBudgetEnforced) {
  QuadSpec q;
  q.max_kernel_evals = 10;
  EXPECT_THROW(assemble(build_mesh(1, 3), 0.25, q), NumericalFailure);
}

TEST(Assemble, MeshOnlyDropsExteriorTerm) {
  const MeshPtr m = build_mesh(1, 4);
  const NonlocalForm whole = assemble(m, 0.25), inner = assemble(m, 0.25, {}, FormDomain::MeshOnly);
  const Eigen::MatrixXd diff = whole.matrix - inner.matrix;
  // The exterior term couples only overlapping hats, so the difference is tridiagonal.
  for (int i = 0; i < diff.rows(); ++i)
    for (int j = 0; j < diff.cols(); ++j)
      if (std::abs(i - j) > 1) EXPECT_NEAR(diff(i, j), 0.0, 1e-14);
  EXPECT_GT(diff.diagonal().minCoeff(), 0.0);
}
