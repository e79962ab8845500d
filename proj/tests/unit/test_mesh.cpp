#include "fracsob/bubble.hpp"
#include "fracsob/errors.hpp"
#include "fracsob/mesh.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace fracsob;

TEST(Mesh, IntervalLevelZero) {
  const MeshPtr m = build_mesh(1, 0);
  std::vector<double> xs;
  for (const auto& p : m->nodes) xs.push_back(p.x());
  std::sort(xs.begin(), xs.end());
  EXPECT_EQ(xs, (std::vector<double>{-1.0, 0.0, 1.0}));
  EXPECT_EQ(m->num_free, 1);
  EXPECT_DOUBLE_EQ(m->h, 1.0);
  EXPECT_DOUBLE_EQ(m->sigma, 1.0);
  EXPECT_DOUBLE_EQ(m->rho, 1.0);
}

TEST(Mesh, IntervalSizesAndNesting) {
  for (int k = 0; k <= 8; ++k) {
    const MeshPtr m = build_mesh(1, k);
    EXPECT_DOUBLE_EQ(m->h, std::ldexp(1.0, -k));
    EXPECT_DOUBLE_EQ(m->rho, 1.0);
    if (k == 8) break;
    const MeshPtr f = build_mesh(1, k + 1);
    std::set<double> fine;
    for (const auto& p : f->nodes) fine.insert(p.x());
    for (const auto& p : m->nodes) EXPECT_TRUE(fine.count(p.x())) << p.x();
  }
}

TEST(Mesh, FreeNodesFirst) {
  for (int N : {1, 2})
    for (int k = 0; k <= 3; ++k) {
      const MeshPtr m = build_mesh(N, k);
      for (int i = 0; i < m->num_nodes(); ++i) EXPECT_EQ(m->boundary[i], i >= m->num_free);
    }
}

TEST(Mesh, DiskQualityAudit) {
  double prev_h = 0.0;
  MeshOptions unlimited;
  unlimited.memory_budget_bytes = ~std::size_t{0};
  for (int k = 0; k <= 8; ++k) {
    const MeshPtr m = build_mesh(2, k, unlimited);
    EXPECT_LE(m->sigma, 8.0) << k;
    EXPECT_GE(m->rho, 0.25) << k;
    for (int i = m->num_free; i < m->num_nodes(); ++i) EXPECT_LE(std::abs(m->nodes[i].norm() - 1.0), 1e-14);
    for (int i = 0; i < m->num_free; ++i) EXPECT_LT(m->nodes[i].norm(), 1.0 - 1e-3);
    if (k > 0) EXPECT_NEAR(m->h / prev_h, 0.5, 0.1) << k;
    prev_h = m->h;
  }
  const MeshPtr m3 = build_mesh(2, 3);
  const MeshQuality q = mesh_quality(*m3);
  EXPECT_EQ(q.sigma, m3->sigma);
  EXPECT_EQ(q.h, m3->h);
}

TEST(Mesh, DiskConformityAndArea) {
  for (int k = 0; k <= 5; ++k) {
    const MeshPtr m = build_mesh(2, k);
    std::map<std::pair<int, int>, int> faces;
    double area = 0.0;
    for (int e = 0; e < m->num_elements(); ++e) {
      area += m->measure(e);
      const auto& el = m->elements[e];
      for (int a = 0; a < 3; ++a) {
        int i = el[a], j = el[(a + 1) % 3];
        if (i > j) std::swap(i, j);
        ++faces[{i, j}];
      }
    }
    for (const auto& [f, count] : faces) {
      const bool on_sphere = m->boundary[f.first] && m->boundary[f.second];
      EXPECT_EQ(count, on_sphere ? 1 : 2);
    }
    // Inscribed regular polygon: the square at level 0, then 6 * 2^k sides.
    const double n = k == 0 ? 4.0 : 6.0 * std::ldexp(1.0, k);
    EXPECT_NEAR(area, 0.5 * n * std::sin(2.0 * M_PI / n), 1e-12);
  }
}

TEST(Mesh, EquilateralShapeRatio) {
  BallMesh m;
  m.N = 2;
  m.nodes = {Point(0, 0), Point(0.5, 0), Point(0.25, 0.25 * std::sqrt(3.0))};
  m.elements = {{0, 1, 2}};
  m.boundary = {false, false, false};
  EXPECT_NEAR(mesh_quality(m).sigma, 2.0 * std::sqrt(3.0), 1e-12);
  m.nodes[2] = Point(1.0, 0.0);
  EXPECT_THROW(mesh_quality(m), InvalidInput);
}

TEST(Mesh, MemoryBudget) {
  MeshOptions small;
  small.memory_budget_bytes = 1 << 20;
  EXPECT_NO_THROW(build_mesh(1, 7, small));
  try {
    build_mesh(2, 6, small);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("MiB"), std::string::npos);
  }
  EXPECT_THROW(build_mesh(1, -1), InvalidInput);
  EXPECT_THROW(build_mesh(3, 1), InvalidInput);
}

TEST(Interpolate, AffineReproducedIn1D) {
  const MeshPtr m = build_mesh(1, 3);
  // Zero on the sphere and affine on each half: the tent 1 - |x|.
  const FeFunction u = interpolate(m, [](const Point& x) { return 1.0 - std::abs(x.x()); });
  for (double x = -1.0; x <= 1.0; x += 0.01) EXPECT_NEAR(u.evaluate(Point(x, 0)), 1.0 - std::abs(x), 1e-14);
}

TEST(Interpolate, NodalAndBoundaryBehaviour) {
  const MeshPtr m = build_mesh(1, 5);
  const Bubble b(1, 0.25, 1.0, 1.0);
  const FeFunction u = interpolate(m, [&](const Point& x) { return b.evaluate(x); });
  for (int i = 0; i < m->num_free; ++i) EXPECT_EQ(u.values(i), b.evaluate(m->nodes[i]));
  for (int i = m->num_free; i < m->num_nodes(); ++i) EXPECT_EQ(u.values(i), 0.0);

  for (int N : {1, 2}) {
    const MeshPtr mm = build_mesh(N, 3);
    const TruncatedBubble t = truncated_bubble(N, 0.25, normalize_lambda(0.2, N, 0.25), 0.2);
    for (int i = mm->num_free; i < mm->num_nodes(); ++i) EXPECT_NEAR(t.evaluate(mm->nodes[i]), 0.0, 1e-14);
  }
  EXPECT_THROW(interpolate(m, [](const Point&) { return std::nan(""); }), InvalidInput);
}

TEST(Interpolate, Projection) {
  const MeshPtr m = build_mesh(2, 3);
  const FeFunction u = interpolate(m, [](const Point& x) { return std::cos(3.0 * x.x()) * (1.0 - x.squaredNorm()); });
  const FeFunction v = interpolate(m, [&](const Point& x) { return u.evaluate(x); });
  EXPECT_LE((u.values - v.values).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_EQ(u.evaluate(Point(1.5, 0.0)), 0.0);
}

TEST(Mesh, FeFunctionRejectsBoundaryValues) {
  const MeshPtr m = build_mesh(1, 1);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m->num_nodes());
  EXPECT_THROW(FeFunction(m, v), InvalidInput);
}

TEST(Mesh, ExportFormat) {
  const MeshPtr m = build_mesh(2, 1);
  std::ostringstream os;
  write_mesh(*m, os);
  std::istringstream is(os.str());
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) ++lines;
  EXPECT_EQ(lines, m->num_nodes() + m->num_elements());
}

TEST(Mesh, BarycentricGradientsSumToZero) {
  const MeshPtr m = build_mesh(2, 2);
  for (int e = 0; e < m->num_elements(); ++e) {
    const Eigen::MatrixXd g = barycentric_gradients(*m, e);
    EXPECT_LE(g.colwise().sum().norm(), 1e-12);
  }
}
