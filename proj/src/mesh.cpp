#include "fracsob/mesh.hpp"

#include "fracsob/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fracsob {

namespace {

constexpr double kPi = std::numbers::pi;

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double free_node_count(int N, int level) {
  if (N == 1) return std::ldexp(1.0, level + 1) - 1.0;
  const double M = std::ldexp(1.0, level);
  return 1.0 + 3.0 * M * (M - 1.0);
}

std::shared_ptr<BallMesh> build_interval(int level) {
  auto mesh = std::make_shared<BallMesh>();
  mesh->N = 1;
  mesh->level = level;
  const int segments = 1 << (level + 1);
  const double h = 2.0 / segments;
  // Geometric node k sits at -1 + k h; interior nodes get indices 0..segments-2.
  auto index_of = [segments](int k) {
    if (k == 0) return segments - 1;
    if (k == segments) return segments;
    return k - 1;
  };
  mesh->nodes.resize(segments + 1);
  mesh->boundary.assign(segments + 1, false);
  for (int k = 0; k <= segments; ++k) {
    const double x = (k == segments) ? 1.0 : -1.0 + k * h;
    mesh->nodes[index_of(k)] = Point(x, 0.0);
  }
  mesh->boundary[segments - 1] = true;
  mesh->boundary[segments] = true;
  mesh->num_free = segments - 1;
  mesh->elements.reserve(segments);
  for (int k = 0; k < segments; ++k) mesh->elements.push_back({index_of(k), index_of(k + 1), -1});
  return mesh;
}

std::shared_ptr<BallMesh> build_disk(int level) {
  auto mesh = std::make_shared<BallMesh>();
  mesh->N = 2;
  mesh->level = level;
  const int M = 1 << level;
  if (level == 0) {
    // The hexagon would have h = 1 and break the halving of h at level 1, so
    // the coarsest mesh is the inscribed square cut at the center.
    mesh->nodes = {Point(0.0, 0.0), Point(1.0, 0.0), Point(0.0, 1.0), Point(-1.0, 0.0), Point(0.0, -1.0)};
    mesh->boundary = {false, true, true, true, true};
    mesh->num_free = 1;
    for (int k = 0; k < 4; ++k) mesh->elements.push_back({0, 1 + k, 1 + (k + 1) % 4});
    return mesh;
  }

  // ring_start[j] is the index of node 0 on ring j; ring M (boundary) goes last.
  std::vector<int> ring_start(M + 1);
  int next = 0;
  ring_start[0] = next++;
  for (int j = 1; j < M; ++j) {
    ring_start[j] = next;
    next += 6 * j;
  }
  ring_start[M] = next;
  next += 6 * M;
  mesh->nodes.resize(next);
  mesh->boundary.assign(next, false);
  mesh->nodes[0] = Point(0.0, 0.0);
  for (int j = 1; j <= M; ++j) {
    const int n = 6 * j;
    const double r = (j == M) ? 1.0 : static_cast<double>(j) / M;
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * kPi * k / n;
      mesh->nodes[ring_start[j] + k] = Point(r * std::cos(t), r * std::sin(t));
      mesh->boundary[ring_start[j] + k] = (j == M);
    }
  }
  mesh->num_free = ring_start[M];

  auto add = [&](int a, int b, int c) {
    if (signed_area(mesh->nodes[a], mesh->nodes[b], mesh->nodes[c]) < 0.0) std::swap(b, c);
    mesh->elements.push_back({a, b, c});
  };
  for (int k = 0; k < 6; ++k) add(0, ring_start[1] + k, ring_start[1] + (k + 1) % 6);
  // Zipper between ring j-1 (na nodes) and ring j (nb nodes), advancing by angle.
  for (int j = 2; j <= M; ++j) {
    const int na = 6 * (j - 1);
    const int nb = 6 * j;
    int ia = 0;
    int ib = 0;
    while (ia < na || ib < nb) {
      const int a0 = ring_start[j - 1] + ia % na;
      const int b0 = ring_start[j] + ib % nb;
      // Close the next triangle with the shorter of the two candidate diagonals.
      bool advance_outer = ia == na;
      if (ia < na && ib < nb) {
        const Point& a1 = mesh->nodes[ring_start[j - 1] + (ia + 1) % na];
        const Point& b1 = mesh->nodes[ring_start[j] + (ib + 1) % nb];
        advance_outer = (b1 - mesh->nodes[a0]).squaredNorm() <= (a1 - mesh->nodes[b0]).squaredNorm();
      }
      if (advance_outer) {
        add(a0, b0, ring_start[j] + (ib + 1) % nb);
        ++ib;
      } else {
        add(a0, b0, ring_start[j - 1] + (ia + 1) % na);
        ++ia;
      }
    }
  }
  return mesh;
}

}  // namespace

double BallMesh::measure(int e) const {
  const auto& el = elements[e];
  if (N == 1) return std::abs(nodes[el[1]].x() - nodes[el[0]].x());
  return std::abs(signed_area(nodes[el[0]], nodes[el[1]], nodes[el[2]]));
}

double BallMesh::diameter(int e) const {
  const auto& el = elements[e];
  if (N == 1) return std::abs(nodes[el[1]].x() - nodes[el[0]].x());
  return std::max({(nodes[el[0]] - nodes[el[1]]).norm(), (nodes[el[1]] - nodes[el[2]]).norm(),
                   (nodes[el[2]] - nodes[el[0]]).norm()});
}

std::size_t estimated_matrix_bytes(int N, int level) {
  const double n = free_node_count(N, level);
  const double bytes = 8.0 * n * n;
  return bytes > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(bytes);
}

MeshPtr build_mesh(int N, int level, const MeshOptions& options) {
  if (N != 1 && N != 2) throw InvalidInput("only dimensions 1 and 2 are supported");
  if (level < 0) throw InvalidInput("refinement level must be nonnegative");
  const std::size_t bytes = (level > 40) ? static_cast<std::size_t>(1e18) : estimated_matrix_bytes(N, level);
  if (bytes > options.memory_budget_bytes) {
    std::ostringstream os;
    os << "level " << level << " in dimension " << N << " needs about " << bytes / (1024.0 * 1024.0)
       << " MiB for the dense form, over the budget of "
       << options.memory_budget_bytes / (1024.0 * 1024.0) << " MiB";
    throw InvalidInput(os.str());
  }
  std::shared_ptr<BallMesh> mesh = (N == 1) ? build_interval(level) : build_disk(level);
  const MeshQuality q = mesh_quality(*mesh);
  mesh->sigma = q.sigma;
  mesh->rho = q.rho;
  mesh->h = q.h;
  mesh->h_min = q.h_min;
  return mesh;
}

MeshQuality mesh_quality(const BallMesh& mesh) {
  MeshQuality q;
  q.h_min = 1e300;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double area = mesh.measure(e);
    if (!(area > 0.0)) {
      std::ostringstream os;
      os << "degenerate element " << e;
      throw InvalidInput(os.str());
    }
    const double d = mesh.diameter(e);
    double ratio = 1.0;  // a segment is its own inscribed ball
    if (mesh.N == 2) {
      const auto& el = mesh.elements[e];
      const double perimeter = (mesh.nodes[el[0]] - mesh.nodes[el[1]]).norm() +
                               (mesh.nodes[el[1]] - mesh.nodes[el[2]]).norm() +
                               (mesh.nodes[el[2]] - mesh.nodes[el[0]]).norm();
      const double inradius = 2.0 * area / perimeter;
      ratio = d / inradius;
    }
    q.sigma = std::max(q.sigma, ratio);
    q.h = std::max(q.h, d);
    q.h_min = std::min(q.h_min, d);
  }
  q.rho = q.h_min / q.h;
  return q;
}

FeFunction::FeFunction(MeshPtr m, Eigen::VectorXd v) : mesh(std::move(m)), values(std::move(v)) {
  if (!mesh) throw InvalidInput("finite element function needs a mesh");
  if (values.size() != mesh->num_nodes()) throw InvalidInput("value count does not match the mesh");
  for (int i = mesh->num_free; i < mesh->num_nodes(); ++i) {
    if (values(i) != 0.0) throw InvalidInput("boundary values of a finite element function must vanish");
  }
}

FeFunction FeFunction::from_free(MeshPtr m, const Eigen::VectorXd& free) {
  if (free.size() != m->num_free) throw InvalidInput("free coefficient count does not match the mesh");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m->num_nodes());
  v.head(m->num_free) = free;
  return FeFunction(std::move(m), std::move(v));
}

double FeFunction::evaluate(const Point& x) const {
  const BallMesh& m = *mesh;
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& el = m.elements[e];
    if (m.N == 1) {
      const double a = m.nodes[el[0]].x();
      const double b = m.nodes[el[1]].x();
      const double lo = std::min(a, b);
      const double hi = std::max(a, b);
      if (x.x() < lo || x.x() > hi) continue;
      const double t = (x.x() - a) / (b - a);
      return (1.0 - t) * values(el[0]) + t * values(el[1]);
    }
    const Point& A = m.nodes[el[0]];
    const Point& B = m.nodes[el[1]];
    const Point& C = m.nodes[el[2]];
    const double area = signed_area(A, B, C);
    const double l1 = signed_area(x, B, C) / area;
    const double l2 = signed_area(A, x, C) / area;
    const double l3 = 1.0 - l1 - l2;
    const double tol = -1e-14;
    if (l1 >= tol && l2 >= tol && l3 >= tol) {
      return l1 * values(el[0]) + l2 * values(el[1]) + l3 * values(el[2]);
    }
  }
  return 0.0;
}

FeFunction interpolate(const MeshPtr& mesh, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh->num_nodes());
  for (int i = 0; i < mesh->num_free; ++i) {
    const double fi = f(mesh->nodes[i]);
    if (!std::isfinite(fi)) {
      std::ostringstream os;
      os << "non-finite sample at node " << i;
      throw InvalidInput(os.str());
    }
    v(i) = fi;
  }
  return FeFunction(mesh, std::move(v));
}

void write_mesh(const BallMesh& mesh, std::ostream& os) {
  os.precision(17);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    os << i << ' ' << mesh.nodes[i].x();
    if (mesh.N == 2) os << ' ' << mesh.nodes[i].y();
    os << '\n';
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    os << e << ' ' << el[0] << ' ' << el[1];
    if (mesh.N == 2) os << ' ' << el[2];
    os << '\n';
  }
}

Eigen::MatrixXd barycentric_gradients(const BallMesh& mesh, int e) {
  const auto& el = mesh.elements[e];
  if (mesh.N == 1) {
    const double L = mesh.nodes[el[1]].x() - mesh.nodes[el[0]].x();
    Eigen::MatrixXd g(2, 1);
    g << -1.0 / L, 1.0 / L;
    return g;
  }
  Eigen::Matrix2d J;
  J.col(0) = mesh.nodes[el[1]] - mesh.nodes[el[0]];
  J.col(1) = mesh.nodes[el[2]] - mesh.nodes[el[0]];
  const Eigen::Matrix2d Jinv_t = J.inverse().transpose();
  Eigen::MatrixXd g(3, 2);
  g.row(1) = Jinv_t.col(0).transpose();
  g.row(2) = Jinv_t.col(1).transpose();
  g.row(0) = -g.row(1) - g.row(2);
  return g;
}

}  // namespace fracsob
