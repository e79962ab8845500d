#include "fracsob/gagliardo.hpp"

#include "fracsob/errors.hpp"
#include "fracsob/params.hpp"
#include "pair_kernels.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fracsob {

namespace {

constexpr double kPi = std::numbers::pi;

// One element pair's contribution, already scaled, over at most six nodes.
struct Block {
  std::array<int, 6> nodes{};
  int n = 0;
  std::array<double, 36> values{};
};

}  // namespace

QuadSpec QuadSpec::resolved(int N) const {
  QuadSpec q = *this;
  if (q.far_order <= 0) q.far_order = (N == 1) ? 4 : 3;
  if (q.singular_order <= 0) q.singular_order = (N == 1) ? 8 : 5;
  if (q.angular_order <= 0) q.angular_order = 12;
  if (q.complement_order <= 0) q.complement_order = (N == 1) ? 8 : 6;
  if (q.near_increment < 0) throw InvalidInput("near-pair order increment must be nonnegative");
  return q;
}

QuadSpec QuadSpec::refined(int by) const {
  QuadSpec q = *this;
  q.far_order += by;
  q.singular_order += by;
  q.angular_order += by;
  q.complement_order += by;
  return q;
}

std::string category_name(PairCategory c) {
  switch (c) {
    case PairCategory::Identical: return "identical";
    case PairCategory::Edge: return "edge-touching";
    case PairCategory::Vertex: return "vertex-touching";
    case PairCategory::NearDisjoint: return "near-disjoint";
    case PairCategory::FarDisjoint: return "far-disjoint";
  }
  return "unknown";
}

double complement_weight(const Point& x, int N, double s) {
  check_problem(N, s);
  const double r = (N == 1) ? std::abs(x.x()) : x.norm();
  if (r >= 1.0 - 1e-12) throw InvalidInput("complement weight diverges at the sphere");
  if (N == 1) return (std::pow(1.0 - x.x(), -2.0 * s) + std::pow(1.0 + x.x(), -2.0 * s)) / (2.0 * s);
  // (1/2s) int_0^{2pi} r*(theta)^{-2s}, with r* the distance to the circle along
  // theta; the periodic trapezoid rule is refined until it settles.
  auto sample = [&](double t) {
    const double w = x.x() * std::cos(t) + x.y() * std::sin(t);
    const double rs = -w + std::sqrt(1.0 - r * r + w * w);
    return std::pow(rs, -2.0 * s);
  };
  int n = 64;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample(2.0 * kPi * i / n);
  double prev = sum * 2.0 * kPi / n;
  while (n < (1 << 22)) {
    for (int i = 0; i < n; ++i) sum += sample(2.0 * kPi * (i + 0.5) / n);
    n *= 2;
    const double cur = sum * 2.0 * kPi / n;
    if (std::abs(cur - prev) <= 1e-15 * std::abs(cur)) return cur / (2.0 * s);
    prev = cur;
  }
  throw NumericalFailure("complement weight quadrature did not settle", std::abs(prev));
}

double polytope_complement_weight(const BallMesh& mesh, const Point& x, double s) {
  check_problem(mesh.N, s);
  return detail::polytope_kappa(detail::polytope_of(mesh), x, s);
}

PairMatrix pair_matrix(const BallMesh& mesh, int T, int Tp, double s, const QuadSpec& quad) {
  check_problem(mesh.N, s);
  std::vector<detail::ElementGeom> geoms;
  geoms.reserve(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) geoms.emplace_back(mesh, e);
  return detail::pair_matrix(geoms, T, Tp, s, quad.resolved(mesh.N));
}

Eigen::MatrixXd complement_element_matrix(const BallMesh& mesh, int T, double s, const QuadSpec& quad,
                                          std::int64_t* points) {
  check_problem(mesh.N, s);
  const detail::ElementGeom g(mesh, T);
  return detail::complement_matrix(g, mesh, detail::polytope_of(mesh), s, quad.resolved(mesh.N), points);
}

NonlocalForm assemble(const MeshPtr& mesh, double s, const QuadSpec& quad_in, FormDomain domain) {
  check_problem(mesh->N, s);
  const auto start = std::chrono::steady_clock::now();
  const QuadSpec quad = quad_in.resolved(mesh->N);
  const int E = mesh->num_elements();
  const int nfree = mesh->num_free;

  std::vector<detail::ElementGeom> geoms;
  geoms.reserve(E);
  for (int e = 0; e < E; ++e) geoms.emplace_back(*mesh, e);
  const detail::Polytope poly = detail::polytope_of(*mesh);

  NonlocalForm form;
  form.mesh = mesh;
  form.s = s;
  form.quad = quad;
  form.domain = domain;
  form.matrix = Eigen::MatrixXd::Zero(nfree, nfree);
  AssemblyReport& rep = form.report;
  const double factor = s * (1.0 - s);

  // Rows of the pair triangle are processed in waves: local blocks are computed
  // in parallel into a buffer, then added to the matrix serially in a fixed
  // order, so the result does not depend on the thread count.
  const std::size_t target_blocks = std::size_t{1} << 17;
  const int wave = std::max(1, static_cast<int>(target_blocks / std::max(1, E)));
  std::vector<Block> buffer;
  std::vector<std::size_t> offset;
  std::atomic<std::int64_t> evals_total{0};
  std::array<std::atomic<std::int64_t>, 5> pair_count{};
  std::array<std::atomic<std::int64_t>, 5> eval_count{};
  std::atomic<std::int64_t> complement_points{0};

#ifdef _OPENMP
  const int threads = quad.threads > 0 ? quad.threads : omp_get_max_threads();
#endif

  for (int t0 = 0; t0 < E; t0 += wave) {
    const int t1 = std::min(E, t0 + wave);
    offset.assign(t1 - t0 + 1, 0);
    for (int T = t0; T < t1; ++T) offset[T - t0 + 1] = offset[T - t0] + static_cast<std::size_t>(E - T);
    buffer.assign(offset.back(), Block{});

    std::exception_ptr failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
    for (int T = t0; T < t1; ++T) {
      try {
        for (int Tp = T; Tp < E; ++Tp) {
          PairMatrix pm = detail::pair_matrix(geoms, T, Tp, s, quad);
          const int cat = static_cast<int>(pm.category);
          pair_count[cat] += 1;
          eval_count[cat] += pm.kernel_evals;
          const std::int64_t total = (evals_total += pm.kernel_evals);
          if (total > quad.max_kernel_evals) {
            std::ostringstream os;
            os << "quadrature budget of " << quad.max_kernel_evals << " kernel evaluations exceeded at "
               << category_name(pm.category) << " pair (" << T << ", " << Tp << ")";
            throw NumericalFailure(os.str());
          }
          const double scale = (T == Tp ? 1.0 : 2.0) * factor;
          Eigen::MatrixXd local = pm.values * scale;
          if (T == Tp && domain == FormDomain::WholeSpace) {
            std::int64_t pts = 0;
            local += (2.0 * factor) * detail::complement_matrix(geoms[T], *mesh, poly, s, quad, &pts);
            complement_points += pts;
          }
          if (!local.allFinite()) {
            std::ostringstream os;
            os << "non-finite entry in " << category_name(pm.category) << " pair (" << T << ", " << Tp << ")";
            throw NumericalFailure(os.str());
          }
          Block& b = buffer[offset[T - t0] + static_cast<std::size_t>(Tp - T)];
          b.n = static_cast<int>(pm.nodes.size());
          for (int i = 0; i < b.n; ++i) {
            b.nodes[i] = pm.nodes[i];
            for (int j = 0; j < b.n; ++j) b.values[i * 6 + j] = local(i, j);
          }
        }
      } catch (...) {
#ifdef _OPENMP
#pragma omp critical(fracsob_assembly_failure)
#endif
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    for (const Block& b : buffer) {
      for (int i = 0; i < b.n; ++i) {
        const int gi = b.nodes[i];
        if (gi >= nfree) continue;
        for (int j = 0; j < b.n; ++j) {
          const int gj = b.nodes[j];
          if (gj >= nfree) continue;
          form.matrix(gi, gj) += b.values[i * 6 + j];
        }
      }
    }
  }

  for (int c = 0; c < 5; ++c) {
    rep.pairs[c] = pair_count[c];
    rep.kernel_evals[c] = eval_count[c];
  }
  rep.complement_points = complement_points;
  const double amax = form.matrix.cwiseAbs().maxCoeff();
  rep.symmetry_error = amax > 0.0 ? (form.matrix - form.matrix.transpose()).cwiseAbs().maxCoeff() / amax : 0.0;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return form;
}

double seminorm_sq(const NonlocalForm& form, const FeFunction& u) {
  if (u.mesh != form.mesh) throw InvalidInput("function and form live on different meshes");
  const Eigen::VectorXd c = u.free_values();
  return c.dot(form.matrix * c);
}

void write_triplets(const NonlocalForm& form, std::ostream& os) {
  os.precision(17);
  for (int i = 0; i < form.size(); ++i)
    for (int j = 0; j < form.size(); ++j)
      if (form.matrix(i, j) != 0.0) os << i << ' ' << j << ' ' << form.matrix(i, j) << '\n';
}

}  // namespace fracsob
