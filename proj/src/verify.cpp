// Property suites for the analytic lemmas: interpolation error rates, the
// Hessian covering bound, the minimizing sequence and classical inequalities.

#include "fracsob/errors.hpp"
#include "fracsob/experiments.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/params.hpp"
#include "fracsob/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace fracsob {

namespace {

constexpr double kPi = std::numbers::pi;

Point element_point(const BallMesh& m, int e, const Eigen::Vector3d& bary) {
  Point x = Point::Zero();
  for (int k = 0; k <= m.N; ++k) x += bary(k) * m.nodes[m.elements[e][k]];
  return x;
}

InterpErrorRecord interp_error(int N, double s, double q, double c, int level) {
  const MeshPtr mesh = build_mesh(N, level);
  if (!(mesh->h < c)) throw InvalidInput("interpolation study needs h < c at every level");
  const TruncatedBubble psi = truncated_bubble(N, s, normalize_lambda(c, N, s), c);
  const FeFunction u = interpolate(mesh, [&](const Point& x) { return psi.evaluate(x); });
  const QuadratureRule rule = QuadratureRule::make(N, 8);
  double lq = 0.0;
  double grad = 0.0;
  for (int e = 0; e < mesh->num_elements(); ++e) {
    const Eigen::MatrixXd G = barycentric_gradients(*mesh, e);
    Eigen::VectorXd du = Eigen::VectorXd::Zero(N);
    for (int k = 0; k <= N; ++k) du += u.values(mesh->elements[e][k]) * G.row(k).transpose();
    const double meas = mesh->measure(e);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Point x = element_point(*mesh, e, rule.bary[i]);
      double uh = 0.0;
      for (int k = 0; k <= N; ++k) uh += rule.bary[i](k) * u.values(mesh->elements[e][k]);
      const double w = rule.w[i] * meas;
      lq += w * std::pow(std::abs(psi.evaluate(x) - uh), q);
      grad += w * std::pow((psi.gradient(x) - du).norm(), q);
    }
  }
  InterpErrorRecord r;
  r.level = level;
  r.h = mesh->h;
  r.c = c;
  r.lq_error = std::pow(lq, 1.0 / q);
  r.grad_error = std::pow(grad, 1.0 / q);
  return r;
}

// A random draw of (lambda, c, X0, x) for the covering test, as rho = |x-X0|/c.
struct CoveringSample {
  Bubble b;
  Point x;
  double rho;
};

CoveringSample draw_covering(int N, double s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double lambda = (U(rng) < 0.5 ? -1.0 : 1.0) * std::exp(std::log(0.1) + U(rng) * std::log(100.0));
  const double c = std::exp(std::log(0.05) + U(rng) * std::log(20.0));
  Point X0 = Point::Zero();
  Point dir = Point::Zero();
  double rho;
  if (N == 1) {
    X0(0) = 2.0 * U(rng) - 1.0;
    dir(0) = U(rng) < 0.5 ? -1.0 : 1.0;
    // [0, 1/2] union [1, 4], uniform by length.
    const double t = 3.5 * U(rng);
    rho = t <= 0.5 ? t : t + 0.5;
  } else {
    const double r = std::sqrt(U(rng));
    const double a = 2.0 * kPi * U(rng);
    X0 << r * std::cos(a), r * std::sin(a);
    const double th = 2.0 * kPi * U(rng);
    dir << std::cos(th), std::sin(th);
    rho = 4.0 * U(rng);
  }
  CoveringSample out{Bubble(N, s, lambda, c, X0), X0 + c * rho * dir, rho};
  return out;
}

double covering_ratio(const CoveringSample& smp) {
  const Bubble& b = smp.b;
  const int N = b.N;
  const Eigen::MatrixXd H = b.hessian(smp.x);
  std::vector<Eigen::VectorXd> dict;
  for (int k = 0; k < N; ++k) dict.push_back(Eigen::VectorXd::Unit(N, k));
  const Eigen::VectorXd r = (smp.x - b.center).head(N);
  if (r.norm() > 0.0) dict.push_back(r / r.norm());
  if (N == 2)
    for (int k = 0; k < 16; ++k) {
      Eigen::VectorXd xi(2);
      xi << std::cos(kPi * k / 16.0), std::sin(kPi * k / 16.0);
      dict.push_back(xi);
    }
  double best = 0.0;
  for (const auto& xi : dict) best = std::max(best, std::abs(xi.dot(H * xi)));
  const double k = N - 2.0 * b.s;
  const double scale = std::abs(b.lambda) / (b.c * b.c) * std::pow(1.0 + smp.rho * smp.rho, -(k + 2.0) / 2.0);
  return best / scale;
}

// Norms of a bubble and its derivatives on an axis-aligned cube, composite Gauss.
struct CubeNorms {
  double u = 0.0, du = 0.0, d2u = 0.0;
};

CubeNorms cube_norms(const Bubble& b, const Point& center, double side) {
  const int N = b.N;
  const int pieces = 32;
  const Rule1D& g = gauss_legendre(6);
  std::vector<double> t, w;
  for (int p = 0; p < pieces; ++p)
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.push_back(center(0) - 0.5 * side + side * (p + g.x[i]) / pieces);
      w.push_back(side * g.w[i] / pieces);
    }
  CubeNorms acc;
  auto add = [&](const Point& x, double wt) {
    const double v = b.evaluate(x);
    acc.u += wt * v * v;
    acc.du += wt * b.gradient(x).squaredNorm();
    const double f = b.hessian_frobenius(x);
    acc.d2u += wt * f * f;
  };
  if (N == 1) {
    for (std::size_t i = 0; i < t.size(); ++i) add(Point(t[i], 0.0), w[i]);
  } else {
    const double shift = center(1) - center(0);
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = 0; j < t.size(); ++j) add(Point(t[i], t[j] + shift), w[i] * w[j]);
  }
  return {std::sqrt(acc.u), std::sqrt(acc.du), std::sqrt(acc.d2u)};
}

}  // namespace

InterpErrorReport verify_interp_error(int N, double s, double q, double c, const std::vector<int>& levels,
                                      int c_level, const std::vector<double>& c_values) {
  check_problem(N, s);
  if (!(q >= 1.0)) throw InvalidInput("interpolation study needs q >= 1");
  if (!(c > 0.0)) throw InvalidInput("concentration must be positive");
  InterpErrorReport rep;
  rep.expected_c_slope = -(N / 2.0 - N / q + 2.0 - s);
  std::vector<std::pair<double, double>> lq, grad, cs;
  for (int level : levels) {
    const InterpErrorRecord r = interp_error(N, s, q, c, level);
    rep.h_sweep.push_back(r);
    lq.emplace_back(r.h, r.lq_error);
    grad.emplace_back(r.h, r.grad_error);
  }
  for (double cv : c_values) {
    const InterpErrorRecord r = interp_error(N, s, q, cv, c_level);
    rep.c_sweep.push_back(r);
    cs.emplace_back(cv, r.lq_error);
  }
  if (lq.size() >= 3) {
    rep.lq_h_fit = fit_rate(lq);
    rep.grad_h_fit = fit_rate(grad);
  }
  if (cs.size() >= 3) rep.lq_c_fit = fit_rate(cs);
  return rep;
}

CoveringReport verify_covering(int N, double s, int samples, std::uint64_t seed) {
  check_problem(N, s);
  if (samples < 1000) throw InvalidInput("covering test needs at least 1000 samples");
  CoveringReport rep;
  rep.seed = seed;
  rep.samples = samples;
  if (N == 1) {
    rep.excluded_band_lo = 0.5;
    rep.excluded_band_hi = 1.0;
  }
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2 * samples; ++i) {
    const CoveringSample smp = draw_covering(N, s, rng);
    const double r = covering_ratio(smp);
    if (r < best) {
      best = r;
      rep.worst_rho = smp.rho;
    }
    if (i + 1 == samples) rep.min_ratio = best;
  }
  rep.min_ratio_doubled = best;
  rep.relative_change = rep.min_ratio > 0.0 ? (rep.min_ratio - best) / rep.min_ratio : 1.0;
  rep.stable = rep.min_ratio_doubled > 0.0 && rep.relative_change < 0.2;
  return rep;
}

MinSeqReport verify_minimizing_sequence(int N, double s, const std::vector<double>& eps, int level,
                                        const QuadSpec& quad) {
  check_problem(N, s);
  if (eps.empty()) throw InvalidInput("minimizing sequence needs at least one eps");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] < 1.0 / 3.0)) throw InvalidInput("eps must lie in (0, 1/3)");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw InvalidInput("eps must be strictly decreasing");
  }
  const MeshPtr mesh = build_mesh(N, level);
  if (mesh->h > eps.back() / 4.0) throw InvalidInput("proxy mesh too coarse: need h <= eps/4 for every eps");
  const NonlocalForm form = assemble(mesh, s, quad);
  const double S = exact_constant(N, s);

  MinSeqReport rep;
  rep.level = level;
  rep.h = mesh->h;
  for (double e : eps) {
    const TruncatedBubble lam = truncated_bubble(N, s, 1.0, e);
    const FeFunction u = interpolate(mesh, [&](const Point& x) { return lam.evaluate(x); });
    MinSeqRecord r;
    r.eps = e;
    r.quotient = rayleigh_quotient(form, u);
    r.gap = r.quotient - S;
    rep.records.push_back(r);
  }
  rep.gaps_positive = true;
  rep.gaps_decreasing = true;
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    rep.gaps_positive = rep.gaps_positive && rep.records[i].gap > 0.0;
    if (i > 0) {
      rep.gaps_decreasing = rep.gaps_decreasing && rep.records[i].gap < rep.records[i - 1].gap;
      rep.halving_ratios.push_back(rep.records[i - 1].gap / rep.records[i].gap);
    }
  }
  return rep;
}

InequalityReport verify_functional_inequalities(int N, double s, int level, int samples, std::uint64_t seed,
                                                const std::vector<double>& cube_sides) {
  check_problem(N, s);
  if (samples < 1) throw InvalidInput("need at least one sample function");
  const MeshPtr mesh = build_mesh(N, level);
  if (mesh->num_free < 1) throw InvalidInput("mesh has no free nodes");
  InequalityReport rep;
  rep.seed = seed;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);

  // Per-element data: the identical-pair double integral (no s(1-s) factor),
  // the second moment of the element and the explicit Poincare constant.
  const int E = mesh->num_elements();
  const QuadSpec quad;
  const QuadratureRule rule = QuadratureRule::make(N, 2);
  std::vector<Eigen::MatrixXd> pair(E);
  std::vector<Eigen::Matrix2d> moment(E);
  std::vector<Eigen::MatrixXd> grads(E);
  std::vector<double> constant(E);
  for (int e = 0; e < E; ++e) {
    pair[e] = pair_matrix(*mesh, e, e, s, quad).values;
    grads[e] = barycentric_gradients(*mesh, e);
    Point xc = Point::Zero();
    for (int k = 0; k <= N; ++k) xc += mesh->nodes[mesh->elements[e][k]] / (N + 1.0);
    Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Point d = element_point(*mesh, e, rule.bary[i]) - xc;
      C += rule.w[i] * mesh->measure(e) * d * d.transpose();
    }
    moment[e] = C;
    constant[e] = std::pow(mesh->diameter(e), N + 2.0 * s) / mesh->measure(e);
  }

  const NonlocalForm inner = assemble(mesh, s, quad, FormDomain::MeshOnly);
  const double factor = s * (1.0 - s);
  double gn = 0.0;
  for (int i = 0; i < 2 * samples; ++i) {
    Eigen::VectorXd x(mesh->num_free);
    for (int k = 0; k < x.size(); ++k) x(k) = U(rng);
    const FeFunction u = FeFunction::from_free(mesh, x);
    double grad_sq = 0.0;
    for (int e = 0; e < E; ++e) {
      Eigen::VectorXd v(N + 1);
      for (int k = 0; k <= N; ++k) v(k) = u.values(mesh->elements[e][k]);
      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      g.head(N) = grads[e].transpose() * v;
      grad_sq += g.squaredNorm() * mesh->measure(e);
      if (i < samples) {
        const double rhs = v.dot(pair[e] * v);
        if (rhs > 0.0) {
          const double lhs = g.dot(moment[e] * g);
          rep.poincare_max_ratio = std::max(rep.poincare_max_ratio, lhs / (constant[e] * rhs));
          ++rep.poincare_checks;
        }
      }
    }
    const double semi = std::sqrt(x.dot(inner.matrix * x) / factor);
    const double l2 = lq_norm(u, 2.0);
    gn = std::max(gn, semi / (std::pow(l2, 1.0 - s) * std::pow(std::sqrt(grad_sq), s)));
    if (i + 1 == samples) rep.gn_max = gn;
  }
  rep.gn_max_doubled = gn;

  std::uniform_real_distribution<double> U01(0.0, 1.0);
  for (double side : cube_sides) {
    if (!(side > 0.0)) throw InvalidInput("cube side must be positive");
    double best = 0.0;
    for (int i = 0; i < 2 * samples; ++i) {
      Point X0 = Point::Zero(), center = Point::Zero();
      for (int k = 0; k < N; ++k) {
        X0(k) = U(rng);
        center(k) = U(rng);
      }
      const double lambda = 0.5 + 1.5 * U01(rng);
      const double c = std::exp(std::log(0.05) + U01(rng) * std::log(20.0));
      const CubeNorms n = cube_norms(Bubble(N, s, lambda, c, X0), center, side);
      best = std::max(best, n.du / (n.u / side + std::sqrt(n.u * n.d2u)));
      if (i + 1 == samples) rep.cube_constant.push_back(best);
    }
    rep.cube_sides.push_back(side);
    rep.cube_constant_doubled.push_back(best);
  }
  return rep;
}

}  // namespace fracsob
