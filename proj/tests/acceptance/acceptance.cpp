// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include "fracsob/bubble.hpp"
#include "fracsob/experiments.hpp"
#include "fracsob/gagliardo.hpp"
#include "fracsob/params.hpp"

#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace fracsob;

namespace {

int failures = 0;

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [violated: " << what << "]";
    }
  }
};

void criterion(int id, const char* name, double budget_seconds, const std::function<void(Outcome&)>& body) {
  Outcome o;
  o.detail.precision(6);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_seconds) {
    o.ok = false;
    o.detail << " [over time budget " << budget_seconds << " s]";
  }
  if (!o.ok) ++failures;
  std::printf("%s %2d %s (%.1f s):%s\n", o.ok ? "PASS" : "FAIL", id, name, secs, o.detail.str().c_str());
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

bool in_band(double v, double lo, double hi) { return v >= lo && v <= hi; }

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

double slope_of(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) pts.emplace_back(x[i], y[i]);
  return fit_rate(pts).slope;
}

}  // namespace

int main() {
  criterion(1, "exact constant vs slow oracle", 10.0, [](Outcome& o) {
    for (auto [N, s] : {std::pair{1, 0.25}, {2, 0.5}}) {
      const double ref = oracle::sobolev_constant(N, s, oracle::slow_symbol_integral(N, s));
      const double e = rel(exact_constant(N, s), ref);
      o.detail << " S(" << N << "," << s << ")=" << exact_constant(N, s) << " rel.err " << e;
      o.require(e <= 1e-8, "relative error <= 1e-8");
    }
  });

  criterion(2, "1D assembly vs double-integration oracle", 120.0, [](Outcome& o) {
    std::vector<MeshPtr> meshes = {three_element_mesh()};
    for (int level = 0; level <= 2; ++level) meshes.push_back(build_mesh(1, level));
    double worst = 0.0, worst_sym = 0.0, min_eig = 1e300;
    for (const auto& m : meshes)
      for (double s : {0.1, 0.25, 0.4}) {
        const NonlocalForm f = assemble(m, s);
        const Eigen::MatrixXd ref = oracle::stiffness_1d(*m, s);
        for (int i = 0; i < f.size(); ++i)
          for (int j = 0; j < f.size(); ++j) worst = std::max(worst, rel(f.matrix(i, j), ref(i, j)));
        worst_sym = std::max(worst_sym, (f.matrix - f.matrix.transpose()).cwiseAbs().maxCoeff() / f.matrix.cwiseAbs().maxCoeff());
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(f.matrix).eigenvalues()(0));
      }
    o.detail << " max rel.err " << worst << ", symmetry " << worst_sym << ", min eigenvalue " << min_eig;
    o.require(worst <= 1e-4, "entries within 1e-4");
    o.require(worst_sym <= 1e-12, "symmetric to 1e-12");
    o.require(min_eig > 0.0, "positive definite");
  });

  criterion(3, "bubble derivatives", 10.0, [](Outcome& o) {
    double g_err = 0.0, h_err = 0.0, f_err = 0.0;
    for (auto [N, s] : {std::pair{1, 0.25}, {2, 0.5}}) {
      std::mt19937_64 rng(2024 + N);
      std::uniform_real_distribution<double> U(0.0, 1.0);
      for (int i = 0; i < 1000; ++i) {
        const double lam = (U(rng) < 0.5 ? -1.0 : 1.0) * std::exp(std::log(0.1) + U(rng) * std::log(100.0));
        const double c = 0.05 + 0.95 * U(rng);
        const Point X0(2 * U(rng) - 1, N == 2 ? 2 * U(rng) - 1 : 0.0);
        const double r = 3.0 * U(rng), th = 2 * oracle::kPi * U(rng);
        const Point x = N == 1 ? Point(X0.x() + (th < oracle::kPi ? r : -r), 0) : Point(X0.x() + r * std::cos(th), X0.y() + r * std::sin(th));
        const Bubble b(N, s, lam, c, X0);
        const double rho2 = r * r / (c * c);
        const double gs = std::abs(lam) / c * std::pow(1 + rho2, -0.5 * (N - 2 * s + 1));
        const double hs = std::abs(lam) / (c * c) * std::pow(1 + rho2, -0.5 * (N - 2 * s + 2));
        const Eigen::VectorXd g = b.gradient(x);
        const Eigen::MatrixXd H = b.hessian(x);
        const double step = 1e-3 * c;
        for (int k = 0; k < N; ++k) {
          Point e = Point::Zero();
          e(k) = 1.0;
          auto D = [&](double t) { return (b.evaluate(x + t * e) - b.evaluate(x - t * e)) / (2 * t); };
          auto DG = [&](double t) -> Eigen::VectorXd { return (b.gradient(x + t * e) - b.gradient(x - t * e)) / (2 * t); };
          g_err = std::max(g_err, std::abs((4 * D(step / 2) - D(step)) / 3 - g(k)) / std::max(g.norm(), gs));
          h_err = std::max(h_err, ((4 * DG(step / 2) - DG(step)) / 3 - H.col(k)).norm() / std::max(H.norm(), hs));
        }
        f_err = std::max(f_err, rel(H.norm(), b.hessian_frobenius(x)));
      }
    }
    o.detail << " gradient " << g_err << ", Hessian " << h_err << ", Frobenius " << f_err;
    o.require(g_err <= 1e-8, "gradient 1e-8");
    o.require(h_err <= 1e-6, "Hessian 1e-6");
    o.require(f_err <= 1e-12, "Frobenius 1e-12");
  });

  criterion(4, "amplitude scaling exponent", 60.0, [](Outcome& o) {
    for (auto [N, s] : {std::pair{1, 0.25}, {2, 0.5}}) {
      std::vector<double> cs, ls;
      for (int k = 3; k <= 7; ++k) {
        cs.push_back(std::ldexp(1.0, -k));
        ls.push_back(normalize_lambda(cs.back(), N, s));
      }
      const double slope = slope_of(cs, ls), expect = -0.5 * (N - 2 * s);
      o.detail << " N=" << N << " slope " << slope << " (expected " << expect << ")";
      o.require(std::abs(slope - expect) <= 0.1 * std::abs(expect), "within 10%");
    }
  });

  criterion(5, "interpolation error rates", 300.0, [](Outcome& o) {
    const InterpErrorReport r = verify_interp_error(1, 0.25, 2.0, 0.25, {4, 5, 6, 7, 8, 9}, 10, {0.25, 0.125, 0.0625, 0.03125});
    o.detail << " L2 slope " << r.lq_h_fit.slope << ", gradient slope " << r.grad_h_fit.slope;
    o.require(std::abs(r.lq_h_fit.slope - 2.0) <= 0.15, "L2 slope 2 +- 0.15");
    o.require(std::abs(r.grad_h_fit.slope - 1.0) <= 0.15, "gradient slope 1 +- 0.15");
  });

  criterion(6, "upper-bound rate N=1 s=0.3", 1800.0, [](Outcome& o) {
    const SweepResult r = upper_bound_sweep(1, 0.3, {5, 6, 7, 8, 9, 10});
    const double alpha = rate_exponent(1, 0.3);
    o.require(r.failures.empty() && r.records.size() == 6, "all levels succeed");
    for (std::size_t i = 0; i < r.records.size(); ++i) {
      o.require(r.records[i].value > 0.0, "deficit positive");
      if (i > 0) o.require(r.records[i].value < r.records[i - 1].value, "log-log monotone");
    }
    o.detail << " slope " << r.fit.slope << " band [" << 0.6 * alpha << ", " << 1.4 * alpha << "]";
    o.require(r.fit_ok && in_band(r.fit.slope, 0.6 * alpha, 1.4 * alpha), "slope in band");
  });

  SweepResult solved;
  criterion(7, "discrete constant sweep N=1 s=0.25", 1800.0, [&](Outcome& o) {
    solved = discrete_constant_sweep(1, 0.25, {4, 5, 6, 7, 8});
    const double alpha = rate_exponent(1, 0.25);
    o.require(solved.failures.empty() && solved.records.size() == 5, "all levels succeed");
    double slack = 0.0;
    for (std::size_t i = 0; i < solved.records.size(); ++i) {
      const SweepRecord& rec = solved.records[i];
      slack = std::max(slack, rec.quadrature_slack);
      o.require(rec.value >= -rec.quadrature_slack, "S_h >= S - slack");
      o.require(rec.value <= solved.diagnostics[i].warm_deficit, "warm-start dominance");
      if (i > 0) o.require(rec.value <= solved.records[i - 1].value, "non-increasing");
    }
    o.detail << " slope " << solved.fit.slope << " band [" << 0.6 * alpha << ", " << 1.4 * alpha << "], max slack " << slack;
    o.require(slack <= 1e-6, "slack <= 1e-6");
    o.require(solved.fit_ok && in_band(solved.fit.slope, 0.6 * alpha, 1.4 * alpha), "slope in band");
  });

  criterion(8, "stability ratio band", 600.0, [&](Outcome& o) {
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < solved.records.size(); ++i) {
      if (solved.records[i].level < 5) continue;
      const double r = solved.diagnostics[i].stability_ratio;
      o.require(r > 0.0 && std::isfinite(r), "ratio finite and positive");
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      o.detail << " L" << solved.records[i].level << "=" << r;
    }
    o.detail << " max/min " << hi / lo;
    o.require(hi / lo <= 10.0, "max/min <= 10");
  });

  criterion(9, "minimizing sequence", 600.0, [](Outcome& o) {
    const MinSeqReport r = verify_minimizing_sequence(1, 0.25, {0.2, 0.1, 0.05}, 10);
    o.require(r.gaps_positive, "gaps positive");
    o.require(r.gaps_decreasing, "gaps decreasing");
    for (double q : r.halving_ratios) {
      o.detail << " ratio " << q;
      o.require(in_band(q, 1.2, 1.7), "ratio in [1.2, 1.7]");
    }
  });

  criterion(10, "covering dictionary", 600.0, [](Outcome& o) {
    for (int N : {1, 2}) {
      const double s = N == 1 ? 0.25 : 0.5;
      const CoveringReport r = verify_covering(N, s, 10000, 20240601);
      o.detail << " N=" << N << " min " << r.min_ratio << " change " << r.relative_change;
      o.require(r.min_ratio > 0.0, "min ratio > 0");
      o.require(r.stable, "stable under doubling");
      if (N == 1) {
        const double zero = 1.0 / std::sqrt(N - 2 * s + 1);
        o.require(r.excluded_band_lo < zero && zero < r.excluded_band_hi, "band contains the sign change");
        o.require(r.worst_rho <= r.excluded_band_lo || r.worst_rho >= r.excluded_band_hi, "no sample in the band");
      }
    }
  });

  criterion(11, "functional inequalities", 600.0, [](Outcome& o) {
    for (int N : {1, 2}) {
      const double s = N == 1 ? 0.25 : 0.5;
      const InequalityReport r = verify_functional_inequalities(N, s, N == 1 ? 6 : 3, 50, 20240601);
      o.detail << " N=" << N << " Poincare " << r.poincare_max_ratio << " GN " << r.gn_max << "/" << r.gn_max_doubled;
      o.require(r.poincare_checks > 0 && r.poincare_max_ratio <= 1.0, "Poincare holds on every element");
      o.require(std::abs(r.gn_max_doubled - r.gn_max) <= 0.2 * r.gn_max, "GN stable under doubling");
      double lo = 1e300, hi = 0.0;
      for (std::size_t k = 0; k < r.cube_sides.size(); ++k) {
        o.require(std::abs(r.cube_constant_doubled[k] - r.cube_constant[k]) <= 0.2 * r.cube_constant[k], "cube constant stable under doubling");
        lo = std::min(lo, r.cube_constant_doubled[k]);
        hi = std::max(hi, r.cube_constant_doubled[k]);
      }
      o.detail << " cube spread " << hi / lo;
      o.require(hi / lo <= 2.0, "cube constant stable across sides");
    }
  });

  criterion(12, "2D smoke N=2 s=0.5", 1200.0, [](Outcome& o) {
    for (int level = 1; level <= 3; ++level) {
      const NonlocalForm f = assemble(build_mesh(2, level), 0.5);
      const double sym = (f.matrix - f.matrix.transpose()).cwiseAbs().maxCoeff() / f.matrix.cwiseAbs().maxCoeff();
      const double eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(f.matrix).eigenvalues()(0);
      o.require(sym <= 1e-12 && eig > 0.0, "symmetric positive definite");
    }
    double rot = 0.0;
    for (double r : {0.1, 0.5, 0.9, 0.99}) {
      const double ref = complement_weight(Point(r, 0), 2, 0.5);
      for (int k = 1; k < 8; ++k) {
        const double t = 2 * oracle::kPi * k / 8;
        rot = std::max(rot, rel(complement_weight(Point(r * std::cos(t), r * std::sin(t)), 2, 0.5), ref));
      }
    }
    o.detail << " kappa rotation " << rot;
    o.require(rot <= 1e-8, "kappa rotation-invariant");
    const SweepResult sw = discrete_constant_sweep(2, 0.5, {1, 2, 3});
    o.require(sw.failures.empty(), "all levels solve");
    for (const auto& rec : sw.records) {
      o.detail << " L" << rec.level << " gap " << rec.value << " (slack " << rec.quadrature_slack << ")";
      o.require(rec.value >= -rec.quadrature_slack, "S_h >= S - slack");
    }
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
