#include "fracsob/experiments.hpp"

#include "fracsob/errors.hpp"
#include "fracsob/params.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>

namespace fracsob {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_levels(const std::vector<int>& levels) {
  if (levels.empty()) throw InvalidInput("sweep needs at least one level");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0) throw InvalidInput("levels must be nonnegative");
    if (i > 0 && levels[i] <= levels[i - 1]) throw InvalidInput("levels must be strictly increasing");
  }
}

void finish_fit(SweepResult& out) {
  std::vector<std::pair<double, double>> pts;
  bool positive = true;
  for (const SweepRecord& r : out.records) {
    positive = positive && r.value > 0.0;
    pts.emplace_back(r.h, r.value);
  }
  if (pts.size() >= 3 && positive) {
    out.fit = fit_rate(pts);
    out.fit_ok = true;
  }
}

}  // namespace

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw InvalidInput("rate fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [h, v] : points) {
    if (!(h > 0.0) || !(v > 0.0)) throw InvalidInput("rate fit needs positive h and values");
    sx += std::log(h);
    sy += std::log(v);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [h, v] : points) {
    const double dx = std::log(h) - mx;
    const double dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw InvalidInput("rate fit needs at least two distinct h");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ssres = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = syy > 0.0 ? 1.0 - ssres / syy : 1.0;
  fit.points = static_cast<int>(points.size());
  return fit;
}

SweepResult upper_bound_sweep(int N, double s, const std::vector<int>& levels, const SweepOptions& opts) {
  check_problem(N, s);
  check_levels(levels);
  SweepResult out;
  for (int level : levels) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const MeshPtr mesh = build_mesh(N, level);
      SweepRecord rec;
      rec.level = level;
      rec.h = mesh->h;
      rec.c_h = optimal_concentration(mesh->h, N, s);
      const TruncatedBubble psi = truncated_bubble(N, s, normalize_lambda(rec.c_h, N, s), rec.c_h);
      const FeFunction u = interpolate(mesh, [&](const Point& x) { return psi.evaluate(x); });

      LevelDiagnostics diag;
      const NonlocalForm form = assemble(mesh, s, opts.quad);
      diag.symmetry_error = form.report.symmetry_error;
      diag.assembly_seconds = form.report.seconds;
      rec.value = deficit(form, u);
      diag.warm_deficit = rec.value;
      if (opts.slack) {
        const NonlocalForm fine = assemble(mesh, s, form.quad.refined(opts.slack_increment));
        rec.quadrature_slack = std::abs(deficit(fine, u) - rec.value);
      }
      rec.wall_time = seconds_since(t0);
      out.records.push_back(rec);
      out.diagnostics.push_back(diag);
    } catch (const std::exception& ex) {
      out.failures.emplace_back(level, ex.what());
    }
  }
  finish_fit(out);
  return out;
}

SweepResult discrete_constant_sweep(int N, double s, const std::vector<int>& levels, const SweepOptions& opts) {
  check_problem(N, s);
  check_levels(levels);
  const double S = exact_constant(N, s);
  SweepResult out;
  std::vector<std::pair<double, double>> conc;
  for (int level : levels) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const MeshPtr mesh = build_mesh(N, level);
      SweepRecord rec;
      rec.level = level;
      rec.h = mesh->h;
      rec.c_h = optimal_concentration(mesh->h, N, s);

      LevelDiagnostics diag;
      const NonlocalForm form = assemble(mesh, s, opts.quad);
      diag.symmetry_error = form.report.symmetry_error;
      diag.assembly_seconds = form.report.seconds;
      const FeFunction init = warm_start(mesh, s);
      diag.warm_deficit = deficit(form, init, opts.solver.lq);
      const SolverReport rep = solve(form, init, opts.solver);
      rec.value = rep.S_h - S;
      diag.iterations = rep.iterations;
      diag.converged = rep.converged;
      diag.el_residual = rep.el_residual;

      if (opts.slack) {
        // The minimizer has unit norm, so the quotient changes by u^T (A' - A) u.
        const NonlocalForm fine = assemble(mesh, s, form.quad.refined(opts.slack_increment));
        const Eigen::VectorXd x = rep.minimizer.free_values();
        rec.quadrature_slack = std::abs(x.dot((fine.matrix - form.matrix) * x));
      }
      if (opts.manifold_fit) {
        diag.fit = fit_manifold(form, rep.minimizer, BubbleParams{1.0, rec.c_h, Point::Zero()});
        if (diag.fit.discrete_distance_sq > 0.0) diag.stability_ratio = rec.value / diag.fit.discrete_distance_sq;
        if (diag.fit.converged) conc.emplace_back(rec.h, diag.fit.c);
      }
      rec.wall_time = seconds_since(t0);
      out.records.push_back(rec);
      out.diagnostics.push_back(diag);
    } catch (const std::exception& ex) {
      out.failures.emplace_back(level, ex.what());
    }
  }
  finish_fit(out);
  if (conc.size() >= 3) {
    out.concentration_fit = fit_rate(conc);
    out.concentration_fit_ok = true;
  }
  return out;
}

}  // namespace fracsob
