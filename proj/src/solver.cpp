#include "fracsob/solver.hpp"

#include "fracsob/errors.hpp"
#include "fracsob/params.hpp"

#include <Eigen/Cholesky>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace fracsob {

namespace {

struct Iterate {
  Eigen::VectorXd x;  // free coefficients, unit L^q norm
  double quotient = 0.0;
};

// Normalizes x to unit L^q norm and returns its quotient; false for x = 0.
bool normalize(const NonlocalForm& form, double q, const LqOptions& lq, Eigen::VectorXd& x, double& quotient) {
  if (!x.allFinite() || x.cwiseAbs().maxCoeff() == 0.0) return false;
  const FeFunction f = FeFunction::from_free(form.mesh, x);
  const double norm = std::pow(lq_evaluate(f, q, false, lq).power, 1.0 / q);
  if (!(norm > 0.0)) return false;
  x /= norm;
  quotient = x.dot(form.matrix * x);
  return std::isfinite(quotient);
}

}  // namespace

double rayleigh_quotient(const NonlocalForm& form, const FeFunction& u, const LqOptions& lq) {
  if (u.mesh != form.mesh) throw InvalidInput("function and form live on different meshes");
  const double q = critical_exponent(form.mesh->N, form.s);
  const double norm = lq_norm(u, q, lq);
  if (!(norm > 0.0)) throw InvalidInput("Rayleigh quotient of the zero function");
  return seminorm_sq(form, u) / (norm * norm);
}

double deficit(const NonlocalForm& form, const FeFunction& u, const LqOptions& lq) {
  return rayleigh_quotient(form, u, lq) - exact_constant(form.mesh->N, form.s);
}

FeFunction warm_start(const MeshPtr& mesh, double s) {
  const int N = mesh->N;
  const double c = optimal_concentration(mesh->h, N, s);
  const TruncatedBubble psi = truncated_bubble(N, s, normalize_lambda(c, N, s), c);
  return interpolate(mesh, [&](const Point& x) { return psi.evaluate(x); });
}

SolverReport solve(const NonlocalForm& form, const FeFunction& init, const SolverOptions& opts) {
  if (init.mesh != form.mesh) throw InvalidInput("initial guess lives on a different mesh");
  if (opts.tol <= 0.0 || opts.max_iter < 1) throw InvalidInput("solver needs tol > 0 and max_iter >= 1");
  const int N = form.mesh->N;
  const double q = critical_exponent(N, form.s);

  Eigen::LLT<Eigen::MatrixXd> llt(form.matrix);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("stiffness matrix is not positive definite; assembly is corrupt");

  SolverReport rep;
  rep.tolerance_used = opts.tol;
  Iterate cur;
  cur.x = init.free_values();
  if (!normalize(form, q, opts.lq, cur.x, cur.quotient)) throw InvalidInput("initial guess is zero");
  if (cur.x.sum() < 0.0) cur.x = -cur.x;
  rep.quotient_history.push_back(cur.quotient);

  for (int it = 1; it <= opts.max_iter; ++it) {
    rep.iterations = it;
    const FeFunction f = FeFunction::from_free(form.mesh, cur.x);
    Eigen::VectorXd v = llt.solve(lq_evaluate(f, q, true, opts.lq).residual);
    if (v.sum() < 0.0) v = -v;
    Iterate next;
    next.x = v;
    bool accepted = normalize(form, q, opts.lq, next.x, next.quotient) && next.quotient <= cur.quotient;

    // Safeguard: damp toward the current iterate until the quotient does not grow.
    double t = 1.0;
    for (int k = 0; !accepted && k < opts.max_halvings; ++k) {
      t *= 0.5;
      next.x = cur.x + t * (v / v.norm() * cur.x.norm() - cur.x);
      accepted = normalize(form, q, opts.lq, next.x, next.quotient) && next.quotient <= cur.quotient;
    }
    if (!accepted) {
      rep.converged = true;  // no descent left at working precision
      break;
    }

    // The fixed-point map contracts slowly along the dilation direction of the
    // bubble; longer steps along the accepted direction recover most of that.
    if (opts.extrapolate) {
      const Eigen::VectorXd d = next.x - cur.x;
      for (double step = 2.0; step <= 64.0; step *= 2.0) {
        Iterate trial;
        trial.x = cur.x + step * d;
        if (!normalize(form, q, opts.lq, trial.x, trial.quotient) || !(trial.quotient < next.quotient)) break;
        next = trial;
      }
    }

    const double decrease = (cur.quotient - next.quotient) / cur.quotient;
    cur = next;
    rep.quotient_history.push_back(cur.quotient);
    if (decrease < opts.tol) {
      rep.converged = true;
      break;
    }
  }

  rep.minimizer = FeFunction::from_free(form.mesh, cur.x);
  rep.S_h = cur.quotient;
  rep.mu = cur.x.dot(form.matrix * cur.x);
  const Eigen::VectorXd Au = form.matrix * cur.x;
  const Eigen::VectorXd b = lq_evaluate(rep.minimizer, q, true, opts.lq).residual;
  rep.el_residual = (Au - rep.mu * b).norm() / Au.norm();
  return rep;
}

SolverReport solve(const NonlocalForm& form, const SolverOptions& opts) {
  return solve(form, warm_start(form.mesh, form.s), opts);
}

double manifold_objective(const NonlocalForm& form, const FeFunction& u, double c, const Point& center,
                          double* lambda_opt) {
  if (u.mesh != form.mesh) throw InvalidInput("function and form live on different meshes");
  const int N = form.mesh->N;
  const Bubble phi(N, form.s, 1.0, c, center);
  const Eigen::VectorXd p = interpolate(form.mesh, [&](const Point& x) { return phi.evaluate(x); }).free_values();
  const Eigen::VectorXd x = u.free_values();
  const Eigen::VectorXd Ap = form.matrix * p;
  const double pAp = p.dot(Ap);
  const double lambda = pAp > 0.0 ? x.dot(Ap) / pAp : 0.0;
  if (lambda_opt) *lambda_opt = lambda;
  const Eigen::VectorXd r = x - lambda * p;
  return r.dot(form.matrix * r);
}

namespace {

struct FitContext {
  const NonlocalForm* form;
  const FeFunction* u;
  int N;
};

Point center_of(const gsl_vector* v, int N) {
  Point c = Point::Zero();
  for (int k = 0; k < N; ++k) c(k) = gsl_vector_get(v, 1 + k);
  return c;
}

double fit_objective(const gsl_vector* v, void* params) {
  const auto* ctx = static_cast<const FitContext*>(params);
  const double logc = gsl_vector_get(v, 0);
  if (!(logc > -40.0 && logc < 10.0)) return std::numeric_limits<double>::max();
  return manifold_objective(*ctx->form, *ctx->u, std::exp(logc), center_of(v, ctx->N));
}

}  // namespace

ManifoldFit fit_manifold(const NonlocalForm& form, const FeFunction& u, const BubbleParams& guess, int max_iter) {
  if (u.mesh != form.mesh) throw InvalidInput("function and form live on different meshes");
  if (u.values.cwiseAbs().maxCoeff() == 0.0) throw InvalidInput("manifold fit of the zero function");
  if (!(guess.c > 0.0)) throw InvalidInput("initial concentration must be positive");
  const int N = form.mesh->N;
  const int dim = N + 1;
  FitContext ctx{&form, &u, N};

  gsl_multimin_function fn;
  fn.n = static_cast<std::size_t>(dim);
  fn.f = &fit_objective;
  fn.params = &ctx;

  auto vec = [](std::size_t n) { return std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>(gsl_vector_alloc(n), &gsl_vector_free); };
  auto x = vec(dim);
  auto step = vec(dim);
  gsl_vector_set(x.get(), 0, std::log(guess.c));
  gsl_vector_set(step.get(), 0, 0.25);
  const double h = form.mesh->h;
  for (int k = 0; k < N; ++k) {
    gsl_vector_set(x.get(), 1 + k, guess.center(k));
    gsl_vector_set(step.get(), 1 + k, std::max(0.25 * guess.c, 0.5 * h));
  }

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> mm(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim), &gsl_multimin_fminimizer_free);
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  gsl_multimin_fminimizer_set(mm.get(), &fn, x.get(), step.get());

  // Stops on a small simplex, or when the best value has not moved for a
  // while (the simplex cannot shrink below the objective's rounding floor).
  ManifoldFit fit;
  int status = GSL_CONTINUE;
  double best_value = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 1; it <= max_iter && status == GSL_CONTINUE; ++it) {
    fit.iterations = it;
    if (gsl_multimin_fminimizer_iterate(mm.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(mm.get());
    status = gsl_multimin_test_size(size, 1e-8);
    const double value = gsl_multimin_fminimizer_minimum(mm.get());
    stalled = value < best_value ? 0 : stalled + 1;
    best_value = std::min(best_value, value);
    if (status == GSL_CONTINUE && stalled >= 200 && size < 1e-4) status = GSL_SUCCESS;
  }
  gsl_set_error_handler(old);

  const gsl_vector* best = gsl_multimin_fminimizer_x(mm.get());
  fit.converged = status == GSL_SUCCESS;
  fit.c = std::exp(gsl_vector_get(best, 0));
  fit.center = center_of(best, N);
  fit.discrete_distance_sq = manifold_objective(form, u, fit.c, fit.center, &fit.lambda);
  return fit;
}

}  // namespace fracsob
