#include "fracsob/quadrature.hpp"

#include "fracsob/errors.hpp"

#include <Eigen/Eigenvalues>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace fracsob {

namespace {

// Golub-Welsch for the Jacobi weight (1-x)^a (1+x)^b on [-1,1], mapped to [0,1].
Rule1D golub_welsch_jacobi(int n, double a, double b) {
  if (n < 1) throw InvalidInput("quadrature rule needs at least one point");
  if (a <= -1.0 || b <= -1.0) throw InvalidInput("Jacobi exponents must exceed -1");

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double d = 2.0 * k + ab;
    J(k, k) = (k == 0) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (d * (d + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double dm = 2.0 * m + ab;
      double beta;
      if (k == 0) {
        beta = 4.0 * (1.0 + a) * (1.0 + b) / (dm * dm * (dm + 1.0));
      } else {
        beta = 4.0 * m * (m + a) * (m + b) * (m + ab) / (dm * dm * (dm + 1.0) * (dm - 1.0));
      }
      J(k, k + 1) = J(k + 1, k) = std::sqrt(beta);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
  const double scale = std::exp(-(ab + 1.0) * std::log(2.0));

  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    r.x[i] = 0.5 * (1.0 + es.eigenvalues()(i));
    r.w[i] = mu0 * v0 * v0 * scale;
  }
  return r;
}

std::mutex cache_mutex;

}  // namespace

const Rule1D& gauss_jacobi(int n, double alpha, double beta) {
  static std::map<std::tuple<int, double, double>, std::unique_ptr<Rule1D>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto key = std::make_tuple(n, alpha, beta);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  auto rule = std::make_unique<Rule1D>(golub_welsch_jacobi(n, alpha, beta));
  const Rule1D& ref = *rule;
  cache.emplace(key, std::move(rule));
  return ref;
}

const Rule1D& gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

const TriangleRule& triangle_rule(int n) {
  static std::map<int, std::unique_ptr<TriangleRule>> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  const Rule1D& ru = gauss_jacobi(n, 0.0, 1.0);
  const Rule1D& rv = gauss_legendre(n);
  auto rule = std::make_unique<TriangleRule>();
  for (std::size_t i = 0; i < ru.size(); ++i) {
    for (std::size_t j = 0; j < rv.size(); ++j) {
      const double u = ru.x[i];
      const double v = rv.x[j];
      rule->bary.emplace_back(1.0 - u, u * (1.0 - v), u * v);
      rule->w.push_back(2.0 * ru.w[i] * rv.w[j]);
    }
  }
  return *cache.emplace(n, std::move(rule)).first->second;
}

TriangleRule triangle_rule_edge_singular(int n, double gamma) {
  // dist to the edge opposite vertex 0 is proportional to (1-u).
  const Rule1D& ru = gauss_jacobi(n, -gamma, 1.0);
  const Rule1D& rv = gauss_legendre(n);
  TriangleRule rule;
  for (std::size_t i = 0; i < ru.size(); ++i) {
    const double u = ru.x[i];
    const double unfold = std::pow(1.0 - u, gamma);
    for (std::size_t j = 0; j < rv.size(); ++j) {
      const double v = rv.x[j];
      rule.bary.emplace_back(1.0 - u, u * (1.0 - v), u * v);
      rule.w.push_back(2.0 * ru.w[i] * rv.w[j] * unfold);
    }
  }
  return rule;
}

TriangleRule triangle_rule_vertex_singular(int n, double gamma) {
  const Rule1D& ru = gauss_jacobi(n, 0.0, 1.0 - gamma);
  const Rule1D& rv = gauss_legendre(n);
  TriangleRule rule;
  for (std::size_t i = 0; i < ru.size(); ++i) {
    const double u = ru.x[i];
    const double unfold = std::pow(u, gamma);
    for (std::size_t j = 0; j < rv.size(); ++j) {
      const double v = rv.x[j];
      rule.bary.emplace_back(1.0 - u, u * (1.0 - v), u * v);
      rule.w.push_back(2.0 * ru.w[i] * rv.w[j] * unfold);
    }
  }
  return rule;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol, double* error) {
  constexpr std::size_t kLimit = 2000;
  std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
      gsl_integration_workspace_alloc(kLimit), &gsl_integration_workspace_free);
  gsl_function fn;
  fn.function = [](double x, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(x); };
  fn.params = const_cast<std::function<double(double)>*>(&f);
  double value = 0.0;
  double err = 0.0;
  // QAG refuses relative tolerances below 50 machine epsilons.
  tol = std::max(tol, 50.0 * std::numeric_limits<double>::epsilon());
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  // A round-off status still leaves the best estimate; the error bound below decides.
  gsl_integration_qag(&fn, a, b, 0.0, tol, kLimit, GSL_INTEG_GAUSS31, ws.get(), &value, &err);
  gsl_set_error_handler(old);
  if (error) *error = err;
  if (!std::isfinite(value)) throw NumericalFailure("adaptive quadrature produced a non-finite value");
  if (err > 100.0 * tol * std::max(std::abs(value), 1e-300)) {
    throw NumericalFailure("adaptive quadrature did not converge", err);
  }
  return value;
}

}  // namespace fracsob
