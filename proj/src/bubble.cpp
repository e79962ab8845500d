#include "fracsob/bubble.hpp"

#include "fracsob/errors.hpp"
#include "fracsob/params.hpp"
#include "fracsob/quadrature.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <vector>

namespace fracsob {

namespace {

constexpr double kPi = std::numbers::pi;

double surface_measure(int N) { return N == 1 ? 2.0 : 2.0 * kPi; }

// int_0^R r^{N-1} |lambda g(r) - offset|^q dr with g the bubble profile, after
// the substitution r = c tan(phi) which maps the profile to cos^{N-2s}(phi).
// With `truncated` the offset is the profile value at R, and the difference is
// formed without cancellation: cos(phi) - cos(phi_R) is a product of sines.
double radial_power_integral(const Bubble& b, bool truncated, double q, double R) {
  const double k = b.N - 2.0 * b.s;
  const double phi_max = std::atan(R / b.c);
  const double cm = std::cos(phi_max);
  const double offset = truncated ? b.lambda * std::pow(cm, k) : 0.0;
  auto f = [&](double phi) {
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    double v;
    if (truncated) {
      const double diff = 2.0 * std::sin(0.5 * (phi + phi_max)) * std::sin(0.5 * (phi_max - phi));
      v = std::abs(offset * std::expm1(k * std::log1p(diff / cm)));
    } else {
      v = std::abs(b.lambda) * std::pow(cp, k);
    }
    return std::pow(sp, b.N - 1) * std::pow(cp, -(b.N + 1.0)) * std::pow(v, q);
  };
  // The truncated profile drops to zero over a layer of width ~ c/R in phi
  // below phi_max; breakpoints graded toward phi_max resolve it.
  std::vector<double> cuts = {0.0};
  const double split = std::min(0.25 * kPi, phi_max);
  cuts.push_back(split);
  if (phi_max > split) {
    std::vector<double> graded;
    for (double d = 0.25 * std::min(b.c / R, 1.0); phi_max - d > split; d *= 2.0) graded.push_back(phi_max - d);
    cuts.insert(cuts.end(), graded.rbegin(), graded.rend());
    cuts.push_back(phi_max);
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate_adaptive(f, cuts[i], cuts[i + 1], 1e-14);
  return std::pow(b.c, b.N) * total;
}

}  // namespace

Bubble::Bubble(int N_, double s_, double lambda_, double c_, Point center_)
    : N(N_), s(s_), lambda(lambda_), c(c_), center(std::move(center_)) {
  check_problem(N, s);
  if (!(c > 0.0)) throw InvalidInput("bubble concentration must be positive");
  if (lambda == 0.0) throw InvalidInput("bubble amplitude must be nonzero");
  if (N == 1) center.y() = 0.0;
}

double Bubble::distance(const Point& x) const {
  return N == 1 ? std::abs(x.x() - center.x()) : (x - center).norm();
}

double Bubble::evaluate(const Point& x) const {
  const double r = distance(x) / c;
  return lambda * std::pow(1.0 + r * r, -0.5 * (N - 2.0 * s));
}

double Bubble::radial_first(double r) const {
  const double k = N - 2.0 * s;
  const double rho2 = r * r / (c * c);
  return -(k / (c * c)) * std::pow(1.0 + rho2, -0.5 * (k + 2.0)) * r;
}

double Bubble::radial_second(double r) const {
  const double k = N - 2.0 * s;
  const double rho2 = r * r / (c * c);
  return -(k / (c * c)) * std::pow(1.0 + rho2, -0.5 * (k + 4.0)) * (1.0 - (k + 1.0) * rho2);
}

Eigen::VectorXd Bubble::gradient(const Point& x) const {
  const double k = N - 2.0 * s;
  const double r = distance(x);
  const double rho2 = r * r / (c * c);
  const double factor = -lambda * (k / (c * c)) * std::pow(1.0 + rho2, -0.5 * (k + 2.0));
  Eigen::VectorXd g(N);
  for (int i = 0; i < N; ++i) g(i) = factor * (x(i) - center(i));
  return g;
}

Eigen::MatrixXd Bubble::hessian(const Point& x) const {
  const double r = distance(x);
  const double k = N - 2.0 * s;
  if (r == 0.0) return Eigen::MatrixXd::Identity(N, N) * (-lambda * k / (c * c));
  Eigen::VectorXd e(N);
  for (int i = 0; i < N; ++i) e(i) = (x(i) - center(i)) / r;
  const Eigen::MatrixXd P = e * e.transpose();
  const double upp = radial_second(r);
  const double up_over_r = radial_first(r) / r;
  return lambda * (upp * P + up_over_r * (Eigen::MatrixXd::Identity(N, N) - P));
}

double Bubble::hessian_frobenius(const Point& x) const {
  const double k = N - 2.0 * s;
  const double rho2 = std::pow(distance(x) / c, 2);
  const double a = 1.0 - (k + 1.0) * rho2;
  const double b = 1.0 + rho2;
  return std::abs(lambda) * (k / (c * c)) * std::pow(b, -0.5 * (k + 4.0)) *
         std::sqrt(a * a + (N - 1.0) * b * b);
}

TruncatedBubble truncated_bubble(int N, double s, double lambda, double c) {
  TruncatedBubble t;
  t.base = Bubble(N, s, lambda, c);
  t.offset = lambda * std::pow(1.0 + 1.0 / (c * c), -0.5 * (N - 2.0 * s));
  return t;
}

double normalize_lambda(double c, int N, double s) {
  const TruncatedBubble unit = truncated_bubble(N, s, 1.0, c);
  const double norm = bubble_lq_norm(unit, critical_exponent(N, s));
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalFailure("normalization quadrature failed");
  return 1.0 / norm;
}

double bubble_lq_norm(const Bubble& b, double q, Region region) {
  if (!(q >= 1.0)) throw InvalidInput("norm exponent must be at least 1");
  const int N = b.N;
  const double k = N - 2.0 * b.s;
  if (region == Region::AllSpace) {
    if (!(q * k > N)) throw InvalidInput("bubble is not in L^q(R^N) for this exponent");
    boost::math::quadrature::tanh_sinh<double> ts;
    const double e = q * k - N - 1.0;
    auto f = [&](double phi) { return std::pow(std::sin(phi), N - 1) * std::pow(std::cos(phi), e); };
    const double radial = ts.integrate(f, 0.0, 0.5 * kPi, 1e-14);
    return std::pow(surface_measure(N) * std::pow(std::abs(b.lambda), q) * std::pow(b.c, N) * radial,
                    1.0 / q);
  }
  const double d0 = (N == 1) ? std::abs(b.center.x()) : b.center.norm();
  if (d0 > 1.0) throw InvalidInput("bubble center must lie in the closed unit ball");
  double total;
  if (N == 1) {
    const double x0 = b.center.x();
    total = radial_power_integral(b, false, q, 1.0 - x0) + radial_power_integral(b, false, q, 1.0 + x0);
  } else {
    // Polar coordinates around the center; R(theta) is the distance to the sphere.
    auto ray = [&](double theta) {
      const double w = b.center.x() * std::cos(theta) + b.center.y() * std::sin(theta);
      const double R = -w + std::sqrt(std::max(0.0, 1.0 - d0 * d0 + w * w));
      return radial_power_integral(b, false, q, R);
    };
    total = (d0 == 0.0) ? 2.0 * kPi * ray(0.0) : integrate_adaptive(ray, 0.0, 2.0 * kPi, 1e-13);
  }
  return std::pow(total, 1.0 / q);
}

double bubble_lq_norm(const TruncatedBubble& t, double q) {
  if (!(q >= 1.0)) throw InvalidInput("norm exponent must be at least 1");
  const double radial = radial_power_integral(t.base, true, q, 1.0);
  return std::pow(surface_measure(t.base.N) * radial, 1.0 / q);
}

}  // namespace fracsob
