#include "fracsob/params.hpp"

#include "fracsob/errors.hpp"
#include "fracsob/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace fracsob {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Asymptotic expansion of F_a(T) = int_T^inf e^{it} t^{-a} dt, obtained by
// repeated integration by parts. Accurate for T >> a.
cplx oscillatory_tail(double a, double T) {
  const cplx I(0.0, 1.0);
  cplx sum = 0.0;
  cplx term = 1.0;
  double last = 1e300;
  for (int k = 0; k < 200; ++k) {
    const double mag = std::abs(term);
    if (mag > last) break;  // asymptotic series started to diverge
    sum += term;
    if (mag < 1e-20) break;
    last = mag;
    term *= -I * (a + k) / T;
  }
  return I * std::exp(I * T) * std::pow(T, -a) * sum;
}

// int_1^T g(t) dt on pieces of length pi. The integrands are entire on each
// piece, so a 32-point Gauss rule is exact to rounding.
template <class F>
double piecewise_integral(F g, double T) {
  const Rule1D& rule = gauss_legendre(32);
  double total = 0.0;
  const int pieces = static_cast<int>(std::round((T - 1.0) / kPi));
  for (int j = 0; j < pieces; ++j) {
    const double a = 1.0 + j * kPi;
    double piece = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) piece += rule.w[i] * g(a + kPi * rule.x[i]);
    total += kPi * piece;
  }
  return total;
}

double symbol_integral_1d(double s) {
  // int_0^1 (1 - cos t) t^{-1-2s} dt by the Taylor series of 1 - cos.
  double head = 0.0;
  double fact = 1.0;
  for (int k = 1; k < 30; ++k) {
    fact *= (2.0 * k - 1.0) * (2.0 * k);
    const double term = 1.0 / (fact * (2.0 * k - 2.0 * s));
    head += (k % 2 == 1) ? term : -term;
    if (term < 1e-20) break;
  }
  const double a = 1.0 + 2.0 * s;
  const double T = 1.0 + 80.0 * kPi;
  const double middle = piecewise_integral([a](double t) { return std::cos(t) * std::pow(t, -a); }, T);
  const double tail = oscillatory_tail(a, T).real();
  const double far = 1.0 / (2.0 * s) - (middle + tail);
  return 2.0 * (head + far);
}

double symbol_integral_2d(double s) {
  // Polar reduction: I = 2 pi int_0^inf (1 - J0(r)) r^{-1-2s} dr.
  double head = 0.0;
  double term_base = 1.0;
  for (int k = 1; k < 30; ++k) {
    term_base *= 0.25 / (static_cast<double>(k) * k);
    const double term = term_base / (2.0 * k - 2.0 * s);
    head += (k % 2 == 1) ? term : -term;
    if (term < 1e-20) break;
  }
  const double a = 1.0 + 2.0 * s;
  const double T = 1.0 + 100.0 * kPi;
  const double middle = piecewise_integral(
      [a](double r) { return std::cyl_bessel_j(0.0, r) * std::pow(r, -a); }, T);

  // Hankel expansion of J0 integrated term by term against r^{-a}.
  const cplx I(0.0, 1.0);
  cplx acc = 0.0;
  double ak = 1.0;
  cplx ik = 1.0;
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      ak *= -((2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k);
      ik *= I;
    }
    if (std::abs(ak) * std::pow(T, -k) < 1e-22) break;
    acc += ik * ak * oscillatory_tail(a + 0.5 + k, T);
  }
  const double tail = (std::sqrt(2.0 / kPi) * std::exp(-I * (kPi / 4.0)) * acc).real();
  const double far = 1.0 / (2.0 * s) - (middle + tail);
  return 2.0 * kPi * (head + far);
}

}  // namespace

void check_order(int N, double s) {
  if (N < 1) throw InvalidInput("dimension must be positive");
  const double upper = std::min(1.0, 0.5 * N);
  if (!(s > 0.0 && s < upper)) {
    std::ostringstream os;
    os << "fractional order s=" << s << " outside (0, " << upper << ") for N=" << N;
    throw InvalidInput(os.str());
  }
}

void check_problem(int N, double s) {
  if (N != 1 && N != 2) throw InvalidInput("only dimensions 1 and 2 are supported");
  check_order(N, s);
}

ProblemParams ProblemParams::make(int N, double s) {
  check_problem(N, s);
  ProblemParams p;
  p.N = N;
  p.s = s;
  p.two_star = critical_exponent(N, s);
  p.alpha = rate_exponent(N, s);
  p.sobolev_constant = exact_constant(N, s);
  return p;
}

double rate_exponent(int N, double s) {
  check_order(N, s);
  return 2.0 * (2.0 - s) * (N - 2.0 * s) / (N + 4.0 * (1.0 - s));
}

double critical_exponent(int N, double s) {
  check_order(N, s);
  return 2.0 * N / (N - 2.0 * s);
}

double fourier_symbol_integral(int N, double s) {
  check_problem(N, s);
  const double v = (N == 1) ? symbol_integral_1d(s) : symbol_integral_2d(s);
  if (!std::isfinite(v) || v <= 0.0) throw NumericalFailure("symbol integral evaluation failed");
  return v;
}

double exact_constant(int N, double s) {
  check_problem(N, s);
  const double I = fourier_symbol_integral(N, s);
  const double n = N;
  const double gamma_ratio = std::tgamma((n + 2.0 * s) / 2.0) / std::tgamma((n - 2.0 * s) / 2.0);
  const double vol_factor = std::pow(std::tgamma(n / 2.0) / std::tgamma(n), 2.0 * s / n);
  return 2.0 * s * (1.0 - s) * I * std::pow(2.0, 2.0 * s) * std::pow(kPi, s) * gamma_ratio *
         vol_factor;
}

double optimal_concentration(double h, int N, double s) {
  check_order(N, s);
  if (!(h > 0.0 && h < 1.0)) throw InvalidInput("mesh size must lie in (0,1)");
  return std::pow(h, 2.0 * (2.0 - s) / (N + 4.0 * (1.0 - s)));
}

}  // namespace fracsob
