#pragma once

namespace fracsob {

/// Dimension, fractional order and the constants derived from them.
struct ProblemParams {
  int N = 1;
  double s = 0.25;
  double two_star = 4.0;          ///< 2N/(N-2s)
  double alpha = 0.4375;          ///< rate exponent
  double sobolev_constant = 0.0;  ///< exact S_{N,s}

  /// Validates (N, s) with N in {1,2} and fills the derived fields.
  static ProblemParams make(int N, double s);
};

/// Throws InvalidInput unless N >= 1 and 0 < s < min(1, N/2).
void check_order(int N, double s);

/// Throws InvalidInput unless N is 1 or 2 and (N, s) is admissible.
void check_problem(int N, double s);

/// 2(2-s)(N-2s)/(N+4(1-s)).
double rate_exponent(int N, double s);

/// 2N/(N-2s).
double critical_exponent(int N, double s);

/// I(N,s) = integral over R^N of (1 - cos z_1)/|z|^(N+2s), N in {1,2}.
/// Accurate to about 1e-13 relative.
double fourier_symbol_integral(int N, double s);

/// Sharp constant of the fractional Sobolev inequality with the seminorm
/// normalized by s(1-s).
double exact_constant(int N, double s);

/// Balanced concentration c_h = h^(2(2-s)/(N+4(1-s))) for 0 < h < 1.
double optimal_concentration(double h, int N, double s);

}  // namespace fracsob
