#pragma once

#include "fracsob/gagliardo.hpp"
#include "fracsob/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fracsob {

/// One level of a sweep. `value` is the deficit (upper-bound sweep) or
/// S_h - S_{N,s} (discrete-constant sweep).
struct SweepRecord {
  int level = 0;
  double h = 0.0;
  double c_h = 0.0;
  double value = 0.0;
  double quadrature_slack = 0.0;  ///< change of value under refined quadrature
  double wall_time = 0.0;         ///< seconds
};

/// Least-squares line through (log h, log value).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Requires at least 3 points with h > 0 and value > 0. No outlier handling.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct SweepOptions {
  QuadSpec quad;
  SolverOptions solver;
  bool slack = true;         ///< reassemble with refined quadrature to estimate the slack
  int slack_increment = 2;
  bool manifold_fit = true;  ///< discrete-constant sweep only
};

struct LevelDiagnostics {
  double warm_deficit = 0.0;  ///< deficit of the warm start I_h Psi
  int iterations = 0;
  bool converged = false;
  double el_residual = 0.0;
  ManifoldFit fit;
  double stability_ratio = 0.0;  ///< deficit * ||u||^2 / distance^2 for the minimizer
  double symmetry_error = 0.0;
  double assembly_seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<LevelDiagnostics> diagnostics;  ///< parallel to records
  std::vector<std::pair<int, std::string>> failures;
  RateFit fit;
  bool fit_ok = false;
  RateFit concentration_fit;  ///< log c_fit against log h (discrete-constant sweep)
  bool concentration_fit_ok = false;
};

SweepResult upper_bound_sweep(int N, double s, const std::vector<int>& levels, const SweepOptions& opts = {});
SweepResult discrete_constant_sweep(int N, double s, const std::vector<int>& levels,
                                    const SweepOptions& opts = {});

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(std::istream& is);

// Verification suites -------------------------------------------------------

struct InterpErrorRecord {
  int level = 0;
  double h = 0.0;
  double c = 0.0;
  double lq_error = 0.0;    ///< ||Psi - I_h Psi||_{L^q(B_h)}
  double grad_error = 0.0;  ///< ||D(Psi - I_h Psi)||_{L^q(B_h)}
};

struct InterpErrorReport {
  std::vector<InterpErrorRecord> h_sweep;
  std::vector<InterpErrorRecord> c_sweep;
  RateFit lq_h_fit;
  RateFit grad_h_fit;
  RateFit lq_c_fit;     ///< slope in c at fixed h
  double expected_c_slope = 0.0;
};

/// Psi uses lambda = normalize_lambda(c). The c-sweep runs at `c_level` over `c_values`.
InterpErrorReport verify_interp_error(int N, double s, double q, double c, const std::vector<int>& levels,
                                      int c_level, const std::vector<double>& c_values);

struct CoveringReport {
  std::uint64_t seed = 0;
  int samples = 0;
  double min_ratio = 0.0;          ///< over the first `samples` draws
  double min_ratio_doubled = 0.0;  ///< over twice as many draws (same stream)
  double relative_change = 0.0;    ///< (min_ratio - min_ratio_doubled) / min_ratio
  bool stable = false;             ///< relative_change < 0.2
  double worst_rho = 0.0;          ///< |x - X0| / c at the minimum
  double excluded_band_lo = 0.0;   ///< N = 1: rho in (lo, hi) is never sampled
  double excluded_band_hi = 0.0;
};

/// Dictionary Hessian ratio over random (lambda, c, X0, x).
CoveringReport verify_covering(int N, double s, int samples, std::uint64_t seed);

struct MinSeqRecord {
  double eps = 0.0;
  double quotient = 0.0;
  double gap = 0.0;
};

struct MinSeqReport {
  int level = 0;
  double h = 0.0;
  std::vector<MinSeqRecord> records;
  std::vector<double> halving_ratios;  ///< gap(eps_k) / gap(eps_{k+1})
  bool gaps_positive = false;
  bool gaps_decreasing = false;
};

/// Quotients of I_h Lambda_eps on one fixed mesh; rejects meshes with h > eps/4.
MinSeqReport verify_minimizing_sequence(int N, double s, const std::vector<double>& eps, int level,
                                        const QuadSpec& quad = {});

struct InequalityReport {
  std::uint64_t seed = 0;
  int samples = 0;
  // Element-wise fractional Poincare with its explicit constant; a hard check.
  double poincare_max_ratio = 0.0;  ///< max of lhs / (constant * rhs), must be <= 1
  int poincare_checks = 0;
  // Gagliardo-Nirenberg on B_h with s0 = 0, s1 = 1, theta = s.
  double gn_max = 0.0;          ///< over `samples` functions
  double gn_max_doubled = 0.0;  ///< over twice as many
  // Cube inequality with a fitted constant, per side length.
  std::vector<double> cube_sides;
  std::vector<double> cube_constant;
  std::vector<double> cube_constant_doubled;
};

/// `samples` random V_h functions on the level-`level` mesh; the cube
/// inequality is sampled on smooth bubbles (it needs second derivatives).
InequalityReport verify_functional_inequalities(int N, double s, int level, int samples, std::uint64_t seed,
                                                const std::vector<double>& cube_sides = {1.0, 0.5, 0.25});

}  // namespace fracsob
