#pragma once

#include "fracsob/gagliardo.hpp"
#include "fracsob/norms.hpp"

#include <vector>

namespace fracsob {

/// [u]^2 / ||u||_{L^{2*}}^2 for the form's (N, s).
double rayleigh_quotient(const NonlocalForm& form, const FeFunction& u, const LqOptions& lq = {});

/// rayleigh_quotient - S_{N,s}; rejects u = 0.
double deficit(const NonlocalForm& form, const FeFunction& u, const LqOptions& lq = {});

/// I_h Psi_{lambda_h, c_h, 0} with the balanced c_h = optimal_concentration(h).
FeFunction warm_start(const MeshPtr& mesh, double s);

struct SolverOptions {
  double tol = 1e-10;  ///< relative quotient decrease that ends the iteration
  int max_iter = 200;
  int max_halvings = 40;
  bool extrapolate = true;  ///< try longer steps along accepted directions
  LqOptions lq;
};

struct SolverReport {
  double S_h = 0.0;
  FeFunction minimizer;  ///< unit L^{2*} norm, one-signed in practice
  int iterations = 0;
  std::vector<double> quotient_history;
  bool converged = false;
  double tolerance_used = 0.0;
  double mu = 0.0;           ///< [u]^2 at the final unit-norm iterate
  double el_residual = 0.0;  ///< ||A u - mu b(u)|| / ||A u||
};

SolverReport solve(const NonlocalForm& form, const FeFunction& init, const SolverOptions& opts = {});
/// Starts from warm_start(form.mesh, form.s).
SolverReport solve(const NonlocalForm& form, const SolverOptions& opts = {});

struct BubbleParams {
  double lambda = 1.0;
  double c = 0.1;
  Point center = Point::Zero();
};

struct ManifoldFit {
  double lambda = 0.0;
  double c = 0.0;
  Point center = Point::Zero();
  double discrete_distance_sq = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// min over lambda of [u - lambda I_h Phi_{1,c,X0}]^2; also returns the optimal lambda.
double manifold_objective(const NonlocalForm& form, const FeFunction& u, double c, const Point& center,
                          double* lambda_opt = nullptr);

/// Nelder-Mead over (log c, X0) with lambda eliminated in closed form.
ManifoldFit fit_manifold(const NonlocalForm& form, const FeFunction& u, const BubbleParams& guess,
                         int max_iter = 4000);

}  // namespace fracsob
