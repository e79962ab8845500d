#pragma once

#include "fracsob/mesh.hpp"

#include <Eigen/Core>

#include <vector>

namespace fracsob {

/// Point/weight set on the reference simplex of dimension N, barycentric form.
/// Weights are positive and sum to 1.
struct QuadratureRule {
  int N = 1;
  int order = 0;   ///< Gauss points per direction
  int degree = 0;  ///< exact for polynomials up to this total degree
  std::vector<Eigen::Vector3d> bary;
  std::vector<double> w;

  static QuadratureRule make(int N, int order);
  [[nodiscard]] std::size_t size() const { return w.size(); }
};

struct LqOptions {
  int order = 6;
  double audit_tol = 1e-8;  ///< relative change allowed when the order is doubled
  int max_retries = 3;      ///< +2 each
};

/// int |u|^q over B_h and, optionally, b_i = int |u|^{q-2} u phi_i on free nodes,
/// both with the same rule so that sum_i u_i b_i = power exactly.
struct LqEvaluation {
  double power = 0.0;
  Eigen::VectorXd residual;
  int order_used = 0;
  double audit_change = 0.0;  ///< relative change of power under order doubling
  bool audit_passed = true;
};

/// Elements where u changes sign are split along the zero line first.
LqEvaluation lq_evaluate(const FeFunction& u, double q, bool with_residual, const LqOptions& opts = {});

/// ||u||_{L^q(B_h)}, q >= 1.
double lq_norm(const FeFunction& u, double q, const LqOptions& opts = {});

/// b(u)_i = int |u|^{q-2} u phi_i for free nodes i; q > 2, u != 0.
Eigen::VectorXd nonlinear_residual(const FeFunction& u, double q, const LqOptions& opts = {});

}  // namespace fracsob
