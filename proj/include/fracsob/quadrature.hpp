#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace fracsob {

/// Point/weight set on [0,1].
struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
  [[nodiscard]] std::size_t size() const { return x.size(); }
};

/// Gauss-Legendre rule with n points on [0,1]; exact for degree 2n-1.
const Rule1D& gauss_legendre(int n);

/// Gauss-Jacobi rule with n points on [0,1] for the weight t^beta (1-t)^alpha,
/// alpha, beta > -1. The weight is folded into the returned weights.
const Rule1D& gauss_jacobi(int n, double alpha, double beta);

/// Point/weight set on a triangle in barycentric form: point = sum_k bary[k] P_k.
/// Weights sum to the reference area 1 (multiply by |T|).
struct TriangleRule {
  std::vector<Eigen::Vector3d> bary;
  std::vector<double> w;
  [[nodiscard]] std::size_t size() const { return w.size(); }
};

/// Collapsed (Duffy) tensor rule with n points per direction. The collapsed
/// direction uses Gauss-Jacobi so the Jacobian is integrated exactly; exact for
/// polynomials of total degree 2n-1.
const TriangleRule& triangle_rule(int n);

/// Collapsed rule for integrands carrying the factor dist(x, edge)^(-gamma),
/// gamma < 1, where the edge is the one opposite vertex 0. The weights are
/// divided by that factor, so the rule applies to the full integrand.
TriangleRule triangle_rule_edge_singular(int n, double gamma);

/// Collapsed rule for integrands carrying |x - P_0|^(-gamma), gamma < 2, at vertex 0.
TriangleRule triangle_rule_vertex_singular(int n, double gamma);

/// Adaptive Gauss-Kronrod quadrature on [a,b]. Throws NumericalFailure when the
/// error estimate exceeds tol * max(1, |result|).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-13, double* error = nullptr);

}  // namespace fracsob
