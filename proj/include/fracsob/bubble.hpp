#pragma once

#include <Eigen/Core>

namespace fracsob {

/// Points live in R^2; for N = 1 the second coordinate is ignored and kept at 0.
using Point = Eigen::Vector2d;

/// Phi(x) = lambda (1 + |x - X0|^2 / c^2)^{-(N-2s)/2}.
struct Bubble {
  int N = 1;
  double s = 0.25;
  double lambda = 1.0;
  double c = 1.0;
  Point center = Point::Zero();

  Bubble() = default;
  Bubble(int N, double s, double lambda, double c, Point center = Point::Zero());

  [[nodiscard]] double evaluate(const Point& x) const;
  /// Gradient, size N.
  [[nodiscard]] Eigen::VectorXd gradient(const Point& x) const;
  /// Hessian, N x N. At x = X0 the removable-singularity limit is returned.
  [[nodiscard]] Eigen::MatrixXd hessian(const Point& x) const;
  /// Closed-form Frobenius norm of the Hessian.
  [[nodiscard]] double hessian_frobenius(const Point& x) const;

  /// Radial profile derivatives of Phi/lambda at distance r from the center.
  [[nodiscard]] double radial_first(double r) const;
  [[nodiscard]] double radial_second(double r) const;

  [[nodiscard]] double distance(const Point& x) const;
};

/// Psi = Phi_{lambda,c,0} - offset, vanishing on the unit sphere.
struct TruncatedBubble {
  Bubble base;
  double offset = 0.0;

  [[nodiscard]] double evaluate(const Point& x) const { return base.evaluate(x) - offset; }
  [[nodiscard]] Eigen::VectorXd gradient(const Point& x) const { return base.gradient(x); }
  [[nodiscard]] Eigen::MatrixXd hessian(const Point& x) const { return base.hessian(x); }
};

TruncatedBubble truncated_bubble(int N, double s, double lambda, double c);

/// lambda_c with ||Psi_{lambda_c,c,0}||_{L^{2*}(B)} = 1.
double normalize_lambda(double c, int N, double s);

enum class Region { Ball, AllSpace };

/// ||Phi||_{L^q(region)}. For Region::Ball the center must lie in the closed ball.
double bubble_lq_norm(const Bubble& b, double q, Region region);

/// ||Psi||_{L^q(B)}.
double bubble_lq_norm(const TruncatedBubble& b, double q);

}  // namespace fracsob
