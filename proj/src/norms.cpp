#include "fracsob/norms.hpp"

#include "fracsob/errors.hpp"
#include "fracsob/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace fracsob {

namespace {

// A piece of an element in the element's own barycentric coordinates.
struct Piece {
  std::array<Eigen::Vector3d, 3> v;
  double fraction = 0.0;  // measure relative to the element
};

Eigen::Vector3d unit(int k) {
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e(k) = 1.0;
  return e;
}

// Splits an affine function's element along its zero set so that it is
// one-signed on every piece; exact because the zero set is a point or a line.
int split_by_sign(int N, const double* val, Piece* out) {
  bool pos = false;
  bool neg = false;
  for (int k = 0; k <= N; ++k) {
    pos = pos || val[k] > 0.0;
    neg = neg || val[k] < 0.0;
  }
  if (!(pos && neg)) {
    out[0].v = {unit(0), unit(1), unit(2)};
    out[0].fraction = 1.0;
    return 1;
  }
  if (N == 1) {
    const double t = val[0] / (val[0] - val[1]);
    const Eigen::Vector3d z = (1.0 - t) * unit(0) + t * unit(1);
    out[0].v = {unit(0), z, Eigen::Vector3d::Zero()};
    out[0].fraction = t;
    out[1].v = {z, unit(1), Eigen::Vector3d::Zero()};
    out[1].fraction = 1.0 - t;
    return 2;
  }
  // The lone vertex is the one whose class (negative / nonnegative) differs.
  int lone = 0;
  for (int k = 0; k < 3; ++k) {
    const bool nk = val[k] < 0.0;
    if (nk != (val[(k + 1) % 3] < 0.0) && nk != (val[(k + 2) % 3] < 0.0)) lone = k;
  }
  const int j = (lone + 1) % 3;
  const int l = (lone + 2) % 3;
  auto zero_on = [&](int a) {
    const double t = val[lone] / (val[lone] - val[a]);
    return Eigen::Vector3d((1.0 - t) * unit(lone) + t * unit(a));
  };
  const Eigen::Vector3d zj = zero_on(j);
  const Eigen::Vector3d zl = zero_on(l);
  const std::array<std::array<Eigen::Vector3d, 3>, 3> tris = {{{unit(lone), zj, zl}, {zj, unit(j), unit(l)},
                                                               {zj, unit(l), zl}}};
  for (int p = 0; p < 3; ++p) {
    Eigen::Matrix3d B;
    for (int c = 0; c < 3; ++c) B.col(c) = tris[p][c];
    out[p].v = tris[p];
    out[p].fraction = std::abs(B.determinant());
  }
  return 3;
}

double evaluate_power(const FeFunction& u, double q, int order, Eigen::VectorXd* residual) {
  const BallMesh& m = *u.mesh;
  const QuadratureRule rule = QuadratureRule::make(m.N, order);
  const int nv = m.N + 1;
  if (residual) residual->setZero(m.num_free);
  double total = 0.0;
  Piece pieces[3];
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& el = m.elements[e];
    double val[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < nv; ++k) val[k] = u.values(el[k]);
    if (val[0] == 0.0 && val[1] == 0.0 && val[2] == 0.0) continue;
    const double meas = m.measure(e);
    const int np = split_by_sign(m.N, val, pieces);
    double acc[3] = {0.0, 0.0, 0.0};
    double elem = 0.0;
    for (int p = 0; p < np; ++p) {
      const Piece& pc = pieces[p];
      if (pc.fraction <= 0.0) continue;
      for (std::size_t i = 0; i < rule.size(); ++i) {
        Eigen::Vector3d lam = Eigen::Vector3d::Zero();
        for (int k = 0; k < nv; ++k) lam += rule.bary[i](k) * pc.v[k];
        double x = 0.0;
        for (int k = 0; k < nv; ++k) x += lam(k) * val[k];
        const double w = rule.w[i] * pc.fraction * meas;
        const double ax = std::abs(x);
        elem += w * std::pow(ax, q);
        if (residual && ax > 0.0) {
          const double g = w * std::pow(ax, q - 2.0) * x;
          for (int k = 0; k < nv; ++k) acc[k] += g * lam(k);
        }
      }
    }
    total += elem;
    if (residual)
      for (int k = 0; k < nv; ++k)
        if (el[k] < m.num_free) (*residual)(el[k]) += acc[k];
  }
  return total;
}

}  // namespace

QuadratureRule QuadratureRule::make(int N, int order) {
  if (order < 1) throw InvalidInput("quadrature order must be positive");
  QuadratureRule r;
  r.N = N;
  r.order = order;
  r.degree = 2 * order - 1;
  if (N == 1) {
    const Rule1D& g = gauss_legendre(order);
    for (std::size_t i = 0; i < g.size(); ++i) {
      r.bary.emplace_back(1.0 - g.x[i], g.x[i], 0.0);
      r.w.push_back(g.w[i]);
    }
  } else if (N == 2) {
    const TriangleRule& t = triangle_rule(order);
    r.bary = t.bary;
    r.w = t.w;
  } else {
    throw InvalidInput("quadrature rules exist for N = 1, 2 only");
  }
  return r;
}

LqEvaluation lq_evaluate(const FeFunction& u, double q, bool with_residual, const LqOptions& opts) {
  if (!u.mesh) throw InvalidInput("function without a mesh");
  if (!(q >= 1.0)) throw InvalidInput("L^q norm needs q >= 1");
  if (opts.order < 1 || opts.max_retries < 0) throw InvalidInput("invalid L^q quadrature options");
  LqEvaluation out;
  int order = opts.order;
  for (int attempt = 0;; ++attempt) {
    const double p = evaluate_power(u, q, order, nullptr);
    const double p2 = evaluate_power(u, q, 2 * order, nullptr);
    out.audit_change = p2 > 0.0 ? std::abs(p - p2) / p2 : 0.0;
    out.audit_passed = out.audit_change <= opts.audit_tol;
    if (out.audit_passed || attempt == opts.max_retries) break;
    order += 2;
  }
  out.order_used = order;
  if (with_residual) {
    out.residual.resize(u.mesh->num_free);
    out.power = evaluate_power(u, q, order, &out.residual);
  } else {
    out.power = evaluate_power(u, q, order, nullptr);
  }
  return out;
}

double lq_norm(const FeFunction& u, double q, const LqOptions& opts) {
  return std::pow(lq_evaluate(u, q, false, opts).power, 1.0 / q);
}

Eigen::VectorXd nonlinear_residual(const FeFunction& u, double q, const LqOptions& opts) {
  if (!(q > 2.0)) throw InvalidInput("nonlinear residual needs q > 2");
  if (!u.mesh || u.values.cwiseAbs().maxCoeff() == 0.0) throw InvalidInput("nonlinear residual of the zero function");
  return lq_evaluate(u, q, true, opts).residual;
}

}  // namespace fracsob
