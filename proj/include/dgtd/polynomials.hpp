#pragma once

// Orthonormal Jacobi polynomials, Gauss quadrature and the collapsed-coordinate
// triangle rule used throughout the library.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "dgtd/errors.hpp"

namespace dgtd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace poly {

/// Normalized Jacobi polynomial P_n^{(alpha,beta)} evaluated at every entry of x.
inline Vector jacobi_p(const Vector& x, double alpha, double beta, int n) {
  const double ab = alpha + beta;
  const double gamma0 = std::pow(2.0, ab + 1.0) / (ab + 1.0) * std::tgamma(alpha + 1.0) *
                        std::tgamma(beta + 1.0) / std::tgamma(ab + 1.0);
  Vector p_prev = Vector::Constant(x.size(), 1.0 / std::sqrt(gamma0));
  if (n == 0) return p_prev;

  const double gamma1 = (alpha + 1.0) * (beta + 1.0) / (ab + 3.0) * gamma0;
  Vector p_curr = (((ab + 2.0) * x.array() / 2.0 + (alpha - beta) / 2.0) / std::sqrt(gamma1)).matrix();
  if (n == 1) return p_curr;

  double a_old = 2.0 / (2.0 + ab) * std::sqrt((alpha + 1.0) * (beta + 1.0) / (ab + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + ab;
    const double a_new = 2.0 / (h1 + 2.0) *
                         std::sqrt((i + 1.0) * (i + 1.0 + ab) * (i + 1.0 + alpha) * (i + 1.0 + beta) /
                                   (h1 + 1.0) / (h1 + 3.0));
    const double b_new = -(alpha * alpha - beta * beta) / h1 / (h1 + 2.0);
    Vector p_next = (1.0 / a_new) * (-a_old * p_prev.array() + (x.array() - b_new) * p_curr.array()).matrix();
    p_prev = std::move(p_curr);
    p_curr = std::move(p_next);
    a_old = a_new;
  }
  return p_curr;
}

inline double jacobi_p(double x, double alpha, double beta, int n) {
  return jacobi_p(Vector::Constant(1, x), alpha, beta, n)(0);
}

inline Vector grad_jacobi_p(const Vector& x, double alpha, double beta, int n) {
  if (n == 0) return Vector::Zero(x.size());
  return std::sqrt(n * (n + alpha + beta + 1.0)) * jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1);
}

struct Rule1D {
  Vector points;
  Vector weights;
};

/// Gauss quadrature for weight (1-x)^alpha (1+x)^beta with n+1 points
/// (Golub-Welsch on the Jacobi matrix).
inline Rule1D jacobi_gq(double alpha, double beta, int n) {
  Rule1D rule;
  if (n == 0) {
    rule.points = Vector::Constant(1, -(alpha - beta) / (alpha + beta + 2.0));
    rule.weights = Vector::Constant(1, 2.0);
    return rule;
  }
  const double ab = alpha + beta;
  Matrix jac = Matrix::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    const double h1 = 2.0 * i + ab;
    jac(i, i) = (h1 + 2.0) * h1 == 0.0 ? 0.0 : -0.5 * (alpha * alpha - beta * beta) / (h1 + 2.0) / h1;
    if (i < n) {
      const double k = i + 1.0;
      jac(i, i + 1) = 2.0 / (h1 + 2.0) *
                      std::sqrt(k * (k + ab) * (k + alpha) * (k + beta) / (h1 + 1.0) / (h1 + 3.0));
      jac(i + 1, i) = jac(i, i + 1);
    }
  }
  if (ab < 10.0 * std::numeric_limits<double>::epsilon()) jac(0, 0) = 0.0;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(jac);
  rule.points = eig.eigenvalues();
  const double scale = std::pow(2.0, ab + 1.0) / (ab + 1.0) * std::tgamma(alpha + 1.0) *
                       std::tgamma(beta + 1.0) / std::tgamma(ab + 1.0);
  rule.weights = eig.eigenvectors().row(0).transpose().array().square() * scale;
  return rule;
}

/// Legendre-Gauss-Lobatto points, n+1 of them, on [-1, 1].
inline Vector jacobi_gl(int n) {
  Vector x(n + 1);
  x(0) = -1.0;
  x(n) = 1.0;
  if (n == 1) return x;
  const Rule1D interior = jacobi_gq(1.0, 1.0, n - 2);
  x.segment(1, n - 1) = interior.points;
  return x;
}

inline Rule1D gauss_legendre(int n_points) { return jacobi_gq(0.0, 0.0, n_points - 1); }

/// 1D Vandermonde of the orthonormal Legendre basis.
inline Matrix vandermonde_1d(int order, const Vector& r) {
  Matrix v(r.size(), order + 1);
  for (int j = 0; j <= order; ++j) v.col(j) = jacobi_p(r, 0.0, 0.0, j);
  return v;
}

/// Quadrature rule on the reference triangle (-1,-1), (1,-1), (-1,1), built
/// from a Gauss-Legendre x Gauss-Jacobi(1,0) tensor rule through the Duffy map.
/// Exact for polynomials of total degree <= 2*n_points - 1.
struct TriangleRule {
  Vector r;
  Vector s;
  Vector weights;
};

inline TriangleRule triangle_rule(int n_points) {
  const Rule1D ga = gauss_legendre(n_points);
  const Rule1D gb = jacobi_gq(1.0, 0.0, n_points - 1);
  TriangleRule rule;
  const int count = n_points * n_points;
  rule.r.resize(count);
  rule.s.resize(count);
  rule.weights.resize(count);
  int q = 0;
  for (int i = 0; i < n_points; ++i) {
    for (int j = 0; j < n_points; ++j, ++q) {
      const double a = ga.points(i);
      const double b = gb.points(j);
      rule.r(q) = 0.5 * (1.0 + a) * (1.0 - b) - 1.0;
      rule.s(q) = b;
      // dr ds = (1-b)/2 da db; the (1-b) factor lives in the Jacobi weight.
      rule.weights(q) = 0.5 * ga.weights(i) * gb.weights(j);
    }
  }
  return rule;
}

}  // namespace poly
}  // namespace dgtd
