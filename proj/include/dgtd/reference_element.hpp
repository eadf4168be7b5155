#pragma once

// Order-N nodal operators on the reference triangle (-1,-1), (1,-1), (-1,1).
//
// Nodes follow the warp & blend construction; all operators are built through
// the orthonormal (Dubiner) modal basis and its generalized Vandermonde matrix.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dgtd/errors.hpp"
#include "dgtd/polynomials.hpp"

namespace dgtd {

inline constexpr int kMaxOrder = 10;
inline constexpr int kFaces = 3;

struct RefPoint {
  double r = 0.0;
  double s = 0.0;
};

namespace detail {

/// Collapsed coordinates (a, b) for the Dubiner basis.
inline void rs_to_ab(const Vector& r, const Vector& s, Vector& a, Vector& b) {
  a.resize(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    a(i) = std::abs(s(i) - 1.0) > 1e-14 ? 2.0 * (1.0 + r(i)) / (1.0 - s(i)) - 1.0 : -1.0;
  }
  b = s;
}

inline Vector simplex_2d_p(const Vector& a, const Vector& b, int i, int j) {
  const Vector h1 = poly::jacobi_p(a, 0.0, 0.0, i);
  const Vector h2 = poly::jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
  return (std::sqrt(2.0) * h1.array() * h2.array() * (1.0 - b.array()).pow(i)).matrix();
}

inline void grad_simplex_2d_p(const Vector& a, const Vector& b, int id, int jd, Vector& dr, Vector& ds) {
  const Vector fa = poly::jacobi_p(a, 0.0, 0.0, id);
  const Vector dfa = poly::grad_jacobi_p(a, 0.0, 0.0, id);
  const Vector gb = poly::jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);
  const Vector dgb = poly::grad_jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);
  const Eigen::ArrayXd half_1mb = 0.5 * (1.0 - b.array());

  Eigen::ArrayXd dmode_dr = dfa.array() * gb.array();
  if (id > 0) dmode_dr *= half_1mb.pow(id - 1);

  Eigen::ArrayXd dmode_ds = dfa.array() * (gb.array() * (0.5 * (1.0 + a.array())));
  if (id > 0) dmode_ds *= half_1mb.pow(id - 1);

  Eigen::ArrayXd tmp = dgb.array() * half_1mb.pow(id);
  if (id > 0) tmp -= 0.5 * id * gb.array() * half_1mb.pow(id - 1);
  dmode_ds += fa.array() * tmp;

  const double scale = std::pow(2.0, id + 0.5);
  dr = (scale * dmode_dr).matrix();
  ds = (scale * dmode_ds).matrix();
}

/// Warp function along one edge: maps equispaced to Gauss-Lobatto positions.
inline Vector warp_factor(int order, const Vector& rout) {
  const Vector lgl = poly::jacobi_gl(order);
  const Vector req = Vector::LinSpaced(order + 1, -1.0, 1.0);
  const Matrix veq = poly::vandermonde_1d(order, req);
  Matrix pmat(order + 1, rout.size());
  for (int i = 0; i <= order; ++i) pmat.row(i) = poly::jacobi_p(rout, 0.0, 0.0, i).transpose();
  const Matrix lmat = veq.transpose().lu().solve(pmat);
  Vector warp = lmat.transpose() * (lgl - req);
  for (Eigen::Index i = 0; i < rout.size(); ++i) {
    const bool interior = std::abs(rout(i)) < 1.0 - 1e-10;
    if (interior) {
      warp(i) /= 1.0 - rout(i) * rout(i);
    } else {
      warp(i) = 0.0;
    }
  }
  return warp;
}

inline double warp_blend_alpha(int order) {
  static constexpr std::array<double, 15> kAlphaOpt = {0.0000, 0.0000, 1.4152, 0.1001, 0.2751,
                                                      0.9800, 1.0999, 1.2832, 1.3648, 1.4773,
                                                      1.4959, 1.5743, 1.5770, 1.6223, 1.6258};
  return order < 16 ? kAlphaOpt[order - 1] : 5.0 / 3.0;
}

/// Warp & blend nodes on the reference triangle, rows of constant s from the
/// bottom edge upward with r increasing inside each row.
inline void warp_blend_nodes(int order, Vector& r, Vector& s) {
  const int np = (order + 1) * (order + 2) / 2;
  const double alpha = warp_blend_alpha(order);
  Eigen::ArrayXd l1(np), l2(np), l3(np);
  int sk = 0;
  for (int n = 0; n <= order; ++n) {
    for (int m = 0; m <= order - n; ++m, ++sk) {
      l1(sk) = static_cast<double>(n) / order;
      l3(sk) = static_cast<double>(m) / order;
    }
  }
  l2 = 1.0 - l1 - l3;
  const double sqrt3 = std::sqrt(3.0);
  Eigen::ArrayXd x = -l2 + l3;
  Eigen::ArrayXd y = (-l2 - l3 + 2.0 * l1) / sqrt3;

  const Eigen::ArrayXd blend1 = 4.0 * l2 * l3;
  const Eigen::ArrayXd blend2 = 4.0 * l1 * l3;
  const Eigen::ArrayXd blend3 = 4.0 * l1 * l2;
  const Eigen::ArrayXd warpf1 = warp_factor(order, (l3 - l2).matrix()).array();
  const Eigen::ArrayXd warpf2 = warp_factor(order, (l1 - l3).matrix()).array();
  const Eigen::ArrayXd warpf3 = warp_factor(order, (l2 - l1).matrix()).array();
  const Eigen::ArrayXd warp1 = blend1 * warpf1 * (1.0 + (alpha * l1).square());
  const Eigen::ArrayXd warp2 = blend2 * warpf2 * (1.0 + (alpha * l2).square());
  const Eigen::ArrayXd warp3 = blend3 * warpf3 * (1.0 + (alpha * l3).square());

  const double pi = std::numbers::pi;
  x += warp1 + std::cos(2.0 * pi / 3.0) * warp2 + std::cos(4.0 * pi / 3.0) * warp3;
  y += std::sin(2.0 * pi / 3.0) * warp2 + std::sin(4.0 * pi / 3.0) * warp3;

  // Equilateral -> reference right triangle.
  const Eigen::ArrayXd b1 = (sqrt3 * y + 1.0) / 3.0;
  const Eigen::ArrayXd b2 = (-3.0 * x - sqrt3 * y + 2.0) / 6.0;
  const Eigen::ArrayXd b3 = (3.0 * x - sqrt3 * y + 2.0) / 6.0;
  r = (-b2 + b3 - b1).matrix();
  s = (-b2 - b3 + b1).matrix();
}

}  // namespace detail

/// Generalized Vandermonde matrix of the orthonormal basis at points (r, s).
inline Matrix vandermonde_2d(int order, const Vector& r, const Vector& s) {
  Vector a, b;
  detail::rs_to_ab(r, s, a, b);
  Matrix v(r.size(), (order + 1) * (order + 2) / 2);
  int col = 0;
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; j <= order - i; ++j) v.col(col++) = detail::simplex_2d_p(a, b, i, j);
  }
  return v;
}

inline void grad_vandermonde_2d(int order, const Vector& r, const Vector& s, Matrix& vr, Matrix& vs) {
  Vector a, b;
  detail::rs_to_ab(r, s, a, b);
  const int np = (order + 1) * (order + 2) / 2;
  vr.resize(r.size(), np);
  vs.resize(r.size(), np);
  int col = 0;
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; j <= order - i; ++j, ++col) {
      Vector dr, ds;
      detail::grad_simplex_2d_p(a, b, i, j, dr, ds);
      vr.col(col) = dr;
      vs.col(col) = ds;
    }
  }
}

inline bool inside_reference_triangle(RefPoint p, double tol = 1e-12) {
  return p.r >= -1.0 - tol && p.s >= -1.0 - tol && p.r + p.s <= tol;
}

/// Nodal operators of order N on the reference triangle. Immutable once built.
///
/// Face f runs between reference vertices f and (f+1)%3:
///   face 0: s = -1, face 1: r + s = 0, face 2: r = -1.
/// `face_nodes[f]` lists volume node indices on that face in increasing node
/// order; `face_coord[f]` holds the matching 1D edge coordinate in [-1, 1].
class ReferenceElement {
 public:
  explicit ReferenceElement(int order) : order_(order) {
    if (order < 1 || order > kMaxOrder) {
      throw InvalidOrderError("polynomial order " + std::to_string(order) + " outside supported range [1, " +
                              std::to_string(kMaxOrder) + "]");
    }
    np_ = (order + 1) * (order + 2) / 2;
    nfp_ = order + 1;
    detail::warp_blend_nodes(order, r_, s_);
    vandermonde_ = vandermonde_2d(order, r_, s_);
    inv_vandermonde_ = vandermonde_.inverse();
    mass_ = (vandermonde_ * vandermonde_.transpose()).inverse();
    mass_ = 0.5 * (mass_ + mass_.transpose());
    inv_mass_ = vandermonde_ * vandermonde_.transpose();

    Matrix vr, vs;
    grad_vandermonde_2d(order, r_, s_, vr, vs);
    diff_r_ = vr * inv_vandermonde_;
    diff_s_ = vs * inv_vandermonde_;
    build_faces();
  }

  int order() const { return order_; }
  int node_count() const { return np_; }
  int face_node_count() const { return nfp_; }

  const Vector& r() const { return r_; }
  const Vector& s() const { return s_; }
  RefPoint node(int i) const { return {r_(i), s_(i)}; }

  const Matrix& vandermonde() const { return vandermonde_; }
  const Matrix& inv_vandermonde() const { return inv_vandermonde_; }
  const Matrix& mass() const { return mass_; }
  const Matrix& inv_mass() const { return inv_mass_; }
  const Matrix& diff_r() const { return diff_r_; }
  const Matrix& diff_s() const { return diff_s_; }
  const std::array<std::vector<int>, kFaces>& face_nodes() const { return face_nodes_; }
  const std::array<Vector, kFaces>& face_coord() const { return face_coord_; }
  const Matrix& face_mass_1d(int face) const { return face_mass_[face]; }
  /// Np x 3*Nfp; column block f holds face f's contribution.
  const Matrix& lift() const { return lift_; }

  /// Evaluates the degree-N interpolant of `nodal_values` at a point.
  double interpolate(const Vector& nodal_values, RefPoint p) const {
    if (!inside_reference_triangle(p, 1e-10)) {
      throw DomainError("point (" + std::to_string(p.r) + ", " + std::to_string(p.s) +
                        ") lies outside the reference triangle");
    }
    const Vector basis = vandermonde_2d(order_, Vector::Constant(1, p.r), Vector::Constant(1, p.s)).row(0);
    return basis.dot(inv_vandermonde_ * nodal_values);
  }

  /// Interpolation matrix from nodal values to arbitrary reference points.
  Matrix interpolation_matrix(const Vector& r, const Vector& s) const {
    return vandermonde_2d(order_, r, s) * inv_vandermonde_;
  }

 private:
  void build_faces() {
    constexpr double tol = 1e-10;
    for (auto& f : face_nodes_) f.clear();
    for (int i = 0; i < np_; ++i) {
      if (std::abs(s_(i) + 1.0) < tol) face_nodes_[0].push_back(i);
      if (std::abs(r_(i) + s_(i)) < tol) face_nodes_[1].push_back(i);
      if (std::abs(r_(i) + 1.0) < tol) face_nodes_[2].push_back(i);
    }
    for (int f = 0; f < kFaces; ++f) {
      if (static_cast<int>(face_nodes_[f].size()) != nfp_) {
        throw NumericalError("reference face " + std::to_string(f) + " has the wrong number of nodes");
      }
    }

    // Edge parametrizations matching the node placement on each face.
    lift_ = Matrix::Zero(np_, kFaces * nfp_);
    Matrix emat = Matrix::Zero(np_, kFaces * nfp_);
    for (int f = 0; f < kFaces; ++f) {
      Vector coord(nfp_);
      for (int j = 0; j < nfp_; ++j) {
        const int n = face_nodes_[f][j];
        coord(j) = (f == 2) ? s_(n) : r_(n);
      }
      face_coord_[f] = coord;
      const Matrix v1d = poly::vandermonde_1d(order_, coord);
      face_mass_[f] = (v1d * v1d.transpose()).inverse();
      for (int j = 0; j < nfp_; ++j) {
        for (int i = 0; i < nfp_; ++i) emat(face_nodes_[f][i], f * nfp_ + j) = face_mass_[f](i, j);
      }
    }
    lift_ = vandermonde_ * (vandermonde_.transpose() * emat);
  }

  int order_ = 0;
  int np_ = 0;
  int nfp_ = 0;
  Vector r_, s_;
  Matrix vandermonde_, inv_vandermonde_;
  Matrix mass_, inv_mass_;
  Matrix diff_r_, diff_s_;
  std::array<std::vector<int>, kFaces> face_nodes_;
  std::array<Vector, kFaces> face_coord_;
  std::array<Matrix, kFaces> face_mass_;
  Matrix lift_;
};

inline ReferenceElement build_reference_element(int order) { return ReferenceElement(order); }

}  // namespace dgtd
