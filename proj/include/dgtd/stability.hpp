#pragma once

// Sufficient time-step bounds for the leap-frog DG scheme (2D TE and 3D) and
// the polynomial trace / inverse-inequality constants they are built from.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "dgtd/dg_core.hpp"
#include "dgtd/errors.hpp"
#include "dgtd/materials.hpp"
#include "dgtd/mesh.hpp"
#include "dgtd/reference_element.hpp"

namespace dgtd {

/// Sharp constant of ||u||_f <= C ||u||_T for u in P_N(T):
/// 2D: sqrt((N+1)(N+2)/2 |f|/|T|), 3D: sqrt((N+1)(N+3)/3 |f|/|T|).
inline double trace_constant_exact(int order, double face_measure, double cell_measure, int dim) {
  if (order < 0) throw DomainError("trace constant needs N >= 0");
  if (!(face_measure > 0.0) || !(cell_measure > 0.0)) throw DomainError("trace constant needs positive measures");
  const double n = order;
  switch (dim) {
    case 2:
      return std::sqrt((n + 1.0) * (n + 2.0) / 2.0 * face_measure / cell_measure);
    case 3:
      return std::sqrt((n + 1.0) * (n + 3.0) / 3.0 * face_measure / cell_measure);
    default:
      throw DomainError("trace constant defined for dim 2 or 3, got " + std::to_string(dim));
  }
}

/// Smallest C_tau such that ||u||_{dT} <= C_tau sqrt((N+1)(N+2)) h_k^{-1/2} ||u||_T
/// follows from the per-edge exact trace bound on every element:
/// C_tau = max_k sqrt(h_k * perimeter_k / (2 |T_k|)). Independent of N.
inline double calibrate_c_tau(const Mesh2D& mesh) {
  double c = 0.0;
  for (int k = 0; k < mesh.element_count(); ++k) {
    c = std::max(c, std::sqrt(mesh.h[k] * mesh.perimeter(k) / (2.0 * mesh.area[k])));
  }
  return c;
}

namespace detail {

/// Largest lambda with (M + S) v = lambda M v, i.e. max ||u||_{H1}^2 / ||u||^2.
inline double max_h1_ratio(const Matrix& mass, const Matrix& stiffness) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(mass + stiffness, mass, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("generalized eigenproblem for C_inv failed");
  return eig.eigenvalues().maxCoeff();
}

/// Physical mass and H1-seminorm stiffness of an affine element.
inline std::pair<Matrix, Matrix> element_mass_stiffness(const ReferenceElement& ref, const JacobianFactors& j) {
  const Matrix dx = j.rx * ref.diff_r() + j.sx * ref.diff_s();
  const Matrix dy = j.ry * ref.diff_r() + j.sy * ref.diff_s();
  const Matrix mass = j.det * ref.mass();
  Matrix stiff = dx.transpose() * mass * dx + dy.transpose() * mass * dy;
  stiff = 0.5 * (stiff + stiff.transpose());
  return {mass, stiff};
}

}  // namespace detail

/// C_inv(N) = (h / N^2) sqrt(lambda_max) for one element of diameter h, where
/// lambda_max is the largest generalized eigenvalue of the H1 form against the
/// L2 form on P_N of that element.
inline double inverse_constant(const ReferenceElement& ref, const JacobianFactors& j, double diameter) {
  const auto [mass, stiff] = detail::element_mass_stiffness(ref, j);
  const double n2 = static_cast<double>(ref.order()) * ref.order();
  return diameter / n2 * std::sqrt(detail::max_h1_ratio(mass, stiff));
}

struct InverseConstants {
  std::vector<double> per_order;  // index N-1
  double value = 0.0;             // max over N
};

/// Inverse-inequality constant on the reference triangle itself
/// (diameter 2 sqrt 2), for N = 1..n_max.
inline InverseConstants calibrate_c_inv(int n_max) {
  if (n_max < 1) throw DomainError("calibrate_c_inv needs N_max >= 1");
  InverseConstants out;
  const JacobianFactors identity{1.0, 0.0, 0.0, 1.0, 1.0};
  for (int n = 1; n <= n_max; ++n) {
    const ReferenceElement ref(n);
    out.per_order.push_back(inverse_constant(ref, identity, 2.0 * std::sqrt(2.0)));
  }
  out.value = *std::max_element(out.per_order.begin(), out.per_order.end());
  return out;
}

/// Inverse-inequality constant maximized over the elements of a mesh.
/// Elements with identical affine factors are evaluated once.
inline InverseConstants calibrate_c_inv(const Mesh2D& mesh, int n_max) {
  if (n_max < 1) throw DomainError("calibrate_c_inv needs N_max >= 1");
  std::map<std::tuple<long long, long long, long long, long long>, int> shapes;
  auto q = [](double v) { return std::llround(v * 1e9); };
  for (int k = 0; k < mesh.element_count(); ++k) {
    const JacobianFactors& j = mesh.jacobian[k];
    shapes.try_emplace({q(j.rx), q(j.ry), q(j.sx), q(j.sy)}, k);
  }
  InverseConstants out;
  for (int n = 1; n <= n_max; ++n) {
    const ReferenceElement ref(n);
    double c = 0.0;
    for (const auto& [key, k] : shapes) c = std::max(c, inverse_constant(ref, mesh.jacobian[k], mesh.h[k]));
    out.per_order.push_back(c);
  }
  out.value = *std::max_element(out.per_order.begin(), out.per_order.end());
  return out;
}

struct BetaParams {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;  // unused for PEC, stored as 0
};

inline BetaParams beta_params(BoundaryCondition bc, double alpha) {
  switch (bc) {
    case BoundaryCondition::kPec:
      return {alpha, 0.0, 0.0};
    case BoundaryCondition::kPmc:
      return {0.0, 1.0, alpha};
    case BoundaryCondition::kSilverMuller:
      return {0.5, 0.5, 1.0};
  }
  throw ConfigError("unknown boundary condition");
}

struct BoundInputs {
  int order = 1;
  double h_min = 0.0;
  double eps_lower = 0.0;
  double mu_lower = 0.0;
  double z_min = 0.0;
  double y_min = 0.0;
  double alpha = 0.0;
  BoundaryCondition bc = BoundaryCondition::kPec;
  double c_inv = 0.0;
  double c_tau = 0.0;
};

struct StabilityConstants {
  double c_inv = 0.0;
  double c_tau = 0.0;
  BetaParams beta;
  double c_e = 0.0;
  double c_h = 0.0;
  double dt_bound = 0.0;
};

namespace detail {

inline void check_bound_inputs(const BoundInputs& in) {
  if (in.order < 1) throw DomainError("stability bound needs N >= 1");
  const std::pair<const char*, double> positive[] = {{"h_min", in.h_min}, {"eps_lower", in.eps_lower},
                                                      {"mu_lower", in.mu_lower}, {"Z_min", in.z_min},
                                                      {"Y_min", in.y_min}, {"C_inv", in.c_inv},
                                                      {"C_tau", in.c_tau}};
  for (const auto& [name, v] : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive");
  }
  if (!(in.alpha >= 0.0 && in.alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
}

inline StabilityConstants finish_bound(const BoundInputs& in, BetaParams beta, double c_e, double c_h) {
  StabilityConstants out;
  out.c_inv = in.c_inv;
  out.c_tau = in.c_tau;
  out.beta = beta;
  out.c_e = c_e;
  out.c_h = c_h;
  out.dt_bound = std::min(in.eps_lower, in.mu_lower) * in.h_min / std::max(c_e, c_h);
  return out;
}

}  // namespace detail

/// Sufficient stability condition for the 2D scheme:
///   dt < min(eps_lower, mu_lower) / max(C_E, C_H) * h_min
///   C_E = C_inv N^2 / 2 + C_tau^2 (N+1)(N+2) (2 + b2 + (2 alpha + b1) / (2 Z_min))
///   C_H = C_inv N^2 / 2 + C_tau^2 (N+1)(N+2) (2 + b2 + (alpha + b2 b3) / Y_min)
inline StabilityConstants stability_bound_2d(const BoundInputs& in) {
  detail::check_bound_inputs(in);
  const BetaParams b = beta_params(in.bc, in.alpha);
  const double n = in.order;
  const double inv_term = 0.5 * in.c_inv * n * n;
  const double trace_term = in.c_tau * in.c_tau * (n + 1.0) * (n + 2.0);
  const double c_e = inv_term + trace_term * (2.0 + b.beta2 + (2.0 * in.alpha + b.beta1) / (2.0 * in.z_min));
  const double c_h = inv_term + trace_term * (2.0 + b.beta2 + (in.alpha + b.beta2 * b.beta3) / in.y_min);
  return detail::finish_bound(in, b, c_e, c_h);
}

/// 3D analogue with the (N+1)(N+3) trace factor:
///   C_E = C_inv N^2 / 2 + C_tau^2 (N+1)(N+3) (3 + b2/2 + (alpha + b1) / (2 Z_min))
///   C_H = C_inv N^2 / 2 + C_tau^2 (N+1)(N+3) (3 + b2/2 + (alpha + b3) / (2 Y_min))
inline StabilityConstants stability_bound_3d(const BoundInputs& in) {
  detail::check_bound_inputs(in);
  const BetaParams b = beta_params(in.bc, in.alpha);
  const double n = in.order;
  const double inv_term = 0.5 * in.c_inv * n * n;
  const double trace_term = in.c_tau * in.c_tau * (n + 1.0) * (n + 3.0);
  const double c_e = inv_term + trace_term * (3.0 + 0.5 * b.beta2 + (in.alpha + b.beta1) / (2.0 * in.z_min));
  const double c_h = inv_term + trace_term * (3.0 + 0.5 * b.beta2 + (in.alpha + b.beta3) / (2.0 * in.y_min));
  return detail::finish_bound(in, b, c_e, c_h);
}

/// Collects the mesh/material quantities for the 2D bound from an operator.
/// C_tau is calibrated on the mesh; C_inv is the larger of the reference
/// triangle value and the mesh-element value, both maximized over orders <= N.
inline BoundInputs bound_inputs(const DgOperator& op) {
  BoundInputs in;
  in.order = op.reference().order();
  in.h_min = op.mesh().h_min();
  in.eps_lower = op.materials().eps_lower();
  in.mu_lower = op.materials().mu_lower();
  const ImpedanceBounds zb = impedance_bounds(op.impedances());
  in.z_min = zb.z_min;
  in.y_min = zb.y_min;
  in.alpha = op.flux().alpha;
  in.bc = op.flux().bc;
  in.c_inv = std::max(calibrate_c_inv(in.order).value, calibrate_c_inv(op.mesh(), in.order).value);
  in.c_tau = calibrate_c_tau(op.mesh());
  return in;
}

}  // namespace dgtd
