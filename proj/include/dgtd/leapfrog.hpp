#pragma once

// Staggered leap-frog time integration of the DG system, the discrete energy
// and the initial data used by the stability experiments.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dgtd/dg_core.hpp"
#include "dgtd/expression.hpp"
#include "dgtd/polynomials.hpp"

namespace dgtd {

/// Advances (E^m, Hz^{m+1/2}) to (E^{m+1}, Hz^{m+3/2}):
///   E^{m+1}    = E^m + dt * rhs_E(E^m, Hz^{m+1/2})
///   Hz^{m+3/2} = Hz^{m+1/2} + dt * rhs_H(E^{m+1}, Hz^{m+1/2})
/// Returns false if the new state contains non-finite values.
inline bool step(FieldState& state, const DgOperator& op) {
  const double dt = state.dt;
  Matrix rex, rey, rhz;
  op.rhs_e(state, rex, rey);
  state.ex += dt * rex;
  state.ey += dt * rey;
  op.rhs_h(state, rhz);
  state.hz += dt * rhz;
  ++state.step;
  return state.all_finite();
}

inline bool step(FieldState& state, const DgOperator& op, double dt) {
  if (state.step != 0 && std::abs(state.dt - dt) > 1e-15 * std::max(1.0, dt)) {
    throw DomainError("time step changed mid-run; the staggered H level would be inconsistent");
  }
  state.dt = dt;
  return step(state, op);
}

inline double discrete_energy(const FieldState& state, const DgOperator& op) { return op.discrete_energy(state); }

/// (eps E^m, E^m) + (mu Hz^{m-1/2}, Hz^{m+1/2}), written as the plain energy
/// plus dt (eps C Hz^{m+1/2}, E^m), where C Hz is the part of rhs_E driven by
/// Hz alone. The plain energy of the staggered pair oscillates with the E/Hz
/// phase; this one is exactly conserved by central fluxes with PEC or PMC
/// walls and does not grow for dissipative fluxes below the stability limit.
inline double staggered_energy(const FieldState& state, const DgOperator& op) {
  FieldState h_only = state;
  h_only.ex.setZero();
  h_only.ey.setZero();
  Matrix rx, ry;
  op.rhs_e(h_only, rx, ry);
  const Matrix& m = op.reference().mass();
  double cross = 0.0;
  for (int k = 0; k < op.element_count(); ++k) {
    const PermittivityTensor& e = op.materials().eps(k);
    const Vector dx = e.xx * rx.col(k) + e.xy * ry.col(k);
    const Vector dy = e.yx * rx.col(k) + e.yy * ry.col(k);
    cross += op.mesh().jacobian[k].det * (dx.dot(m * state.ex.col(k)) + dy.dot(m * state.ey.col(k)));
  }
  return op.discrete_energy(state) + state.dt * cross;
}

struct RunConfig {
  double dt = 0.0;
  double final_time = 1.0;
  int record_energy_every = 1;
  double blowup_factor = 1e6;
};

inline long long step_count(double final_time, double dt) {
  return static_cast<long long>(std::floor(final_time / dt + 1e-9));
}

enum class RunStatus { kCompleted, kBlewUp };

struct EnergySample {
  long long step = 0;
  double time = 0.0;
  double energy = 0.0;
};

struct RunResult {
  FieldState state;
  std::vector<EnergySample> energy;
  RunStatus status = RunStatus::kCompleted;
  long long blowup_step = -1;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_energy = 0.0;
};

/// Runs floor(T/dt) steps. Aborts with kBlewUp when a value becomes non-finite
/// or the energy exceeds blowup_factor times its initial value.
inline RunResult run(FieldState state0, const DgOperator& op, const RunConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("dt must be positive");
  if (!(cfg.final_time > 0.0)) throw ConfigError("final time must be positive");
  if (cfg.record_energy_every < 1) throw ConfigError("energy cadence must be >= 1");
  if (state0.step != 0) throw DomainError("run expects a state at step 0");

  RunResult result;
  result.state = std::move(state0);
  result.state.dt = cfg.dt;
  const long long steps = step_count(cfg.final_time, cfg.dt);

  const double e0 = op.discrete_energy(result.state);
  result.initial_energy = result.final_energy = result.max_energy = e0;
  result.energy.push_back({0, 0.0, e0});

  for (long long m = 1; m <= steps; ++m) {
    const bool finite = step(result.state, op);
    const double e = finite ? op.discrete_energy(result.state) : std::numeric_limits<double>::infinity();
    const bool exploded = !finite || !std::isfinite(e) || (e0 > 0.0 && e > cfg.blowup_factor * e0);
    result.final_energy = e;
    if (std::isfinite(e)) result.max_energy = std::max(result.max_energy, e);
    if (exploded || m % cfg.record_energy_every == 0 || m == steps) {
      result.energy.push_back({m, result.state.time_e(), e});
    }
    if (exploded) {
      result.status = RunStatus::kBlewUp;
      result.blowup_step = m;
      return result;
    }
  }
  return result;
}

inline void write_energy_csv(const std::vector<EnergySample>& trace, std::ostream& out) {
  out << "step,time,energy\n" << std::setprecision(17);
  for (const EnergySample& s : trace) out << s.step << ',' << s.time << ',' << s.energy << '\n';
}

/// Angular frequency of the cavity mode cos(pi x) cos(pi y) for a diagonal tensor.
inline double cavity_omega(double eps_xx, double eps_yy) {
  return std::numbers::pi * std::sqrt(1.0 / eps_xx + 1.0 / eps_yy);
}

enum class InitialKind { kZero, kPecCosine, kSmSine, kCustom };

/// Initial data selector. E is given at t = 0 and Hz at t = dt/2.
/// pec_cosine: Hz = cos(pi x) cos(pi y) cos(omega dt/2), omega = pi sqrt(1/eps_xx + 1/eps_yy)
/// sm_sine:    Hz = sin(pi dt/2) sin(pi x y)
/// custom:     expressions in x, y, t for Ex, Ey (t = 0) and Hz (t = dt/2)
struct InitialCondition {
  InitialKind kind = InitialKind::kZero;
  std::optional<double> eps_xx;  // pec_cosine; defaults to element 0's tensor
  std::optional<double> eps_yy;
  Expression ex, ey, hz;
};

inline InitialKind parse_initial_kind(std::string_view name) {
  if (name == "zero") return InitialKind::kZero;
  if (name == "pec_cosine") return InitialKind::kPecCosine;
  if (name == "sm_sine") return InitialKind::kSmSine;
  if (name == "custom") return InitialKind::kCustom;
  throw ConfigError("unknown initial condition '" + std::string(name) +
                    "' (expected zero, pec_cosine, sm_sine or custom)");
}

inline std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::kZero:
      return "zero";
    case InitialKind::kPecCosine:
      return "pec_cosine";
    case InitialKind::kSmSine:
      return "sm_sine";
    case InitialKind::kCustom:
      return "custom";
  }
  return "?";
}

inline FieldState initial_conditions(const InitialCondition& ic, const DgOperator& op, double dt) {
  FieldState s = FieldState::zero(op.node_count(), op.element_count(), dt);
  const double half = 0.5 * dt;
  const double pi = std::numbers::pi;
  switch (ic.kind) {
    case InitialKind::kZero:
      break;
    case InitialKind::kPecCosine: {
      const double exx = ic.eps_xx.value_or(op.materials().eps(0).xx);
      const double eyy = ic.eps_yy.value_or(op.materials().eps(0).yy);
      const double amp = std::cos(cavity_omega(exx, eyy) * half);
      s.hz = op.sample([&](double x, double y) { return std::cos(pi * x) * std::cos(pi * y) * amp; });
      break;
    }
    case InitialKind::kSmSine: {
      const double amp = std::sin(pi * half);
      s.hz = op.sample([&](double x, double y) { return amp * std::sin(pi * x * y); });
      break;
    }
    case InitialKind::kCustom:
      s.ex = op.sample([&](double x, double y) { return ic.ex(x, y, 0.0); });
      s.ey = op.sample([&](double x, double y) { return ic.ey(x, y, 0.0); });
      s.hz = op.sample([&](double x, double y) { return ic.hz(x, y, half); });
      break;
  }
  return s;
}

inline FieldState initial_conditions(std::string_view name, const DgOperator& op, double dt) {
  InitialCondition ic;
  ic.kind = parse_initial_kind(name);
  if (ic.kind == InitialKind::kCustom) throw ConfigError("custom initial condition needs expressions");
  return initial_conditions(ic, op, dt);
}

/// L2 norm over the mesh of (nodal field - exact), by a quadrature rule of
/// `points_1d`^2 points per element.
template <typename Exact>
double l2_error(const DgOperator& op, const Matrix& nodal, Exact&& exact, int points_1d = 0) {
  const ReferenceElement& ref = op.reference();
  if (points_1d <= 0) points_1d = ref.order() + 4;
  const poly::TriangleRule rule = poly::triangle_rule(points_1d);
  const Matrix interp = ref.interpolation_matrix(rule.r, rule.s);
  double sum = 0.0;
  for (int k = 0; k < op.element_count(); ++k) {
    const Vector uq = interp * nodal.col(k);
    const double jac = op.mesh().jacobian[k].det;
    for (Eigen::Index q = 0; q < rule.r.size(); ++q) {
      const Point2 p = op.mesh().map_to_physical(k, {rule.r(q), rule.s(q)});
      const double d = uq(q) - exact(p.x, p.y);
      sum += rule.weights(q) * jac * d * d;
    }
  }
  return std::sqrt(sum);
}

}  // namespace dgtd
