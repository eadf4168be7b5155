#pragma once

// Empirical stability sweeps: classify a time step by running the solver to
// the final time, bracket + bisect the largest stable step, and tabulate the
// CFL constant C = dt_max (N+1)(N+2) / h_min.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dgtd/leapfrog.hpp"
#include "dgtd/parallel.hpp"
#include "dgtd/stability.hpp"

namespace dgtd {

/// Everything needed to decide whether a time step is stable.
struct StabilityCase {
  int cells_per_side = 5;
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  Diagonal diagonal = Diagonal::kSouthEastNorthWest;
  int order = 1;
  FluxParams flux;
  PermittivityTensor eps{5.0, 1.0, 1.0, 3.0};
  double mu = 1.0;
  InitialKind initial = InitialKind::kPecCosine;
  double final_time = 1.0;
  double blowup_factor = 2.0;
  int threads = 1;
};

/// Default initial data for a boundary condition: pec_cosine for PEC/PMC,
/// sm_sine for Silver-Muller.
inline InitialKind default_initial(BoundaryCondition bc) {
  return bc == BoundaryCondition::kSilverMuller ? InitialKind::kSmSine : InitialKind::kPecCosine;
}

/// Everything a trial run needs besides the mesh and materials.
struct TrialSettings {
  int order = 1;
  FluxParams flux;
  InitialCondition initial;
  double final_time = 1.0;
  double blowup_factor = 2.0;
  int threads = 1;
};

/// Solver objects for one case, built once and reused across trial steps.
class CaseContext {
 public:
  explicit CaseContext(const StabilityCase& c)
      : CaseContext(structured_square_mesh(c.cells_per_side, c.xmin, c.xmax, c.ymin, c.ymax, c.diagonal),
                    std::nullopt, settings_from(c), c.eps, c.mu) {}

  /// Arbitrary mesh with a per-element material map.
  CaseContext(Mesh2D mesh, MaterialMap materials, const TrialSettings& settings)
      : CaseContext(std::move(mesh), std::move(materials), settings, {}, 1.0) {}

  CaseContext(const CaseContext&) = delete;
  CaseContext& operator=(const CaseContext&) = delete;

  const TrialSettings& settings() const { return settings_; }
  const DgOperator& op() const { return op_; }
  const Mesh2D& mesh() const { return mesh_; }
  double h_min() const { return mesh_.h_min(); }

  RunResult run_at(double dt) const {
    RunConfig cfg;
    cfg.dt = dt;
    // A step longer than the horizon still gets one step, so that an
    // absurdly large dt is judged on its own merits rather than on zero steps.
    cfg.final_time = std::max(settings_.final_time, dt);
    cfg.blowup_factor = settings_.blowup_factor;
    cfg.record_energy_every = 1;
    return run(initial_conditions(settings_.initial, op_, dt), op_, cfg);
  }

  StabilityConstants theory_bound() const { return stability_bound_2d(bound_inputs(op_)); }

 private:
  CaseContext(Mesh2D mesh, std::optional<MaterialMap> materials, const TrialSettings& settings,
              const PermittivityTensor& eps, double mu)
      : settings_(settings),
        ref_(settings.order),
        mesh_(std::move(mesh)),
        materials_(materials ? std::move(*materials) : MaterialMap::uniform(mesh_.element_count(), eps, mu)),
        op_(ref_, mesh_, materials_, settings.flux, settings.threads) {}

  static TrialSettings settings_from(const StabilityCase& c) {
    TrialSettings s;
    s.order = c.order;
    s.flux = c.flux;
    s.initial.kind = c.initial;
    s.final_time = c.final_time;
    s.blowup_factor = c.blowup_factor;
    s.threads = c.threads;
    return s;
  }

  TrialSettings settings_;
  ReferenceElement ref_;
  Mesh2D mesh_;
  MaterialMap materials_;
  DgOperator op_;
};

enum class Stability { kStable, kUnstable };

/// Stable iff the run reaches the final time without non-finite values and
/// with energy never above blowup_factor times its initial value.
inline Stability classify_stability(double dt, const CaseContext& ctx) {
  const RunResult r = ctx.run_at(dt);
  return r.status == RunStatus::kCompleted && r.final_energy <= ctx.settings().blowup_factor * r.initial_energy
             ? Stability::kStable
             : Stability::kUnstable;
}

inline Stability classify_stability(double dt, const StabilityCase& c) { return classify_stability(dt, CaseContext(c)); }

inline constexpr double kDtCap = 10.0;

struct DtMaxResult {
  double dt_max = 0.0;
  double upper = 0.0;  // smallest step seen unstable
  double theory_bound = 0.0;
  int iterations = 0;  // classifier runs
};

/// Largest stable step to relative tolerance `tol`. The bracket starts at the
/// theoretical bound and doubles until a step is unstable; bisection keeps the
/// last stable iterate.
inline DtMaxResult find_dtmax(const CaseContext& ctx, double tol) {
  if (!(tol > 0.0 && tol <= 0.1)) throw ConfigError("bisection tolerance must lie in (0, 0.1]");
  DtMaxResult out;
  out.theory_bound = ctx.theory_bound().dt_bound;

  double lo = out.theory_bound;
  ++out.iterations;
  while (classify_stability(lo, ctx) == Stability::kUnstable) {
    lo *= 0.5;
    ++out.iterations;
    if (lo < 1e-12) throw SweepError("no stable time step found below the theoretical bound");
  }
  double hi = 2.0 * lo;
  for (;;) {
    if (hi > kDtCap) throw SweepError("no unstable time step found below dt = 10");
    ++out.iterations;
    if (classify_stability(hi, ctx) == Stability::kUnstable) break;
    lo = hi;
    hi *= 2.0;
  }
  while ((hi - lo) > tol * lo) {
    const double mid = 0.5 * (lo + hi);
    ++out.iterations;
    if (classify_stability(mid, ctx) == Stability::kStable) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.dt_max = lo;
  out.upper = hi;
  return out;
}

inline DtMaxResult find_dtmax(const StabilityCase& c, double tol) { return find_dtmax(CaseContext(c), tol); }

/// C = dt_max (N+1)(N+2) / h_min
inline double cfl_constant(double dt_max, int order, double h_min) {
  if (!(dt_max > 0.0) || !(h_min > 0.0) || order < 0) throw DomainError("cfl_constant needs positive inputs");
  return dt_max * (order + 1.0) * (order + 2.0) / h_min;
}

struct SweepSpec {
  std::vector<int> cells_per_side{5, 10, 20, 40, 80, 160};
  std::vector<int> orders{1, 2, 3, 4, 5};
  FluxParams flux;
  double final_time = 1.0;
  double tolerance = 1e-2;
  std::optional<InitialKind> initial;  // defaults per boundary condition
  double blowup_factor = 2.0;
  PermittivityTensor eps{5.0, 1.0, 1.0, 3.0};
  double mu = 1.0;
  Diagonal diagonal = Diagonal::kSouthEastNorthWest;
  int threads = 1;
};

struct SweepRow {
  int cells_per_side = 0;
  double h_min = 0.0;
  int order = 0;
  double dt_max = 0.0;
  double c = 0.0;
  double theory_bound = 0.0;
  int iterations = 0;
  bool ok = false;
  std::string error;
};

inline StabilityCase make_case(const SweepSpec& spec, int cells, int order) {
  StabilityCase c;
  c.cells_per_side = cells;
  c.diagonal = spec.diagonal;
  c.order = order;
  c.flux = spec.flux;
  c.eps = spec.eps;
  c.mu = spec.mu;
  c.initial = spec.initial.value_or(default_initial(spec.flux.bc));
  c.final_time = spec.final_time;
  c.blowup_factor = spec.blowup_factor;
  return c;
}

/// Runs every (mesh level, order) case. Cases run concurrently on
/// spec.threads workers; rows come back in (level, order) order. A failing
/// case is recorded in its row and the sweep continues.
inline std::vector<SweepRow> run_table(const SweepSpec& spec,
                                       const std::function<void(const SweepRow&)>& progress = {}) {
  std::vector<SweepRow> rows;
  for (int cells : spec.cells_per_side) {
    for (int order : spec.orders) {
      SweepRow row;
      row.cells_per_side = cells;
      row.order = order;
      rows.push_back(row);
    }
  }
  std::mutex progress_mutex;
  parallel_for_ranges(static_cast<int>(rows.size()), spec.threads, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      SweepRow& row = rows[i];
      try {
        const CaseContext ctx(make_case(spec, row.cells_per_side, row.order));
        row.h_min = ctx.h_min();
        const DtMaxResult r = find_dtmax(ctx, spec.tolerance);
        row.dt_max = r.dt_max;
        row.theory_bound = r.theory_bound;
        row.iterations = r.iterations;
        row.c = cfl_constant(r.dt_max, row.order, row.h_min);
        row.ok = true;
      } catch (const Error& e) {
        row.error = e.what();
      }
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(row);
      }
    }
  });
  return rows;
}

inline std::string flux_name(double alpha) {
  if (alpha == 0.0) return "central";
  if (alpha == 1.0) return "upwind";
  std::ostringstream s;
  s << "alpha" << alpha;
  return s.str();
}

/// `table_{bc}_{flux}.csv`
inline std::string table_file_name(const FluxParams& flux) {
  return "table_" + std::string(to_string(flux.bc)) + "_" + flux_name(flux.alpha) + ".csv";
}

/// Header `h_min,N,dt_max,C,theory_bound`; failed rows carry NaN values.
inline void write_table_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "h_min,N,dt_max,C,theory_bound\n";
  out << std::setprecision(10);
  for (const SweepRow& r : rows) {
    out << r.h_min << ',' << r.order << ',';
    if (r.ok) {
      out << r.dt_max << ',' << r.c << ',' << r.theory_bound << '\n';
    } else {
      out << "nan,nan,nan\n";
    }
  }
}

}  // namespace dgtd
