// dgtd: leap-frog DG solver for 2D TE Maxwell and its stability toolkit.
//
//   dgtd simulate    --config run.cfg [--out DIR] [--threads N]
//   dgtd bound       --config run.cfg [--out DIR]
//   dgtd dtmax-sweep --config run.cfg [--out DIR] [--threads N] [--tol REL]
//   dgtd table       --config run.cfg [--out DIR] [--threads N] [--tol REL]
//
// Exit codes: 0 ok, 2 config error, 3 blowup, 4 internal error.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "dgtd/config.hpp"
#include "dgtd/experiments.hpp"
#include "dgtd/leapfrog.hpp"
#include "dgtd/stability.hpp"

namespace fs = std::filesystem;
using namespace dgtd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitInternal = 4;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<int> threads;
  std::optional<double> tol;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

Config load(const Options& opt) {
  Config c = load_config(opt.config);
  if (opt.threads) {
    if (*opt.threads < 1) throw ConfigError("--threads must be >= 1");
    c.solver.threads = *opt.threads;
  }
  if (opt.tol) {
    if (!(*opt.tol > 0.0 && *opt.tol <= 0.1)) throw ConfigError("--tol must lie in (0, 0.1]");
    c.sweep.tolerance = *opt.tol;
  }
  return c;
}

void write_fields_csv(const DgOperator& op, const FieldState& s, std::ostream& out) {
  out << "element,node,x,y,Ex,Ey,Hz\n" << std::setprecision(17);
  for (int k = 0; k < op.element_count(); ++k) {
    for (int i = 0; i < op.node_count(); ++i) {
      out << k << ',' << i << ',' << op.x()(i, k) << ',' << op.y()(i, k) << ',' << s.ex(i, k) << ',' << s.ey(i, k)
          << ',' << s.hz(i, k) << '\n';
    }
  }
}

int cmd_simulate(const Options& opt) {
  const Config c = load(opt);
  const ReferenceElement ref(c.solver.order);
  const Mesh2D mesh = build_mesh(c.mesh);
  const MaterialMap materials = build_materials(c.material, mesh.element_count());
  const DgOperator op(ref, mesh, materials, c.solver.flux, c.solver.threads);

  RunConfig rc;
  const double bound = stability_bound_2d(bound_inputs(op)).dt_bound;
  rc.dt = c.time.dt.value_or(c.time.safety * bound);
  // as in the stability classifier, a step longer than the horizon still runs once
  rc.final_time = std::max(c.time.final_time, rc.dt);
  rc.blowup_factor = c.time.blowup_factor;
  rc.record_energy_every = c.output.energy_every;

  std::cout << "mesh: " << mesh.element_count() << " triangles, h_min = " << mesh.h_min() << "\n"
            << "order " << c.solver.order << ", alpha " << c.solver.flux.alpha << ", bc " << to_string(c.solver.flux.bc)
            << "\n"
            << "dt = " << rc.dt << (c.time.dt ? "" : " (auto)") << ", theoretical bound " << bound << ", "
            << step_count(rc.final_time, rc.dt) << " steps\n";

  const RunResult r = run(initial_conditions(build_initial(c.initial), op, rc.dt), op, rc);
  const fs::path out_dir(opt.out);
  {
    std::ofstream e = open_output(out_dir / c.output.energy);
    write_energy_csv(r.energy, e);
  }
  if (!c.output.fields.empty()) {
    std::ofstream f = open_output(out_dir / c.output.fields);
    write_fields_csv(op, r.state, f);
  }
  {
    std::ofstream cfg = open_output(out_dir / "effective.cfg");
    cfg << serialize(c);
  }
  std::cout << "energy: initial " << r.initial_energy << ", final " << r.final_energy << ", max " << r.max_energy
            << "\n";
  if (r.status == RunStatus::kBlewUp) {
    std::cerr << "blowup at step " << r.blowup_step << " (t = " << r.blowup_step * rc.dt << ")\n";
    return kExitBlowup;
  }
  std::cout << "completed at t = " << r.state.time_e() << "\n";
  return kExitOk;
}

void print_bound(std::ostream& out, const char* label, const BoundInputs& in, const StabilityConstants& b) {
  out << label << "\n"
      << "  N         = " << in.order << "\n"
      << "  h_min     = " << in.h_min << "\n"
      << "  eps_lower = " << in.eps_lower << "\n"
      << "  mu_lower  = " << in.mu_lower << "\n"
      << "  Z_min     = " << in.z_min << "\n"
      << "  Y_min     = " << in.y_min << "\n"
      << "  alpha     = " << in.alpha << ", bc = " << to_string(in.bc) << "\n"
      << "  beta      = (" << b.beta.beta1 << ", " << b.beta.beta2 << ", " << b.beta.beta3 << ")\n"
      << "  C_inv     = " << b.c_inv << "\n"
      << "  C_tau     = " << b.c_tau << "\n"
      << "  C_E       = " << b.c_e << "\n"
      << "  C_H       = " << b.c_h << "\n"
      << "  dt_bound  = " << b.dt_bound << "\n";
}

void bound_csv_row(std::ostream& out, int dim, const BoundInputs& in, const StabilityConstants& b) {
  out << dim << ',' << in.order << ',' << in.h_min << ',' << in.eps_lower << ',' << in.mu_lower << ',' << in.z_min
      << ',' << in.y_min << ',' << in.alpha << ',' << to_string(in.bc) << ',' << b.beta.beta1 << ',' << b.beta.beta2
      << ',' << b.beta.beta3 << ',' << b.c_inv << ',' << b.c_tau << ',' << b.c_e << ',' << b.c_h << ','
      << b.dt_bound << '\n';
}

int cmd_bound(const Options& opt) {
  const Config c = load(opt);
  const ReferenceElement ref(c.solver.order);
  const Mesh2D mesh = build_mesh(c.mesh);
  const MaterialMap materials = build_materials(c.material, mesh.element_count());
  const DgOperator op(ref, mesh, materials, c.solver.flux, c.solver.threads);
  const BoundInputs in2 = bound_inputs(op);
  const StabilityConstants b2 = stability_bound_2d(in2);
  std::cout << std::setprecision(10);
  print_bound(std::cout, "2D bound", in2, b2);

  std::ofstream csv = open_output(fs::path(opt.out) / "bound.csv");
  csv << "dim,N,h_min,eps_lower,mu_lower,z_min,y_min,alpha,bc,beta1,beta2,beta3,c_inv,c_tau,c_e,c_h,dt_bound\n"
      << std::setprecision(17);
  bound_csv_row(csv, 2, in2, b2);

  if (c.bound3d.enabled) {
    BoundInputs in3 = in2;
    in3.h_min = c.bound3d.h_min;
    in3.eps_lower = c.bound3d.eps_lower;
    in3.mu_lower = c.bound3d.mu_lower;
    in3.z_min = c.bound3d.z_min;
    in3.y_min = c.bound3d.y_min;
    in3.c_inv = c.bound3d.c_inv.value_or(in2.c_inv);
    in3.c_tau = c.bound3d.c_tau.value_or(in2.c_tau);
    const StabilityConstants b3 = stability_bound_3d(in3);
    print_bound(std::cout, "3D bound", in3, b3);
    if (!c.bound3d.c_inv || !c.bound3d.c_tau) std::cout << "  (unset 3D constants taken from the 2D calibration)\n";
    bound_csv_row(csv, 3, in3, b3);
  }
  return kExitOk;
}

void print_row(const SweepRow& r) {
  std::cout << std::setprecision(6) << "  h_min=" << std::setw(9) << r.h_min << "  N=" << r.order;
  if (r.ok) {
    std::cout << "  dt_max=" << std::setw(11) << r.dt_max << "  C=" << std::setw(8) << r.c
              << "  bound=" << r.theory_bound << "  (" << r.iterations << " runs)\n";
  } else {
    std::cout << "  FAILED: " << r.error << "\n";
  }
  std::cout.flush();
}

int cmd_dtmax_sweep(const Options& opt) {
  const Config c = load(opt);
  const fs::path out_dir(opt.out);
  std::vector<SweepRow> rows;
  for (int order : c.sweep.orders) {
    TrialSettings s;
    s.order = order;
    s.flux = c.solver.flux;
    s.initial = build_initial(c.initial);
    s.final_time = c.time.final_time;
    s.blowup_factor = c.sweep.blowup_factor;
    s.threads = c.solver.threads;
    Mesh2D mesh = build_mesh(c.mesh);
    MaterialMap materials = build_materials(c.material, mesh.element_count());
    const CaseContext ctx(std::move(mesh), std::move(materials), s);
    SweepRow row;
    row.order = order;
    row.h_min = ctx.h_min();
    try {
      const DtMaxResult r = find_dtmax(ctx, c.sweep.tolerance);
      row.dt_max = r.dt_max;
      row.theory_bound = r.theory_bound;
      row.iterations = r.iterations;
      row.c = cfl_constant(r.dt_max, order, row.h_min);
      row.ok = true;
    } catch (const SweepError& e) {
      row.error = e.what();
    }
    print_row(row);
    rows.push_back(row);
  }
  std::ofstream csv = open_output(out_dir / "dtmax.csv");
  write_table_csv(rows, csv);
  for (const SweepRow& r : rows) {
    if (!r.ok) return kExitInternal;
  }
  return kExitOk;
}

int cmd_table(const Options& opt) {
  const Config c = load(opt);
  if (!c.mesh.file.empty()) throw ConfigError("table sweeps use structured meshes; remove mesh.file");
  if (!c.material.table.empty()) throw ConfigError("table sweeps use a uniform material; remove material.table");
  SweepSpec spec;
  spec.cells_per_side = c.sweep.cells;
  spec.orders = c.sweep.orders;
  spec.flux = c.solver.flux;
  spec.final_time = c.time.final_time;
  spec.tolerance = c.sweep.tolerance;
  spec.initial = c.initial.kind;
  if (c.initial.kind == InitialKind::kCustom) throw ConfigError("table sweeps need a named initial condition");
  spec.blowup_factor = c.sweep.blowup_factor;
  spec.eps = c.material.eps;
  spec.mu = c.material.mu;
  spec.diagonal = c.mesh.diagonal;
  spec.threads = c.solver.threads;
  const std::string name = table_file_name(spec.flux);
  std::cout << name << ": " << spec.cells_per_side.size() * spec.orders.size() << " cases on " << spec.threads
            << " thread(s)\n";
  const auto rows = run_table(spec, print_row);
  std::ofstream csv = open_output(fs::path(opt.out) / name);
  write_table_csv(rows, csv);
  for (const SweepRow& r : rows) {
    if (!r.ok) return kExitInternal;
  }
  return kExitOk;
}

void add_common(CLI::App* sub, Options& opt, bool sweep_flags) {
  sub->add_option("--config", opt.config, "run configuration file")->required();
  sub->add_option("--out", opt.out, "output directory")->capture_default_str();
  sub->add_option("--threads", opt.threads, "worker threads");
  if (sweep_flags) sub->add_option("--tol", opt.tol, "relative bisection tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leap-frog DG solver for 2D TE Maxwell with stability analysis tools"};
  app.require_subcommand(1);
  Options opt;
  CLI::App* simulate = app.add_subcommand("simulate", "run the solver and write energy / field CSV");
  CLI::App* bound = app.add_subcommand("bound", "evaluate the sufficient time-step bounds");
  CLI::App* sweep = app.add_subcommand("dtmax-sweep", "bisect the largest stable dt for each configured order");
  CLI::App* table = app.add_subcommand("table", "regenerate a stability table as CSV");
  add_common(simulate, opt, false);
  add_common(bound, opt, false);
  add_common(sweep, opt, true);
  add_common(table, opt, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt);
    if (bound->parsed()) return cmd_bound(opt);
    if (sweep->parsed()) return cmd_dtmax_sweep(opt);
    if (table->parsed()) return cmd_table(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MaterialError& e) {
    std::cerr << "material error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidOrderError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
