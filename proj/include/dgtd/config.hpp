#pragma once

// Run configuration: a line-oriented `key = value` format grouped in
// [sections], with `#` comments. serialize() writes every effective value so
// that parsing its output reproduces the same run.
//
//   [mesh]      cells, xmin, xmax, ymin, ymax, diagonal (sw-ne | se-nw), file, reorient
//   [material]  eps = xx xy yx yy, mu, table
//   [solver]    order, alpha, bc (pec | pmc | sm), threads
//   [time]      dt (number | auto), safety, final_time, blowup_factor
//   [initial]   kind (zero | pec_cosine | sm_sine | custom), ex, ey, hz
//   [output]    energy, energy_every, fields
//   [sweep]     cells, orders, tolerance, blowup_factor
//   [bound3d]   enabled, h_min, eps_lower, mu_lower, z_min, y_min, c_inv, c_tau

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dgtd/dg_core.hpp"
#include "dgtd/errors.hpp"
#include "dgtd/leapfrog.hpp"
#include "dgtd/materials.hpp"
#include "dgtd/mesh.hpp"

namespace dgtd {

struct MeshConfig {
  std::string file;  // empty: structured square
  int cells = 5;
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  Diagonal diagonal = Diagonal::kSouthEastNorthWest;
  bool reorient = false;
};

struct MaterialConfig {
  PermittivityTensor eps{5.0, 1.0, 1.0, 3.0};
  double mu = 1.0;
  std::string table;  // empty: uniform eps / mu
};

struct SolverConfig {
  int order = 1;
  FluxParams flux;
  int threads = 1;
};

struct TimeConfig {
  std::optional<double> dt;  // empty: safety * theoretical bound
  double safety = 0.9;
  double final_time = 1.0;
  double blowup_factor = 1e6;
};

struct InitialConfig {
  InitialKind kind = InitialKind::kPecCosine;
  std::string ex = "0", ey = "0", hz = "0";  // custom only
};

struct OutputConfig {
  std::string energy = "energy.csv";
  int energy_every = 1;
  std::string fields;  // empty: no snapshot
};

struct SweepConfig {
  std::vector<int> cells{5, 10, 20, 40, 80, 160};
  std::vector<int> orders{1, 2, 3, 4, 5};
  double tolerance = 1e-2;
  double blowup_factor = 2.0;
};

/// Inputs for the 3D bound. Unset constants fall back to the 2D calibration.
struct Bound3dConfig {
  bool enabled = false;
  double h_min = 0.0, eps_lower = 0.0, mu_lower = 0.0, z_min = 0.0, y_min = 0.0;
  std::optional<double> c_inv, c_tau;
};

struct Config {
  MeshConfig mesh;
  MaterialConfig material;
  SolverConfig solver;
  TimeConfig time;
  InitialConfig initial;
  OutputConfig output;
  SweepConfig sweep;
  Bound3dConfig bound3d;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string key_name(const std::string& section, const std::string& key) { return section + "." + key; }

inline double to_double(const std::string& name, const std::string& v) {
  std::istringstream in(v);
  double d = 0.0;
  std::string rest;
  if (!(in >> d) || (in >> rest)) throw ConfigError(name + ": expected a number, got '" + v + "'");
  return d;
}

inline int to_int(const std::string& name, const std::string& v) {
  std::istringstream in(v);
  long long d = 0;
  std::string rest;
  if (!(in >> d) || (in >> rest)) throw ConfigError(name + ": expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

inline bool to_bool(const std::string& name, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(name + ": expected true or false, got '" + v + "'");
}

inline std::vector<double> to_doubles(const std::string& name, const std::string& v) {
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double(name, tok));
  return out;
}

inline std::vector<int> to_ints(const std::string& name, const std::string& v) {
  std::istringstream in(v);
  std::vector<int> out;
  std::string tok;
  while (in >> tok) out.push_back(to_int(name, tok));
  return out;
}

inline Diagonal to_diagonal(const std::string& name, const std::string& v) {
  if (v == "sw-ne") return Diagonal::kSouthWestNorthEast;
  if (v == "se-nw") return Diagonal::kSouthEastNorthWest;
  throw ConfigError(name + ": expected sw-ne or se-nw, got '" + v + "'");
}

inline const char* diagonal_name(Diagonal d) { return d == Diagonal::kSouthWestNorthEast ? "sw-ne" : "se-nw"; }

inline std::string resolve(const std::filesystem::path& base, const std::string& v) {
  if (v.empty()) return v;
  const std::filesystem::path p(v);
  return p.is_absolute() || base.empty() ? p.string() : (base / p).lexically_normal().string();
}

inline void apply(Config& c, const std::string& section, const std::string& key, const std::string& v,
                  const std::filesystem::path& base) {
  const std::string name = key_name(section, key);
  auto positive = [&name](double d) {
    if (!(d > 0.0)) throw ConfigError(name + " must be positive");
    return d;
  };
  if (section == "mesh") {
    if (key == "file") return void(c.mesh.file = resolve(base, v));
    if (key == "cells") {
      c.mesh.cells = to_int(name, v);
      if (c.mesh.cells < 1) throw ConfigError(name + " must be >= 1");
      return;
    }
    if (key == "xmin") return void(c.mesh.xmin = to_double(name, v));
    if (key == "xmax") return void(c.mesh.xmax = to_double(name, v));
    if (key == "ymin") return void(c.mesh.ymin = to_double(name, v));
    if (key == "ymax") return void(c.mesh.ymax = to_double(name, v));
    if (key == "diagonal") return void(c.mesh.diagonal = to_diagonal(name, v));
    if (key == "reorient") return void(c.mesh.reorient = to_bool(name, v));
  } else if (section == "material") {
    if (key == "eps") {
      const auto e = to_doubles(name, v);
      if (e.size() != 4) throw ConfigError(name + ": expected four numbers 'xx xy yx yy'");
      c.material.eps = {e[0], e[1], e[2], e[3]};
      try {
        validate(c.material.eps);
      } catch (const MaterialError& err) {
        throw ConfigError(name + ": " + err.what());
      }
      return;
    }
    if (key == "mu") return void(c.material.mu = positive(to_double(name, v)));
    if (key == "table") return void(c.material.table = resolve(base, v));
  } else if (section == "solver") {
    if (key == "order") {
      c.solver.order = to_int(name, v);
      if (c.solver.order < 1 || c.solver.order > kMaxOrder) {
        throw ConfigError(name + " must lie in [1, " + std::to_string(kMaxOrder) + "]");
      }
      return;
    }
    if (key == "alpha") {
      c.solver.flux.alpha = to_double(name, v);
      if (!(c.solver.flux.alpha >= 0.0 && c.solver.flux.alpha <= 1.0)) throw ConfigError(name + " must lie in [0, 1]");
      return;
    }
    if (key == "bc") return void(c.solver.flux.bc = parse_boundary_condition(v));
    if (key == "threads") {
      c.solver.threads = to_int(name, v);
      if (c.solver.threads < 1) throw ConfigError(name + " must be >= 1");
      return;
    }
  } else if (section == "time") {
    if (key == "dt") {
      if (v == "auto") return void(c.time.dt.reset());
      return void(c.time.dt = positive(to_double(name, v)));
    }
    if (key == "safety") return void(c.time.safety = positive(to_double(name, v)));
    if (key == "final_time") return void(c.time.final_time = positive(to_double(name, v)));
    if (key == "blowup_factor") return void(c.time.blowup_factor = positive(to_double(name, v)));
  } else if (section == "initial") {
    if (key == "kind") return void(c.initial.kind = parse_initial_kind(v));
    if (key == "ex" || key == "ey" || key == "hz") {
      Expression probe(v);  // reports syntax errors at parse time
      (key == "ex" ? c.initial.ex : key == "ey" ? c.initial.ey : c.initial.hz) = v;
      return;
    }
  } else if (section == "output") {
    if (key == "energy") return void(c.output.energy = v);
    if (key == "fields") return void(c.output.fields = v);
    if (key == "energy_every") {
      c.output.energy_every = to_int(name, v);
      if (c.output.energy_every < 1) throw ConfigError(name + " must be >= 1");
      return;
    }
  } else if (section == "sweep") {
    if (key == "cells") return void(c.sweep.cells = to_ints(name, v));
    if (key == "orders") {
      c.sweep.orders = to_ints(name, v);
      for (int n : c.sweep.orders) {
        if (n < 1 || n > kMaxOrder) throw ConfigError(name + ": order " + std::to_string(n) + " unsupported");
      }
      return;
    }
    if (key == "tolerance") {
      c.sweep.tolerance = to_double(name, v);
      if (!(c.sweep.tolerance > 0.0 && c.sweep.tolerance <= 0.1)) throw ConfigError(name + " must lie in (0, 0.1]");
      return;
    }
    if (key == "blowup_factor") return void(c.sweep.blowup_factor = positive(to_double(name, v)));
  } else if (section == "bound3d") {
    if (key == "enabled") return void(c.bound3d.enabled = to_bool(name, v));
    if (key == "h_min") return void(c.bound3d.h_min = positive(to_double(name, v)));
    if (key == "eps_lower") return void(c.bound3d.eps_lower = positive(to_double(name, v)));
    if (key == "mu_lower") return void(c.bound3d.mu_lower = positive(to_double(name, v)));
    if (key == "z_min") return void(c.bound3d.z_min = positive(to_double(name, v)));
    if (key == "y_min") return void(c.bound3d.y_min = positive(to_double(name, v)));
    if (key == "c_inv") return void(c.bound3d.c_inv = positive(to_double(name, v)));
    if (key == "c_tau") return void(c.bound3d.c_tau = positive(to_double(name, v)));
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
  throw ConfigError("unknown key " + name);
}

}  // namespace detail

/// Parses config text. Relative file paths resolve against `base_dir`.
inline Config parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  Config c;
  std::string line, section;
  std::map<std::string, int> seen;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of any [section]");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const std::string name = detail::key_name(section, key);
    if (const auto [it, fresh] = seen.emplace(name, line_no); !fresh) {
      throw ConfigError(where + name + " already set on line " + std::to_string(it->second));
    }
    try {
      detail::apply(c, section, key, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (c.initial.kind == InitialKind::kCustom && !seen.contains("initial.hz") && !seen.contains("initial.ex") &&
      !seen.contains("initial.ey")) {
    throw ConfigError("initial.kind = custom needs at least one of initial.ex, initial.ey, initial.hz");
  }
  if (c.bound3d.enabled) {
    for (const char* k : {"h_min", "eps_lower", "mu_lower", "z_min", "y_min"}) {
      if (!seen.contains(std::string("bound3d.") + k)) {
        throw ConfigError(std::string("bound3d.enabled = true needs bound3d.") + k);
      }
    }
  }
  return c;
}

inline Config parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Reads a config file and checks that the files it references exist.
inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  Config c = parse_config(in, path.parent_path());
  for (const auto& [key, file] : {std::pair{"mesh.file", c.mesh.file}, std::pair{"material.table", c.material.table}}) {
    if (!file.empty() && !std::filesystem::exists(file)) throw ConfigError(std::string(key) + ": no such file " + file);
  }
  return c;
}

/// Every effective value, in a form parse_config reads back unchanged.
inline std::string serialize(const Config& c) {
  std::ostringstream o;
  o << std::setprecision(17);
  auto list = [&o](const auto& v) {
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? " " : "") << v[i];
    o << '\n';
  };
  o << "[mesh]\n";
  if (!c.mesh.file.empty()) o << "file = " << c.mesh.file << '\n';
  o << "cells = " << c.mesh.cells << '\n'
    << "xmin = " << c.mesh.xmin << "\nxmax = " << c.mesh.xmax << "\nymin = " << c.mesh.ymin
    << "\nymax = " << c.mesh.ymax << '\n'
    << "diagonal = " << detail::diagonal_name(c.mesh.diagonal) << '\n'
    << "reorient = " << (c.mesh.reorient ? "true" : "false") << "\n\n";
  o << "[material]\n"
    << "eps = " << c.material.eps.xx << ' ' << c.material.eps.xy << ' ' << c.material.eps.yx << ' '
    << c.material.eps.yy << "\nmu = " << c.material.mu << '\n';
  if (!c.material.table.empty()) o << "table = " << c.material.table << '\n';
  o << "\n[solver]\norder = " << c.solver.order << "\nalpha = " << c.solver.flux.alpha
    << "\nbc = " << to_string(c.solver.flux.bc) << "\nthreads = " << c.solver.threads << "\n\n";
  o << "[time]\ndt = ";
  if (c.time.dt) {
    o << *c.time.dt;
  } else {
    o << "auto";
  }
  o << "\nsafety = " << c.time.safety << "\nfinal_time = " << c.time.final_time
    << "\nblowup_factor = " << c.time.blowup_factor << "\n\n";
  o << "[initial]\nkind = " << to_string(c.initial.kind) << '\n';
  if (c.initial.kind == InitialKind::kCustom) {
    o << "ex = " << c.initial.ex << "\ney = " << c.initial.ey << "\nhz = " << c.initial.hz << '\n';
  }
  o << "\n[output]\nenergy = " << c.output.energy << "\nenergy_every = " << c.output.energy_every << '\n';
  if (!c.output.fields.empty()) o << "fields = " << c.output.fields << '\n';
  o << "\n[sweep]\ncells = ";
  list(c.sweep.cells);
  o << "orders = ";
  list(c.sweep.orders);
  o << "tolerance = " << c.sweep.tolerance << "\nblowup_factor = " << c.sweep.blowup_factor << "\n\n";
  o << "[bound3d]\nenabled = " << (c.bound3d.enabled ? "true" : "false") << '\n';
  if (c.bound3d.enabled) {
    o << "h_min = " << c.bound3d.h_min << "\neps_lower = " << c.bound3d.eps_lower
      << "\nmu_lower = " << c.bound3d.mu_lower << "\nz_min = " << c.bound3d.z_min << "\ny_min = " << c.bound3d.y_min
      << '\n';
    if (c.bound3d.c_inv) o << "c_inv = " << *c.bound3d.c_inv << '\n';
    if (c.bound3d.c_tau) o << "c_tau = " << *c.bound3d.c_tau << '\n';
  }
  return o.str();
}

inline Mesh2D build_mesh(const MeshConfig& m) {
  if (!m.file.empty()) return load_mesh(m.file, m.reorient);
  return structured_square_mesh(m.cells, m.xmin, m.xmax, m.ymin, m.ymax, m.diagonal);
}

inline MaterialMap build_materials(const MaterialConfig& m, int element_count) {
  if (!m.table.empty()) return load_material_table(m.table, element_count);
  return MaterialMap::uniform(element_count, m.eps, m.mu);
}

inline InitialCondition build_initial(const InitialConfig& ic) {
  InitialCondition out;
  out.kind = ic.kind;
  if (ic.kind == InitialKind::kCustom) {
    out.ex = Expression(ic.ex);
    out.ey = Expression(ic.ey);
    out.hz = Expression(ic.hz);
  }
  return out;
}

}  // namespace dgtd
