#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dgtd/config.hpp"
#include "dgtd/leapfrog.hpp"

using namespace dgtd;

namespace {

std::string run_energy_csv(const Config& c) {
  const ReferenceElement ref(c.solver.order);
  const Mesh2D mesh = build_mesh(c.mesh);
  const MaterialMap mat = build_materials(c.material, mesh.element_count());
  const DgOperator op(ref, mesh, mat, c.solver.flux, c.solver.threads);
  RunConfig rc;
  rc.dt = *c.time.dt;
  rc.final_time = c.time.final_time;
  rc.blowup_factor = c.time.blowup_factor;
  rc.record_energy_every = c.output.energy_every;
  const RunResult r = run(initial_conditions(build_initial(c.initial), op, rc.dt), op, rc);
  std::ostringstream out;
  write_energy_csv(r.energy, out);
  return out.str();
}

}  // namespace

TEST(Config, DefaultsDescribeTheReferenceCavity) {
  const Config c = parse_config("");
  EXPECT_EQ(c.mesh.cells, 5);
  EXPECT_EQ(c.mesh.diagonal, Diagonal::kSouthEastNorthWest);
  EXPECT_EQ(c.material.eps.xy, 1.0);
  EXPECT_EQ(c.solver.order, 1);
  EXPECT_EQ(c.solver.flux.bc, BoundaryCondition::kPec);
  EXPECT_FALSE(c.time.dt.has_value());
  EXPECT_EQ(c.time.blowup_factor, 1e6);
  EXPECT_EQ(c.initial.kind, InitialKind::kPecCosine);
}

TEST(Config, ParsesAllSections) {
  const Config c = parse_config(R"(
# comment line
[mesh]
cells = 10          # trailing comment
xmin = 0
diagonal = sw-ne
[material]
eps = 2 0.5 0.5 1
mu = 1.5
[solver]
order = 3
alpha = 1
bc = sm
threads = 2
[time]
dt = 0.01
final_time = 0.5
blowup_factor = 100
[initial]
kind = custom
hz = sin(pi*x)
[output]
energy = e.csv
energy_every = 5
fields = f.csv
[sweep]
cells = 5 10
orders = 1 2 3
tolerance = 0.05
[bound3d]
enabled = true
h_min = 0.1
eps_lower = 1
mu_lower = 1
z_min = 1
y_min = 1
)");
  EXPECT_EQ(c.mesh.cells, 10);
  EXPECT_EQ(c.mesh.xmin, 0.0);
  EXPECT_EQ(c.mesh.diagonal, Diagonal::kSouthWestNorthEast);
  EXPECT_EQ(c.material.eps.xx, 2.0);
  EXPECT_EQ(c.material.mu, 1.5);
  EXPECT_EQ(c.solver.order, 3);
  EXPECT_EQ(c.solver.flux.alpha, 1.0);
  EXPECT_EQ(c.solver.flux.bc, BoundaryCondition::kSilverMuller);
  EXPECT_EQ(c.solver.threads, 2);
  EXPECT_EQ(*c.time.dt, 0.01);
  EXPECT_EQ(c.time.final_time, 0.5);
  EXPECT_EQ(c.initial.kind, InitialKind::kCustom);
  EXPECT_EQ(c.initial.hz, "sin(pi*x)");
  EXPECT_EQ(c.output.energy_every, 5);
  EXPECT_EQ(c.output.fields, "f.csv");
  EXPECT_EQ(c.sweep.cells, (std::vector<int>{5, 10}));
  EXPECT_EQ(c.sweep.orders, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(c.sweep.tolerance, 0.05);
  EXPECT_TRUE(c.bound3d.enabled);
  EXPECT_EQ(c.bound3d.h_min, 0.1);
}

TEST(Config, ErrorsNameTheField) {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("[solver]\norder = 0\n").find("solver.order"), std::string::npos);
  EXPECT_NE(message("[solver]\norder = two\n").find("solver.order"), std::string::npos);
  EXPECT_NE(message("[solver]\nalpha = 2\n").find("solver.alpha"), std::string::npos);
  EXPECT_NE(message("[solver]\nbc = wall\n").find("boundary condition"), std::string::npos);
  EXPECT_NE(message("[solver]\nflux = up\n").find("solver.flux"), std::string::npos);
  EXPECT_NE(message("[nonsense]\na = 1\n").find("nonsense"), std::string::npos);
  EXPECT_NE(message("[time]\ndt = -1\n").find("time.dt"), std::string::npos);
  EXPECT_NE(message("[material]\neps = 1 2 2 1\n").find("material.eps"), std::string::npos);
  EXPECT_NE(message("[material]\neps = 1 2\n").find("material.eps"), std::string::npos);
  EXPECT_NE(message("[sweep]\ntolerance = 0.5\n").find("sweep.tolerance"), std::string::npos);
  EXPECT_NE(message("[initial]\nkind = custom\n").find("initial"), std::string::npos);
  EXPECT_NE(message("[initial]\nhz = sin(\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("[time]\ndt = 1\ndt = 2\n").find("already set"), std::string::npos);
  EXPECT_NE(message("order = 1\n").find("section"), std::string::npos);
  EXPECT_NE(message("[solver\n").find("section"), std::string::npos);
  EXPECT_NE(message("[solver]\norder\n").find("key = value"), std::string::npos);
  EXPECT_NE(message("[bound3d]\nenabled = true\n").find("bound3d.h_min"), std::string::npos);
}

TEST(Config, MissingReferencedFilesRejectedAtLoad) {
  const auto dir = std::filesystem::temp_directory_path() / "dgtd_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "run.cfg";
  std::ofstream(path) << "[mesh]\nfile = does_not_exist.mesh\n";
  EXPECT_THROW(load_config(path), ConfigError);
  std::ofstream(path) << "[material]\ntable = nope.txt\n";
  EXPECT_THROW(load_config(path), ConfigError);
  EXPECT_THROW(load_config(dir / "absent.cfg"), ConfigError);

  // relative paths resolve against the config's directory
  save_mesh(structured_square_mesh(2, 0, 1, 0, 1), dir / "square.mesh");
  std::ofstream(path) << "[mesh]\nfile = square.mesh\n";
  const Config c = load_config(path);
  EXPECT_EQ(build_mesh(c.mesh).element_count(), 8);
  std::filesystem::remove_all(dir);
}

TEST(Config, RoundTripIsExact) {
  const Config c = parse_config(R"(
[mesh]
cells = 3
xmax = 0.3333333333333333
[material]
eps = 4 0.1 0.1 2
[solver]
order = 2
alpha = 0.25
bc = pmc
[time]
dt = 0.0123456789
final_time = 0.2
[initial]
kind = custom
ex = x*y
hz = cos(pi*x) * t
[output]
energy_every = 3
)");
  const std::string text = serialize(c);
  const Config back = parse_config(text);
  EXPECT_EQ(serialize(back), text);
  EXPECT_EQ(run_energy_csv(back), run_energy_csv(c));
}

TEST(Config, AutoStepSerializes) {
  const Config c = parse_config("[time]\ndt = auto\nsafety = 0.5\n");
  EXPECT_FALSE(c.time.dt.has_value());
  EXPECT_NE(serialize(c).find("dt = auto"), std::string::npos);
  EXPECT_EQ(serialize(parse_config(serialize(c))), serialize(c));
}
