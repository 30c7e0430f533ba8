#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pfdtd/experiment.hpp"
#include "test_support.hpp"

using namespace pfdtd;

namespace {

const char* kMinimal = R"(
[grid]
nx = 4
ny = 4
nz = 4
extent = 0.01
)";

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pfdtd_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line;
  }
  return -1;
}

}  // namespace

// ---- config --------------------------------------------------------------------

TEST(Config, MinimalAppliesDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.grid.nx, 4);
  EXPECT_DOUBLE_EQ(c.grid.dx, 0.0025);
  EXPECT_EQ(c.dt_factor, 0.999);
  EXPECT_EQ(c.steps, 600);
  EXPECT_EQ(c.system, SystemChoice::Both);
  EXPECT_EQ(c.drive, DriveKind::Cavity);
  EXPECT_EQ(c.initial, InitialKind::Cavity);
  EXPECT_EQ(c.cavity_c_a, 1e-9);
  EXPECT_FALSE(c.above_cfl());
  EXPECT_FALSE(c.emit_potential);
}

TEST(Config, FullDocument) {
  const auto c = parse_config(R"(
# comment line
[grid]
nx = 3   # trailing comment
ny = 2
nz = 5
dx = 1e-3
ly = 4e-3
dz = 2_0e-4

[materials]
eps_r = 2.5
mu_r = 1

[run]
dt_factor = 0.5
steps = 12
system = "vector"
drive = "none"
initial = "random"
seed = 99
emit_potential = true
threads = 2

[cavity]
c_a = -3e-9
mx = 1

[output]
dir = "out # not a comment"
)");
  EXPECT_DOUBLE_EQ(c.grid.dy, 2e-3);
  EXPECT_DOUBLE_EQ(c.grid.dz, 2e-3);
  EXPECT_EQ(c.materials.eps_r, 2.5);
  EXPECT_EQ(c.steps, 12);
  EXPECT_EQ(c.system, SystemChoice::Vector);
  EXPECT_EQ(c.drive, DriveKind::None);
  EXPECT_EQ(c.initial, InitialKind::Random);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_TRUE(c.emit_potential);
  EXPECT_EQ(c.threads, 2);
  EXPECT_EQ(c.cavity_c_a, -3e-9);
  EXPECT_EQ(c.cavity_modes[0], 1);
  EXPECT_EQ(c.output_dir, "out # not a comment");
}

TEST(Config, AboveCflIsAcceptedAndFlagged) {
  const auto c = parse_config(std::string(kMinimal) + "[run]\ndt_factor = 1.001\n");
  EXPECT_TRUE(c.above_cfl());
  EXPECT_EQ(c.steps, 3000);
  RunConfig small = c;
  small.grid = GridSpec{2, 2, 2, 0.005, 0.005, 0.005};
  small.steps = 2;
  std::ostringstream log;
  run_experiment(small, log);
  EXPECT_NE(log.str().find("above CFL"), std::string::npos);
}

TEST(Config, StepsZeroIsError) {
  EXPECT_THROW(parse_config(std::string(kMinimal) + "[run]\nsteps = 0\n"), ConfigError);
  EXPECT_EQ(error_line(std::string(kMinimal) + "[run]\nsteps = 0\n"), 8);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line(std::string(kMinimal) + "[run]\nbogus = 1\n"), 8);
  EXPECT_EQ(error_line(std::string(kMinimal) + "[run]\nsteps = \"ten\"\n"), 8);
  EXPECT_EQ(error_line(std::string(kMinimal) + "[run]\nsteps = 1.5\n"), 8);
  EXPECT_EQ(error_line(std::string(kMinimal) + "[run]\nemit_potential = 1\n"), 8);
  EXPECT_EQ(error_line(std::string(kMinimal) + "[run]\nsystem = \"both\"\nsystem = \"scalar\"\n"), 9);
  EXPECT_EQ(error_line(std::string(kMinimal) + "[run]\ndt_factor\n"), 8);
  EXPECT_EQ(error_line(std::string(kMinimal) + "[extra]\n"), 7);
  EXPECT_EQ(error_line("[grid]\nnx = 2\nny = \"x\n"), 3);
  try {
    parse_config(std::string(kMinimal) + "[run]\nbogus = 1\n");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 8"), std::string::npos);
  }
}

TEST(Config, MissingGridIsError) {
  EXPECT_THROW(parse_config("[run]\nsteps = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nnx = 2\nny = 2\nextent = 1.0\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nnx = 2\nny = 2\nnz = 2\ndx = 1\nlx = 2\nextent = 1.0\n"), ConfigError);
}

TEST(Config, CavityNeedsCubeAndVacuum) {
  EXPECT_THROW(parse_config("[grid]\nnx = 2\nny = 2\nnz = 2\ndx = 1\ndy = 1\ndz = 2\n"), ConfigError);
  EXPECT_NO_THROW(parse_config("[grid]\nnx = 2\nny = 2\nnz = 2\ndx = 1\ndy = 1\ndz = 2\n[run]\ndrive = \"none\"\n"));
  EXPECT_THROW(parse_config(std::string(kMinimal) + "[materials]\neps_r = 2\n"), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"reference_cavity.toml", "reference_cavity_above_cfl.toml", "small_cavity.toml", "voxel_slab.toml"}) {
    EXPECT_NO_THROW(parse_config(read_file(std::filesystem::path(PFDTD_CONFIG_DIR) / name))) << name;
  }
  EXPECT_THROW(parse_config(read_file(std::filesystem::path(PFDTD_CONFIG_DIR) / "invalid_steps.toml")), ConfigError);
}

// ---- CSV -----------------------------------------------------------------------

TEST(Csv, OneRowGivesTwoLines) {
  std::ostringstream os;
  write_timeseries(os, {TimeSeriesRow{}}, false);
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2);
  EXPECT_EQ(s.find('\r'), std::string::npos);
  EXPECT_EQ(s.substr(0, s.find('\n')), "step,t,storage,supply_step,supply_cum,init_plus_supplied,residual,max_abs_state");
}

TEST(Csv, ColumnCount) {
  TimeSeriesRow r;
  const auto a = timeseries_line(r, false);
  const auto b = timeseries_line(r, true);
  EXPECT_EQ(std::count(a.begin(), a.end(), ','), 7);
  EXPECT_EQ(std::count(b.begin(), b.end(), ','), 8);
}

TEST(Csv, RoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<TimeSeriesRow> rows;
  for (long i = 0; i < 20; ++i) {
    TimeSeriesRow r;
    r.step = i;
    r.t = d(rng) * 1e-11;
    r.storage = std::exp(d(rng) * 50);
    r.supply_step = d(rng) * 1e-300;
    r.supply_cum = d(rng);
    r.init_plus_supplied = 1.0 / 3.0;
    r.residual = -d(rng) * 1e-29;
    r.max_abs_state = std::nextafter(1.0, 2.0);
    r.max_abs_potential = d(rng) * 1e200;
    rows.push_back(r);
  }
  for (bool pot : {false, true}) {
    std::stringstream ss;
    write_timeseries(ss, rows, pot);
    const auto back = read_timeseries(ss);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_EQ(back[i].step, rows[i].step);
      EXPECT_EQ(back[i].t, rows[i].t);
      EXPECT_EQ(back[i].storage, rows[i].storage);
      EXPECT_EQ(back[i].supply_step, rows[i].supply_step);
      EXPECT_EQ(back[i].supply_cum, rows[i].supply_cum);
      EXPECT_EQ(back[i].init_plus_supplied, rows[i].init_plus_supplied);
      EXPECT_EQ(back[i].residual, rows[i].residual);
      EXPECT_EQ(back[i].max_abs_state, rows[i].max_abs_state);
      EXPECT_EQ(back[i].max_abs_potential, pot ? rows[i].max_abs_potential : 0.0);
    }
  }
}

// ---- voxels --------------------------------------------------------------------

TEST(Voxels, CsvAndBinaryAgree) {
  const auto dir = scratch("voxels");
  std::vector<double> pairs;
  {
    std::ofstream csv(dir / "v.csv");
    csv << "# eps_r,mu_r\n";
    for (int c = 0; c < 8; ++c) {
      csv << 1.0 + c << ", " << 1.0 + 0.5 * c << "\n";
      pairs.push_back(1.0 + c);
      pairs.push_back(1.0 + 0.5 * c);
    }
  }
  {
    std::ofstream bin(dir / "v.bin", std::ios::binary);
    bin.write(reinterpret_cast<const char*>(pairs.data()), static_cast<std::streamsize>(pairs.size() * sizeof(double)));
  }
  const auto a = load_voxels((dir / "v.csv").string(), VoxelFormat::Csv, 8);
  const auto b = load_voxels((dir / "v.bin").string(), VoxelFormat::Binary, 8);
  EXPECT_EQ(a.eps_r, b.eps_r);
  EXPECT_EQ(a.mu_r, b.mu_r);
  EXPECT_EQ(a.eps_r[3], 4.0);
  EXPECT_THROW(load_voxels((dir / "v.csv").string(), VoxelFormat::Csv, 9), SizeMismatch);
  EXPECT_THROW(load_voxels((dir / "v.bin").string(), VoxelFormat::Binary, 7), SizeMismatch);
  EXPECT_THROW(load_voxels((dir / "missing.csv").string(), VoxelFormat::Csv, 8), InvalidArgument);
}

TEST(Voxels, MaterialsFollowCellValues) {
  const auto dir = scratch("voxel_mats");
  {
    std::ofstream csv(dir / "v.csv");
    for (int c = 0; c < 8; ++c) csv << (c < 4 ? "1,1\n" : "3,1\n");
  }
  MaterialSpec spec;
  spec.voxel_file = (dir / "v.csv").string();
  const auto g = build_grid(pfdtd::testing::cube(2, 1.0));
  const auto m = build_materials(g, spec);
  // The x edge in the i = 1 layer lies fully inside eps_r = 3 cells.
  EXPECT_DOUBLE_EQ(m.eps_edge[0][g.edge_id(Axis::X, {1, 1, 1})], 3 * kEps0);
  EXPECT_DOUBLE_EQ(m.eps_edge[1][g.edge_id(Axis::Y, {1, 0, 1})], 2 * kEps0);
}

// ---- experiments ---------------------------------------------------------------

TEST(Experiment, ZeroDriveZeroStateIsAllZero) {
  auto c = parse_config(std::string(kMinimal) + "[run]\ndrive = \"none\"\ninitial = \"zero\"\nsteps = 20\nemit_potential = true\n");
  std::ostringstream log;
  const auto r = run_experiment(c, log);
  for (const auto* run : {&r.scalar, &r.vector}) {
    ASSERT_EQ(run->rows.size(), 21u);
    for (const auto& row : run->rows) {
      EXPECT_EQ(row.storage, 0.0);
      EXPECT_EQ(row.supply_step, 0.0);
      EXPECT_EQ(row.supply_cum, 0.0);
      EXPECT_EQ(row.init_plus_supplied, 0.0);
      EXPECT_EQ(row.residual, 0.0);
      EXPECT_EQ(row.max_abs_state, 0.0);
      EXPECT_EQ(row.max_abs_potential, 0.0);
    }
  }
}

TEST(Experiment, ReportIsSelfConsistent) {
  const auto c = parse_config(R"(
[grid]
nx = 9
ny = 3
nz = 3
extent = 0.1
[run]
steps = 80
)");
  std::ostringstream log;
  const auto r = run_experiment(c, log);
  for (const auto* run : {&r.scalar, &r.vector}) {
    CompensatedSum residual_sum;
    for (std::size_t i = 1; i < run->rows.size(); ++i) {
      const auto& row = run->rows[i];
      residual_sum += row.residual;
      EXPECT_NEAR(row.init_plus_supplied - row.storage, -residual_sum.value(), 1e-13 * run->max_abs_storage);
      EXPECT_EQ(row.init_plus_supplied, run->rows[0].storage + row.supply_cum);
      EXPECT_EQ(row.step, static_cast<long>(i));
    }
    EXPECT_LE(run->max_abs_residual, 1e-12 * run->max_abs_storage);
    EXPECT_TRUE(std::isfinite(run->exact_energy));
  }
}

TEST(Experiment, OutputsAreDeterministic) {
  auto c = parse_config(std::string(kMinimal) + "[run]\nsteps = 30\nemit_potential = true\n");
  std::ostringstream log;
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  write_experiment(run_experiment(c, log), d1);
  write_experiment(run_experiment(c, log), d2);
  for (const char* f : {"scalar.csv", "vector.csv", "summary.txt"}) {
    const auto a = read_file(d1 / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, read_file(d2 / f)) << f;
  }
  const auto summary = read_file(d1 / "summary.txt");
  EXPECT_NE(summary.find("cfl_dt = "), std::string::npos);
  EXPECT_NE(summary.find("pd = positive definite"), std::string::npos);
  EXPECT_NE(summary.find("exact_energy = "), std::string::npos);
  EXPECT_NE(summary.find("max_rel_deviation = "), std::string::npos);
}

TEST(Experiment, PdSkippedOnLargeGrids) {
  auto c = parse_config("[grid]\nnx = 6\nny = 2\nnz = 2\nextent = 0.01\n[run]\nsteps = 2\ndrive = \"none\"\n");
  std::ostringstream log;
  const auto r = run_experiment(c, log);
  EXPECT_EQ(r.scalar.pd_verdict, "skipped");
  EXPECT_EQ(r.vector.pd_verdict, "skipped");
}

TEST(Experiment, SingleSystemWritesOneCsv) {
  auto c = parse_config(std::string(kMinimal) + "[run]\nsteps = 3\nsystem = \"scalar\"\n");
  std::ostringstream log;
  const auto dir = scratch("single");
  write_experiment(run_experiment(c, log), dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "scalar.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "vector.csv"));
  std::ifstream in(dir / "scalar.csv");
  EXPECT_EQ(read_timeseries(in).size(), 4u);
}
