// pfdtd: command-line front end for the potentials-based FDTD solver.
//
//   pfdtd run      --config run.toml --out results/
//   pfdtd cfl      --config run.toml
//   pfdtd assemble --config run.toml --system scalar --out r.txt
//   pfdtd cavity   --dt-factor 1.001 --steps 3000 --out above/

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pfdtd/pfdtd.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pfdtd::ConfigError(0, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int finish_run(const pfdtd::ExperimentResult& res, const std::string& out) {
  pfdtd::write_experiment(res, out);
  pfdtd::write_summary(std::cout, res);
  if (res.numeric_error()) {
    for (const auto* s : {&res.scalar, &res.vector}) {
      if (s->non_finite) {
        std::cerr << "error: non-finite state at step " << s->steps_completed << "\n";
      }
    }
    return kExitNumeric;
  }
  return 0;
}

/// 90x30x30 vacuum cavity of side 0.1 m, mode (3,1,1), C_A = 1e-9.
pfdtd::RunConfig reference_cavity_config() {
  pfdtd::RunConfig cfg;
  cfg.grid = pfdtd::GridSpec{90, 30, 30, 0.1 / 90, 0.1 / 30, 0.1 / 30};
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potentials-based FDTD solver with energy audit"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "solver threads")->check(CLI::PositiveNumber);

  std::string config_path, out_path, system_name = "scalar";
  double dt_factor = 0.999;
  long steps = 0;
  bool emit_potential = false;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_path, "output directory (overrides [output] dir)");

  auto* cfl = app.add_subcommand("cfl", "print the CFL time step of a configuration");
  cfl->add_option("--config", config_path, "config file")->required();

  auto* assemble = app.add_subcommand("assemble", "dump R, F, B, L, S as triplets (grids <= 5x5x5)");
  assemble->add_option("--config", config_path, "config file")->required();
  assemble->add_option("--system", system_name, "scalar or vector")
      ->check(CLI::IsMember({"scalar", "vector"}));
  assemble->add_option("--out", out_path, "output file (default stdout)");

  auto* cavity = app.add_subcommand("cavity", "reference cavity experiment, 90x30x30 grid");
  cavity->add_option("--dt-factor", dt_factor, "time step as a multiple of CFL")
      ->check(CLI::PositiveNumber);
  cavity->add_option("--steps", steps, "step count (default 600, or 3000 above CFL)");
  cavity->add_option("--out", out_path, "output directory")->required();
  cavity->add_flag("--emit-potential", emit_potential, "add the max_abs_potential column");

  CLI11_PARSE(app, argc, argv);
  set_threads(threads);

  try {
    if (*cavity) {
      pfdtd::RunConfig cfg = reference_cavity_config();
      cfg.dt_factor = dt_factor;
      cfg.steps = steps > 0 ? steps : (cfg.above_cfl() ? 3000 : 600);
      cfg.emit_potential = emit_potential;
      cfg.threads = threads;
      return finish_run(pfdtd::run_experiment(cfg, std::cerr), out_path);
    }

    pfdtd::RunConfig cfg = pfdtd::parse_config(slurp(config_path));
    auto& vox = cfg.materials.voxel_file;
    if (!vox.empty() && std::filesystem::path(vox).is_relative()) {
      vox = (std::filesystem::path(config_path).parent_path() / vox).string();
    }
    if (app.get_option("--threads")->count() == 0) set_threads(cfg.threads);

    if (*cfl) {
      const auto g = pfdtd::build_grid(cfg.grid);
      const auto mats = pfdtd::build_materials(g, cfg.materials);
      const double c = pfdtd::cfl_limit(cfg.grid, mats);
      std::cout << "cfl_dt = " << pfdtd::format_g17(c) << "\n";
      std::cout << "dt = " << pfdtd::format_g17(cfg.dt_factor * c) << "\n";
      return 0;
    }

    if (*assemble) {
      const auto& s = cfg.grid;
      if (s.nx > pfdtd::kPdSummaryMaxCells || s.ny > pfdtd::kPdSummaryMaxCells ||
          s.nz > pfdtd::kPdSummaryMaxCells) {
        throw pfdtd::ConfigError(0, "assemble: grids are limited to 5x5x5");
      }
      const auto g = pfdtd::build_grid(cfg.grid);
      const auto mats = pfdtd::build_materials(g, cfg.materials);
      const double dt = cfg.dt_factor * pfdtd::cfl_limit(cfg.grid, mats);
      const auto kind = system_name == "vector" ? pfdtd::SystemKind::Vector : pfdtd::SystemKind::Scalar;
      const auto sys = pfdtd::assemble_system(g, mats, dt, kind);
      if (out_path.empty()) {
        pfdtd::write_system_triplets(std::cout, sys);
      } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw pfdtd::InvalidArgument("cannot write '" + out_path + "'");
        pfdtd::write_system_triplets(f, sys);
      }
      const auto pd = pfdtd::check_positive_definite(sys, pfdtd::PdMethod::DenseEigen);
      std::cerr << pfdtd::system_name(kind) << ": R is "
                << (pd.positive_definite ? "positive definite" : "NOT positive definite") << "\n";
      return 0;
    }

    if (*run) {
      if (!out_path.empty()) cfg.output_dir = out_path;
      if (cfg.output_dir.empty()) throw pfdtd::ConfigError(0, "no output directory (use --out or [output] dir)");
      return finish_run(pfdtd::run_experiment(cfg, std::cerr), cfg.output_dir);
    }
  } catch (const pfdtd::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
