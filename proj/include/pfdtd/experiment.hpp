#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "pfdtd/cavity.hpp"
#include "pfdtd/config.hpp"
#include "pfdtd/dissipation.hpp"
#include "pfdtd/grid.hpp"
#include "pfdtd/io.hpp"
#include "pfdtd/materials.hpp"
#include "pfdtd/scalar_solver.hpp"
#include "pfdtd/system_matrices.hpp"
#include "pfdtd/vector_solver.hpp"

namespace pfdtd {

/// Grids up to this many cells per axis get a PD verdict in the summary.
inline constexpr int kPdSummaryMaxCells = 5;

struct SystemRun {
  bool ran = false;
  std::vector<TimeSeriesRow> rows;  // row 0 is the initial state
  long steps_completed = 0;
  bool non_finite = false;
  double exact_energy = std::numeric_limits<double>::quiet_NaN();
  double max_rel_deviation = std::numeric_limits<double>::quiet_NaN();
  double max_abs_residual = 0.0;
  double max_abs_storage = 0.0;
  std::string pd_verdict = "skipped";

  /// max|state| at the last row over max|state| at row 0.
  double growth() const {
    if (rows.size() < 2 || rows.front().max_abs_state == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return rows.back().max_abs_state / rows.front().max_abs_state;
  }
};

struct ExperimentResult {
  RunConfig config;
  double dt = 0.0;
  double cfl_dt = 0.0;
  SystemRun scalar;
  SystemRun vector;

  bool numeric_error() const { return scalar.non_finite || vector.non_finite; }
};

inline MaterialMaps build_materials(const GridIndex& g, const MaterialSpec& spec) {
  if (spec.voxel_file.empty()) return uniform_materials(g, spec.eps_r, spec.mu_r);
  const VoxelData vox = load_voxels(spec.voxel_file, spec.voxel_format, g.cell_count());
  std::vector<double> eps(vox.eps_r.size()), mu(vox.mu_r.size());
  for (std::size_t c = 0; c < eps.size(); ++c) {
    eps[c] = vox.eps_r[c] * kEps0;
    mu[c] = vox.mu_r[c] * kMu0;
  }
  return materials_from_cells(g, eps, mu);
}

namespace detail {

inline double max_abs(std::span<const double> v, double m = 0.0) {
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

template <class Arr>
double max_abs_blocks(const Arr& blocks, double m = 0.0) {
  for (const auto& b : blocks) m = max_abs(b, m);
  return m;
}

inline void fill_random(std::vector<double>& v, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  for (double& x : v) x = d(rng);
}

inline std::string pd_verdict(const GridIndex& g, const MaterialMaps& m, double dt, SystemKind k) {
  const auto& s = g.spec();
  if (s.nx > kPdSummaryMaxCells || s.ny > kPdSummaryMaxCells || s.nz > kPdSummaryMaxCells) {
    return "skipped";
  }
  const PdResult r = check_positive_definite(assemble_system(g, m, dt, k), PdMethod::DenseEigen);
  return std::string(r.positive_definite ? "positive definite" : "NOT positive definite") +
         " (smallest scaled eigenvalue " + format_g17(r.smallest_estimate) + ")";
}

inline bool finish_row(SystemRun& run, TimeSeriesRow row) {
  run.rows.push_back(row);
  run.max_abs_residual = std::max(run.max_abs_residual, std::abs(row.residual));
  run.max_abs_storage = std::max(run.max_abs_storage, std::abs(row.storage));
  if (std::isfinite(run.exact_energy)) {
    const double dev = std::abs(row.storage - run.exact_energy) / run.exact_energy;
    run.max_rel_deviation = std::isnan(run.max_rel_deviation) ? dev : std::max(run.max_rel_deviation, dev);
  }
  const bool ok = std::isfinite(row.storage) && std::isfinite(row.max_abs_state) &&
                  std::isfinite(row.residual) && std::isfinite(row.max_abs_potential);
  if (!ok) run.non_finite = true;
  return ok;
}

}  // namespace detail

inline SystemRun run_scalar(const RunConfig& cfg, const GridIndex& g, const MaterialMaps& mats,
                            double dt, std::ostream& log) {
  SystemRun run;
  run.ran = true;
  const bool cavity = cfg.needs_cavity();
  CavityMode mode;
  if (cavity) mode = cavity_params(g.spec().extent()[0], cfg.cavity_c_a, cfg.cavity_modes);

  ScalarState s0 = ScalarState::zeros(g);
  std::vector<double> phi(g.node_count(), 0.0);
  if (cfg.initial == InitialKind::Cavity) {
    s0 = cavity_scalar_state(g, mode, dt);
    phi = sample_nodes(g, mode, CavityField::Phi, 0.0);
    run.exact_energy = exact_energies(mode).e_phi;
  } else if (cfg.initial == InitialKind::Random) {
    std::mt19937_64 rng(cfg.seed);
    for (auto& v : s0.grad_phi) detail::fill_random(v, rng);
    detail::fill_random(s0.dphi_dt, rng, kC0);
  }
  ScalarSim sim(g, mats, dt, std::move(s0));
  std::optional<CavityDrive> drive;
  if (cfg.drive == DriveKind::Cavity) drive.emplace(g, mode, dt);
  const std::vector<double> no_input(sim.input_size(), 0.0);

  const double e0 = storage_scalar(sim);
  TimeSeriesRow row;
  row.storage = e0;
  row.init_plus_supplied = e0;
  row.max_abs_state = detail::max_abs(sim.state().dphi_dt);
  row.max_abs_potential = cfg.emit_potential ? detail::max_abs(phi) : 0.0;
  detail::finish_row(run, row);

  CompensatedSum cum;
  double e = e0;
  for (long n = 0; n < cfg.steps; ++n) {
    const std::vector<double> u = drive ? drive->scalar(sim.step_index()) : no_input;
    const StepBalance b = audited_step(sim, u, e);
    e = b.e_after;
    cum += b.supply;
    if (cfg.emit_potential) phi = reconstruct_phi(sim, phi);
    row.step = sim.step_index();
    row.t = static_cast<double>(row.step) * dt;
    row.storage = b.e_after;
    row.supply_step = b.supply;
    row.supply_cum = cum.value();
    row.init_plus_supplied = e0 + cum.value();
    row.residual = b.residual;
    row.max_abs_state = detail::max_abs(sim.state().dphi_dt);
    row.max_abs_potential = cfg.emit_potential ? detail::max_abs(phi) : 0.0;
    run.steps_completed = row.step;
    if (!detail::finish_row(run, row)) {
      log << "scalar: non-finite values at step " << row.step << ", stopping\n";
      break;
    }
  }
  run.pd_verdict = detail::pd_verdict(g, mats, dt, SystemKind::Scalar);
  return run;
}

inline SystemRun run_vector(const RunConfig& cfg, const GridIndex& g, const MaterialMaps& mats,
                            double dt, std::ostream& log) {
  SystemRun run;
  run.ran = true;
  const bool cavity = cfg.needs_cavity();
  CavityMode mode;
  if (cavity) mode = cavity_params(g.spec().extent()[0], cfg.cavity_c_a, cfg.cavity_modes);

  VectorState s0 = VectorState::zeros(g);
  std::array<std::vector<double>, 3> a_pot{std::vector<double>(g.edge_count(Axis::X), 0.0),
                                           std::vector<double>(g.edge_count(Axis::Y), 0.0),
                                           std::vector<double>(g.edge_count(Axis::Z), 0.0)};
  if (cfg.initial == InitialKind::Cavity) {
    s0 = cavity_vector_state(g, mode, dt);
    a_pot[0] = sample_edges(g, mode, Axis::X, CavityField::Ax, -0.5 * dt);
    run.exact_energy = exact_energies(mode).e_a;
  } else if (cfg.initial == InitialKind::Random) {
    std::mt19937_64 rng(cfg.seed);
    for (auto& v : s0.dA_dt) detail::fill_random(v, rng);
    for (auto& v : s0.b) detail::fill_random(v, rng, 1.0 / kC0);
    detail::fill_random(s0.kappa, rng, kC0);
  }
  VectorSim sim(g, mats, dt, std::move(s0));
  std::optional<CavityDrive> drive;
  if (cfg.drive == DriveKind::Cavity) drive.emplace(g, mode, dt);
  const VectorInputs no_input = VectorInputs::zeros(g);

  const double e0 = storage_vector(sim);
  TimeSeriesRow row;
  row.storage = e0;
  row.init_plus_supplied = e0;
  row.max_abs_state = detail::max_abs_blocks(sim.state().dA_dt);
  row.max_abs_potential = cfg.emit_potential ? detail::max_abs_blocks(a_pot) : 0.0;
  detail::finish_row(run, row);

  CompensatedSum cum;
  double e = e0;
  for (long n = 0; n < cfg.steps; ++n) {
    // A^{n+1/2} = A^{n-1/2} + dt a^n, reported alongside B and kappa.
    if (cfg.emit_potential) a_pot = reconstruct_a(sim, a_pot);
    const VectorInputs u = drive ? drive->vector(sim.step_index()) : no_input;
    const StepBalance b = audited_step(sim, u, e);
    e = b.e_after;
    cum += b.supply;
    row.step = sim.step_index();
    row.t = static_cast<double>(row.step) * dt;
    row.storage = b.e_after;
    row.supply_step = b.supply;
    row.supply_cum = cum.value();
    row.init_plus_supplied = e0 + cum.value();
    row.residual = b.residual;
    row.max_abs_state = detail::max_abs_blocks(sim.state().dA_dt);
    row.max_abs_potential = cfg.emit_potential ? detail::max_abs_blocks(a_pot) : 0.0;
    run.steps_completed = row.step;
    if (!detail::finish_row(run, row)) {
      log << "vector: non-finite values at step " << row.step << ", stopping\n";
      break;
    }
  }
  run.pd_verdict = detail::pd_verdict(g, mats, dt, SystemKind::Vector);
  return run;
}

/// Runs the configured systems. Pure computation; see write_experiment for files.
inline ExperimentResult run_experiment(const RunConfig& cfg, std::ostream& log) {
  ExperimentResult res;
  res.config = cfg;
  const GridIndex g = build_grid(cfg.grid);
  const MaterialMaps mats = build_materials(g, cfg.materials);
  res.cfl_dt = cfl_limit(cfg.grid, mats);
  res.dt = cfg.dt_factor * res.cfl_dt;
  if (cfg.above_cfl()) {
    log << "warning: dt_factor " << format_g17(cfg.dt_factor) << " is above CFL\n";
  }
  log << "grid " << cfg.grid.nx << "x" << cfg.grid.ny << "x" << cfg.grid.nz << ", dt "
      << format_g17(res.dt) << " s, " << cfg.steps << " steps\n";
  if (cfg.runs(SystemChoice::Scalar)) res.scalar = run_scalar(cfg, g, mats, res.dt, log);
  if (cfg.runs(SystemChoice::Vector)) res.vector = run_vector(cfg, g, mats, res.dt, log);
  return res;
}

inline void write_summary(std::ostream& os, const ExperimentResult& r) {
  os << "dt = " << format_g17(r.dt) << "\n";
  os << "cfl_dt = " << format_g17(r.cfl_dt) << "\n";
  os << "dt_factor = " << format_g17(r.config.dt_factor) << (r.config.above_cfl() ? " (above CFL)" : "")
     << "\n";
  os << "steps_requested = " << r.config.steps << "\n";
  auto block = [&](const char* name, const SystemRun& s) {
    if (!s.ran) return;
    os << "[" << name << "]\n";
    os << "steps_completed = " << s.steps_completed << "\n";
    os << "non_finite = " << (s.non_finite ? "true" : "false") << "\n";
    os << "pd = " << s.pd_verdict << "\n";
    os << "initial_storage = " << format_g17(s.rows.front().storage) << "\n";
    os << "final_storage = " << format_g17(s.rows.back().storage) << "\n";
    if (std::isfinite(s.exact_energy)) {
      os << "exact_energy = " << format_g17(s.exact_energy) << "\n";
      os << "max_rel_deviation = " << format_g17(s.max_rel_deviation) << "\n";
    }
    os << "max_abs_residual = " << format_g17(s.max_abs_residual) << "\n";
    os << "max_abs_residual_over_storage = "
       << format_g17(s.max_abs_storage > 0 ? s.max_abs_residual / s.max_abs_storage : 0.0) << "\n";
    os << "growth = " << format_g17(s.growth()) << "\n";
  };
  block("scalar", r.scalar);
  block("vector", r.vector);
}

/// Writes scalar.csv, vector.csv (for the systems that ran) and summary.txt.
inline void write_experiment(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write '" + p.string() + "'");
    return f;
  };
  if (r.scalar.ran) {
    auto f = open(dir / "scalar.csv");
    write_timeseries(f, r.scalar.rows, r.config.emit_potential);
  }
  if (r.vector.ran) {
    auto f = open(dir / "vector.csv");
    write_timeseries(f, r.vector.rows, r.config.emit_potential);
  }
  auto f = open(dir / "summary.txt");
  write_summary(f, r);
}

}  // namespace pfdtd
