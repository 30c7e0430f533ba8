#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <type_traits>
#include <span>
#include <vector>

#include "pfdtd/core.hpp"
#include "pfdtd/grid.hpp"
#include "pfdtd/materials.hpp"
#include "pfdtd/scalar_solver.hpp"
#include "pfdtd/vector_solver.hpp"

namespace pfdtd {

// ---- CFL ---------------------------------------------------------------------

/// Largest stable leapfrog step for a homogeneous medium:
/// sqrt(mu*eps) / sqrt(dx^-2 + dy^-2 + dz^-2).
inline double cfl_limit(const GridSpec& spec, double eps, double mu) {
  spec.validate();
  if (!(eps > 0.0) || !(mu > 0.0)) throw InvalidArgument("cfl: eps and mu must be positive");
  const double inv2 = 1.0 / (spec.dx * spec.dx) + 1.0 / (spec.dy * spec.dy) +
                      1.0 / (spec.dz * spec.dz);
  return std::sqrt(mu * eps) / std::sqrt(inv2);
}

/// Heuristic bound for inhomogeneous media using the smallest cell sqrt(mu*eps).
/// Not a certificate; see check_positive_definite.
inline double cfl_limit(const GridSpec& spec, const MaterialMaps& mats) {
  if (!mats.min_sqrt_mu_eps) {
    throw InvalidArgument("cfl: materials carry no cell-level mu*eps information");
  }
  const double s = *mats.min_sqrt_mu_eps;
  return cfl_limit(spec, s * s, 1.0);
}

// ---- storage -----------------------------------------------------------------

/// (dt/2) x^T R x for the scalar system, evaluated without assembling R.
inline double storage_scalar(const ScalarSim& sim) {
  const auto& g = sim.grid();
  const auto& c = sim.coefficients();
  const auto& st = sim.state();
  CompensatedSum e;
  for (Axis a : kAxes) {
    const auto& v = st.grad_phi[idx(a)];
    const auto& m = c.edge_mass[idx(a)];
    for (std::size_t i = 0; i < v.size(); ++i) e += 0.5 * m[i] * v[i] * v[i];
  }
  const double half_dt = 0.5 * sim.dt();
  for (std::size_t v = 0; v < st.dphi_dt.size(); ++v) {
    const double psi = st.dphi_dt[v];
    e += 0.5 * c.node_mass[v] * psi * psi;
    e += half_dt * psi * sim.node_flux(g.node_ijk(v));
  }
  return e.value();
}

/// (dt/2) x^T R x for the vector system, evaluated without assembling R.
inline double storage_vector(const VectorSim& sim) {
  const auto& g = sim.grid();
  const auto& c = sim.coefficients();
  const auto& st = sim.state();
  const double half_dt = 0.5 * sim.dt();
  CompensatedSum e;
  for (Axis a : kAxes) {
    const int ia = idx(a);
    const auto& v = st.dA_dt[ia];
    for (std::size_t i = 0; i < v.size(); ++i) e += 0.5 * c.edge_mass[ia][i] * v[i] * v[i];
    const auto& b = st.b[ia];
    for (std::size_t f = 0; f < b.size(); ++f) {
      e += 0.5 * c.face_mass[ia][f] * b[f] * b[f];
      e += half_dt * b[f] * c.face_circ[ia][f] * sim.face_circulation(a, g.face_ijk(a, f));
    }
  }
  for (std::size_t v = 0; v < st.kappa.size(); ++v) {
    const double k = st.kappa[v];
    e += 0.5 * c.node_mass[v] * k * k;
    e += -half_dt * k * sim.node_flux(g.node_ijk(v));
  }
  return e.value();
}

// ---- supply ------------------------------------------------------------------

/// dt * sum_s w_s * u_s * (y-_s + y+_s)/2, with w the diagonal input weight.
inline double supply_rate(std::span<const double> weights, std::span<const double> u,
                          std::span<const double> y_minus, std::span<const double> y_plus,
                          double dt) {
  require_size(u.size(), weights.size(), "supply: inputs");
  require_size(y_minus.size(), weights.size(), "supply: y_minus");
  require_size(y_plus.size(), weights.size(), "supply: y_plus");
  CompensatedSum s;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s += dt * weights[i] * u[i] * (0.5 * (y_minus[i] + y_plus[i]));
  }
  return s.value();
}

/// Supply of the scalar system; `weights` are sign*area*eps per perpendicular site.
inline double supply_scalar(std::span<const double> weights, std::span<const double> u_n,
                            std::span<const double> y_minus, std::span<const double> y_plus,
                            double dt) {
  return supply_rate(weights, u_n, y_minus, y_plus, dt);
}

inline double supply_scalar(const ScalarSim& sim, std::span<const double> u_n,
                            std::span<const double> y_minus, std::span<const double> y_plus) {
  return supply_rate(sim.coefficients().input_weight, u_n, y_minus, y_plus, sim.dt());
}

/// Supply of the vector system. `perp_weights` are the kappa-row input gains
/// (-sign*area*eps), `btan_weights` the dA/dt-row gains (sign*area*mu^-1).
inline double supply_vector(std::span<const double> perp_weights,
                            std::span<const double> btan_weights,
                            std::span<const double> u_perp_n, std::span<const double> u_btan_nhalf,
                            std::span<const double> y_tan_n, std::span<const double> y_tan_np1,
                            std::span<const double> y_kappa_minus,
                            std::span<const double> y_kappa_plus, double dt) {
  return supply_rate(perp_weights, u_perp_n, y_kappa_minus, y_kappa_plus, dt) +
         supply_rate(btan_weights, u_btan_nhalf, y_tan_n, y_tan_np1, dt);
}

inline double supply_vector(const VectorSim& sim, const VectorInputs& in,
                            const VectorOutputs& y_minus, const VectorOutputs& y_plus) {
  const auto& c = sim.coefficients();
  return supply_vector(c.perp_weight, c.btan_weight, in.perp, in.btan, y_minus.tan, y_plus.tan,
                       y_minus.kappa, y_plus.kappa, sim.dt());
}

// ---- audited stepping ----------------------------------------------------------

struct StepBalance {
  double e_before = 0.0;
  double e_after = 0.0;
  double supply = 0.0;
  double residual = 0.0;  // e_after - e_before - supply
};

inline StepBalance audited_step(ScalarSim& sim, std::span<const double> u, double e_before) {
  const auto y_minus = sim.outputs();
  const auto y_plus = sim.step(u);
  StepBalance r;
  r.e_before = e_before;
  r.e_after = storage_scalar(sim);
  r.supply = supply_scalar(sim, u, y_minus, y_plus);
  r.residual = r.e_after - r.e_before - r.supply;
  return r;
}

inline StepBalance audited_step(VectorSim& sim, const VectorInputs& in, double e_before) {
  const auto y_minus = sim.outputs();
  const auto y_plus = sim.step(in);
  StepBalance r;
  r.e_before = e_before;
  r.e_after = storage_vector(sim);
  r.supply = supply_vector(sim, in, y_minus, y_plus);
  r.residual = r.e_after - r.e_before - r.supply;
  return r;
}

inline double storage(const ScalarSim& sim) { return storage_scalar(sim); }
inline double storage(const VectorSim& sim) { return storage_vector(sim); }

struct BalanceReport {
  std::vector<double> e_before;
  std::vector<double> e_after;
  std::vector<double> supply;
  std::vector<double> residual;
  double max_abs_residual = 0.0;
  double max_abs_storage = 0.0;

  void push(const StepBalance& s) {
    e_before.push_back(s.e_before);
    e_after.push_back(s.e_after);
    supply.push_back(s.supply);
    residual.push_back(s.residual);
    max_abs_residual = std::max(max_abs_residual, std::abs(s.residual));
    max_abs_storage = std::max({max_abs_storage, std::abs(s.e_before), std::abs(s.e_after)});
  }
  std::size_t size() const { return residual.size(); }
};

using ScalarDrive = std::function<std::vector<double>(long n)>;
using VectorDrive = std::function<VectorInputs(long n)>;

/// Runs `steps` steps, recording storage before/after, supply, and residual.
template <class Sim, class Drive>
BalanceReport audit_balance(Sim& sim, const Drive& drive, long steps) {
  BalanceReport rep;
  double e = storage(sim);
  for (long s = 0; s < steps; ++s) {
    const auto in = drive(sim.step_index());
    StepBalance b;
    if constexpr (std::is_same_v<Sim, ScalarSim>) {
      b = audited_step(sim, std::span<const double>(in), e);
    } else {
      b = audited_step(sim, in, e);
    }
    rep.push(b);
    e = b.e_after;
  }
  return rep;
}

}  // namespace pfdtd
