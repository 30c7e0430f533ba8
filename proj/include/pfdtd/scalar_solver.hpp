#pragma once

#include <array>
#include <span>
#include <vector>

#include "pfdtd/core.hpp"
#include "pfdtd/grid.hpp"
#include "pfdtd/materials.hpp"

namespace pfdtd {

/// Leapfrog state of the scalar-potential system after `step` steps:
/// grad_phi on primary edges at t = step*dt, dphi_dt on nodes at t = (step-1/2)*dt.
struct ScalarState {
  std::array<std::vector<double>, 3> grad_phi;
  std::vector<double> dphi_dt;
  long step = 0;

  static ScalarState zeros(const GridIndex& g) {
    ScalarState s;
    for (Axis a : kAxes) s.grad_phi[idx(a)].assign(g.edge_count(a), 0.0);
    s.dphi_dt.assign(g.node_count(), 0.0);
    return s;
  }

  void check(const GridIndex& g) const {
    for (Axis a : kAxes) require_size(grad_phi[idx(a)].size(), g.edge_count(a), "scalar state: grad_phi");
    require_size(dphi_dt.size(), g.node_count(), "scalar state: dphi_dt");
  }
};

/// Per-entity weights used by the update and by the energy audit.
///   edge_mass  = eps * S'' * l'     edge_flux = eps * S''
///   node_mass  = chi * V''          input_weight[s] = sign * area * eps_site
struct ScalarCoefficients {
  std::array<std::vector<double>, 3> edge_mass;
  std::array<std::vector<double>, 3> edge_flux;
  std::array<std::vector<double>, 3> edge_inv_mass;  // dt / edge_mass
  std::vector<double> node_mass;
  std::vector<double> node_inv_mass;                 // dt / node_mass
  std::vector<double> input_weight;
};

class ScalarSim {
 public:
  ScalarSim(const GridIndex& grid, const MaterialMaps& mats, double dt, ScalarState state0)
      : grid_(grid), dt_(dt), state_(std::move(state0)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("scalar: dt must be positive");
    mats.validate(grid_);
    state_.check(grid_);
    state_.step = 0;
    sites_ = grid_.enumerate_hanging(HangingFamily::ScalarGradPerp);

    for (Axis a : kAxes) {
      const int ia = idx(a);
      const std::size_t ne = grid_.edge_count(a);
      coef_.edge_mass[ia].resize(ne);
      coef_.edge_flux[ia].resize(ne);
      coef_.edge_inv_mass[ia].resize(ne);
      for (std::size_t e = 0; e < ne; ++e) {
        const double flux = mats.eps_edge[ia][e] * grid_.edge_dual_area(a, grid_.edge_ijk(a, e));
        coef_.edge_flux[ia][e] = flux;
        coef_.edge_mass[ia][e] = flux * grid_.edge_length(a);
        coef_.edge_inv_mass[ia][e] = dt_ / coef_.edge_mass[ia][e];
      }
    }
    const std::size_t nn = grid_.node_count();
    coef_.node_mass.resize(nn);
    coef_.node_inv_mass.resize(nn);
    for (std::size_t v = 0; v < nn; ++v) {
      coef_.node_mass[v] = mats.chi_node[v] * grid_.node_volume(grid_.node_ijk(v));
      coef_.node_inv_mass[v] = dt_ / coef_.node_mass[v];
    }
    coef_.input_weight.resize(sites_.size());
    for (std::size_t s = 0; s < sites_.size(); ++s) {
      coef_.input_weight[s] = sites_[s].sign * sites_[s].area * mats.eps_perp[s];
    }
  }

  const GridIndex& grid() const { return grid_; }
  double dt() const { return dt_; }
  long step_index() const { return state_.step; }
  const ScalarState& state() const { return state_; }
  const ScalarCoefficients& coefficients() const { return coef_; }
  const std::vector<HangingSite>& sites() const { return sites_; }
  std::size_t input_size() const { return sites_.size(); }

  void set_state(ScalarState s) {
    s.check(grid_);
    state_ = std::move(s);
  }

  /// Discrete flux of eps*grad_phi out of node `p`'s secondary cell through the
  /// faces pierced by interior edges; hanging faces are added from `u` when given.
  double node_flux(const Index3& p, std::span<const double> u = {}) const {
    const auto& n = grid_.cells();
    double sum = 0.0;
    for (Axis a : kAxes) {
      const int ia = idx(a);
      const auto& g = state_.grad_phi[ia];
      const auto& f = coef_.edge_flux[ia];
      if (p[ia] == 0) {
        if (!u.empty()) {
          const std::size_t s = grid_.perp_site_index(make_face(a, false), p);
          sum += coef_.input_weight[s] * u[s];
        }
      } else {
        Index3 q = p;
        q[ia] -= 1;
        const std::size_t e = grid_.edge_id(a, q);
        sum -= f[e] * g[e];
      }
      if (p[ia] == n[ia]) {
        if (!u.empty()) {
          const std::size_t s = grid_.perp_site_index(make_face(a, true), p);
          sum += coef_.input_weight[s] * u[s];
        }
      } else {
        const std::size_t e = grid_.edge_id(a, p);
        sum += f[e] * g[e];
      }
    }
    return sum;
  }

  /// Advances one step with boundary inputs u^n (one per perpendicular site);
  /// returns dphi_dt at the site host nodes at t = (n+1/2)*dt.
  std::vector<double> step(std::span<const double> u) {
    require_size(u.size(), sites_.size(), "scalar step: inputs");
    require_finite(u, "scalar step: inputs");
    const Index3 ne = grid_.node_extent();

    // Phase 1: nodes, from grad_phi^n.
    std::vector<double> next(state_.dphi_dt.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < ne[0]; ++i) {
      for (int j = 0; j < ne[1]; ++j) {
        for (int k = 0; k < ne[2]; ++k) {
          const std::size_t v = grid_.node_id(i, j, k);
          next[v] = state_.dphi_dt[v] + coef_.node_inv_mass[v] * node_flux({i, j, k}, u);
        }
      }
    }
    state_.dphi_dt.swap(next);

    // Phase 2: edges, from dphi_dt^{n+1/2}.
    for (Axis a : kAxes) {
      const int ia = idx(a);
      const Index3 ee = grid_.edge_extent(a);
      auto& g = state_.grad_phi[ia];
      const auto& psi = state_.dphi_dt;
#pragma omp parallel for schedule(static)
      for (int i = 0; i < ee[0]; ++i) {
        for (int j = 0; j < ee[1]; ++j) {
          for (int k = 0; k < ee[2]; ++k) {
            const Index3 tail{i, j, k};
            Index3 head = tail;
            head[ia] += 1;
            const std::size_t e = grid_.edge_id(a, tail);
            const double diff = psi[grid_.node_id(head)] - psi[grid_.node_id(tail)];
            g[e] += coef_.edge_inv_mass[ia][e] * (coef_.edge_flux[ia][e] * diff);
          }
        }
      }
    }
    ++state_.step;
    return outputs();
  }

  /// dphi_dt at each perpendicular site's host node, at t = (n-1/2)*dt.
  std::vector<double> outputs() const {
    std::vector<double> y(sites_.size());
    for (std::size_t s = 0; s < sites_.size(); ++s) y[s] = state_.dphi_dt[sites_[s].host];
    return y;
  }

 private:
  GridIndex grid_;
  double dt_;
  ScalarState state_;
  std::vector<HangingSite> sites_;
  ScalarCoefficients coef_;
};

inline ScalarSim init_scalar(const GridIndex& grid, const MaterialMaps& mats, double dt,
                             ScalarState state0) {
  return ScalarSim(grid, mats, dt, std::move(state0));
}

inline std::vector<double> step_scalar(ScalarSim& sim, std::span<const double> u) {
  return sim.step(u);
}

inline std::vector<double> scalar_outputs(const ScalarSim& sim) { return sim.outputs(); }

/// Midpoint-rule integration of the potential: phi + dt * dphi_dt.
/// With the simulator at step n this carries phi from t=(n-1)dt to t=n*dt.
inline std::vector<double> reconstruct_phi(const ScalarSim& sim, std::span<const double> phi_prev) {
  require_size(phi_prev.size(), sim.grid().node_count(), "reconstruct_phi: phi_prev");
  const auto& psi = sim.state().dphi_dt;
  std::vector<double> phi(phi_prev.begin(), phi_prev.end());
  for (std::size_t v = 0; v < phi.size(); ++v) phi[v] += sim.dt() * psi[v];
  return phi;
}

}  // namespace pfdtd
