#pragma once

#include <array>
#include <span>
#include <vector>

#include "pfdtd/core.hpp"
#include "pfdtd/grid.hpp"
#include "pfdtd/materials.hpp"

namespace pfdtd {

/// Leapfrog state of the vector-potential system after `step` steps:
/// dA_dt on primary edges at t = step*dt; b on secondary edges (primary faces)
/// and kappa on nodes at t = (step-1/2)*dt.
struct VectorState {
  std::array<std::vector<double>, 3> dA_dt;
  std::array<std::vector<double>, 3> b;
  std::vector<double> kappa;
  long step = 0;

  static VectorState zeros(const GridIndex& g) {
    VectorState s;
    for (Axis a : kAxes) {
      s.dA_dt[idx(a)].assign(g.edge_count(a), 0.0);
      s.b[idx(a)].assign(g.face_count(a), 0.0);
    }
    s.kappa.assign(g.node_count(), 0.0);
    return s;
  }

  void check(const GridIndex& g) const {
    for (Axis a : kAxes) {
      require_size(dA_dt[idx(a)].size(), g.edge_count(a), "vector state: dA_dt");
      require_size(b[idx(a)].size(), g.face_count(a), "vector state: b");
    }
    require_size(kappa.size(), g.node_count(), "vector state: kappa");
  }
};

/// Boundary inputs for one step: perpendicular dA/dt at t = n*dt and
/// tangential B at t = (n+1/2)*dt, in hanging-site order.
struct VectorInputs {
  std::vector<double> perp;
  std::vector<double> btan;

  static VectorInputs zeros(const GridIndex& g) {
    return {std::vector<double>(g.perp_site_count(), 0.0),
            std::vector<double>(g.btan_site_count(), 0.0)};
  }
};

/// Conjugate boundary outputs: dA/dt on tangential-B host edges (integer
/// times) and kappa at perpendicular-site host nodes (half-integer times).
struct VectorOutputs {
  std::vector<double> tan;
  std::vector<double> kappa;
};

///   edge_mass = eps*S''*l'   edge_flux = eps*S''
///   face_mass = mu^-1*S'*l'' face_circ = mu^-1*l''
///   node_mass = chi*V''
///   perp_weight[s] = -sign*area*eps_site  (input gain in the kappa rows)
///   btan_weight[s] = sign*area*mu^-1_site (input gain in the dA/dt rows)
struct VectorCoefficients {
  std::array<std::vector<double>, 3> edge_mass, edge_flux, edge_inv_mass;
  std::array<std::vector<double>, 3> face_mass, face_circ, face_inv_mass;
  std::vector<double> node_mass, node_inv_mass;
  std::vector<double> perp_weight;
  std::vector<double> btan_weight;
};

class VectorSim {
 public:
  VectorSim(const GridIndex& grid, const MaterialMaps& mats, double dt, VectorState state0)
      : grid_(grid), dt_(dt), state_(std::move(state0)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("vector: dt must be positive");
    mats.validate(grid_);
    state_.check(grid_);
    state_.step = 0;
    perp_sites_ = grid_.enumerate_hanging(HangingFamily::ADotPerp);
    btan_sites_ = grid_.enumerate_hanging(HangingFamily::BTan);

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
      const std::size_t nf = grid_.face_count(a);
      coef_.face_mass[ia].resize(nf);
      coef_.face_circ[ia].resize(nf);
      coef_.face_inv_mass[ia].resize(nf);
      for (std::size_t f = 0; f < nf; ++f) {
        const double circ = mats.mu_inv_face[ia][f] * grid_.face_dual_length(a, grid_.face_ijk(a, f));
        coef_.face_circ[ia][f] = circ;
        coef_.face_mass[ia][f] = circ * grid_.face_area(a);
        coef_.face_inv_mass[ia][f] = dt_ / coef_.face_mass[ia][f];
      }
    }
    const std::size_t nn = grid_.node_count();
    coef_.node_mass.resize(nn);
    coef_.node_inv_mass.resize(nn);
    for (std::size_t v = 0; v < nn; ++v) {
      coef_.node_mass[v] = mats.chi_node[v] * grid_.node_volume(grid_.node_ijk(v));
      coef_.node_inv_mass[v] = dt_ / coef_.node_mass[v];
    }
    coef_.perp_weight.resize(perp_sites_.size());
    for (std::size_t s = 0; s < perp_sites_.size(); ++s) {
      coef_.perp_weight[s] = -perp_sites_[s].sign * perp_sites_[s].area * mats.eps_perp[s];
    }
    coef_.btan_weight.resize(btan_sites_.size());
    for (std::size_t s = 0; s < btan_sites_.size(); ++s) {
      coef_.btan_weight[s] = btan_sites_[s].sign * btan_sites_[s].area * mats.mu_inv_btan[s];
    }
  }

  const GridIndex& grid() const { return grid_; }
  double dt() const { return dt_; }
  long step_index() const { return state_.step; }
  const VectorState& state() const { return state_; }
  const VectorCoefficients& coefficients() const { return coef_; }
  const std::vector<HangingSite>& perp_sites() const { return perp_sites_; }
  const std::vector<HangingSite>& btan_sites() const { return btan_sites_; }

  void set_state(VectorState s) {
    s.check(grid_);
    state_ = std::move(s);
  }

  /// Circulation of dA/dt around the primary face normal to `m` at `p`
  /// (S' times the discrete curl component).
  double face_circulation(Axis m, const Index3& p) const {
    const int ib = (idx(m) + 1) % 3;
    const int ic = (idx(m) + 2) % 3;
    const auto& ab = state_.dA_dt[ib];
    const auto& ac = state_.dA_dt[ic];
    Index3 pb = p;
    pb[ib] += 1;
    Index3 pc = p;
    pc[ic] += 1;
    const Axis b = axis_from(ib);
    const Axis c = axis_from(ic);
    return grid_.h(c) * (ac[grid_.edge_id(c, pb)] - ac[grid_.edge_id(c, p)]) -
           grid_.h(b) * (ab[grid_.edge_id(b, pc)] - ab[grid_.edge_id(b, p)]);
  }

  /// Outward flux of eps*dA/dt from node `p`'s secondary cell through faces
  /// pierced by interior edges.
  double node_flux(const Index3& p) const {
    const auto& n = grid_.cells();
    double sum = 0.0;
    for (Axis a : kAxes) {
      const int ia = idx(a);
      const auto& v = state_.dA_dt[ia];
      const auto& f = coef_.edge_flux[ia];
      if (p[ia] > 0) {
        Index3 q = p;
        q[ia] -= 1;
        const std::size_t e = grid_.edge_id(a, q);
        sum -= f[e] * v[e];
      }
      if (p[ia] < n[ia]) {
        const std::size_t e = grid_.edge_id(a, p);
        sum += f[e] * v[e];
      }
    }
    return sum;
  }

  /// Sum over the secondary-face boundary of the edge along `a` at `p` of
  /// C * mu^-1 * l'' * B over interior secondary edges (C = +/-1 incidence).
  double edge_circulation(Axis a, const Index3& p) const {
    const auto& n = grid_.cells();
    const int ia = idx(a);
    const int i1 = (ia + 1) % 3;
    const int i2 = (ia + 2) % 3;
    double sum = 0.0;
    {  // faces normal to a+1, stacked along a+2
      const auto& b = state_.b[i1];
      const auto& w = coef_.face_circ[i1];
      if (p[i2] > 0) {
        Index3 q = p;
        q[i2] -= 1;
        const std::size_t f = grid_.face_id(axis_from(i1), q);
        sum += w[f] * b[f];
      }
      if (p[i2] < n[i2]) {
        const std::size_t f = grid_.face_id(axis_from(i1), p);
        sum -= w[f] * b[f];
      }
    }
    {  // faces normal to a+2, stacked along a+1
      const auto& b = state_.b[i2];
      const auto& w = coef_.face_circ[i2];
      if (p[i1] > 0) {
        Index3 q = p;
        q[i1] -= 1;
        const std::size_t f = grid_.face_id(axis_from(i2), q);
        sum -= w[f] * b[f];
      }
      if (p[i1] < n[i1]) {
        const std::size_t f = grid_.face_id(axis_from(i2), p);
        sum += w[f] * b[f];
      }
    }
    return sum;
  }

  /// Advances one step; returns dA/dt on tangential-B host edges at
  /// t = (n+1)*dt and kappa at perpendicular host nodes at t = (n+1/2)*dt.
  VectorOutputs step(std::span<const double> u_perp, std::span<const double> u_btan) {
    require_size(u_perp.size(), perp_sites_.size(), "vector step: perpendicular inputs");
    require_size(u_btan.size(), btan_sites_.size(), "vector step: tangential-B inputs");
    require_finite(u_perp, "vector step: perpendicular inputs");
    require_finite(u_btan, "vector step: tangential-B inputs");
    const auto& n = grid_.cells();

    // Phase 1: B from the curl of dA/dt^n.
    for (Axis m : kAxes) {
      const int im = idx(m);
      const Index3 fe = grid_.face_extent(m);
      auto& b = state_.b[im];
#pragma omp parallel for schedule(static)
      for (int i = 0; i < fe[0]; ++i) {
        for (int j = 0; j < fe[1]; ++j) {
          for (int k = 0; k < fe[2]; ++k) {
            const Index3 p{i, j, k};
            const std::size_t f = grid_.face_id(m, p);
            b[f] += coef_.face_inv_mass[im][f] * (coef_.face_circ[im][f] * face_circulation(m, p));
          }
        }
      }
    }

    // Phase 2: kappa from the divergence of eps*dA/dt^n.
    const Index3 ne = grid_.node_extent();
    std::vector<double> next(state_.kappa.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < ne[0]; ++i) {
      for (int j = 0; j < ne[1]; ++j) {
        for (int k = 0; k < ne[2]; ++k) {
          const Index3 p{i, j, k};
          const std::size_t v = grid_.node_id(p);
          double rhs = -node_flux(p);
          for (Axis a : kAxes) {
            const int ia = idx(a);
            if (p[ia] == 0) {
              const std::size_t s = grid_.perp_site_index(make_face(a, false), p);
              rhs += coef_.perp_weight[s] * u_perp[s];
            }
            if (p[ia] == n[ia]) {
              const std::size_t s = grid_.perp_site_index(make_face(a, true), p);
              rhs += coef_.perp_weight[s] * u_perp[s];
            }
          }
          next[v] = state_.kappa[v] + coef_.node_inv_mass[v] * rhs;
        }
      }
    }
    state_.kappa.swap(next);

    // Phase 3: dA/dt from the circulation of mu^-1 B^{n+1/2}, the hanging
    // tangential B, and the gradient of kappa^{n+1/2}.
    for (Axis a : kAxes) {
      const int ia = idx(a);
      const int i1 = (ia + 1) % 3;
      const int i2 = (ia + 2) % 3;
      const Index3 ee = grid_.edge_extent(a);
      auto& ad = state_.dA_dt[ia];
      const auto& kap = state_.kappa;
      const double len = grid_.edge_length(a);
#pragma omp parallel for schedule(static)
      for (int i = 0; i < ee[0]; ++i) {
        for (int j = 0; j < ee[1]; ++j) {
          for (int k = 0; k < ee[2]; ++k) {
            const Index3 tail{i, j, k};
            Index3 head = tail;
            head[ia] += 1;
            const std::size_t e = grid_.edge_id(a, tail);
            double rhs = -len * edge_circulation(a, tail);
            for (int d : {i2, i1}) {
              if (tail[d] == 0) {
                const std::size_t s = grid_.btan_site_index(make_face(axis_from(d), false), a, tail);
                rhs += coef_.btan_weight[s] * u_btan[s];
              }
              if (tail[d] == n[d]) {
                const std::size_t s = grid_.btan_site_index(make_face(axis_from(d), true), a, tail);
                rhs += coef_.btan_weight[s] * u_btan[s];
              }
            }
            rhs += coef_.edge_flux[ia][e] * (kap[grid_.node_id(tail)] - kap[grid_.node_id(head)]);
            ad[e] += coef_.edge_inv_mass[ia][e] * rhs;
          }
        }
      }
    }
    ++state_.step;
    return outputs();
  }

  VectorOutputs step(const VectorInputs& in) { return step(in.perp, in.btan); }

  VectorOutputs outputs() const {
    VectorOutputs y;
    y.tan.resize(btan_sites_.size());
    for (std::size_t s = 0; s < btan_sites_.size(); ++s) {
      y.tan[s] = state_.dA_dt[idx(btan_sites_[s].host_axis)][btan_sites_[s].host];
    }
    y.kappa.resize(perp_sites_.size());
    for (std::size_t s = 0; s < perp_sites_.size(); ++s) {
      y.kappa[s] = state_.kappa[perp_sites_[s].host];
    }
    return y;
  }

 private:
  GridIndex grid_;
  double dt_;
  VectorState state_;
  std::vector<HangingSite> perp_sites_;
  std::vector<HangingSite> btan_sites_;
  VectorCoefficients coef_;
};

inline VectorSim init_vector(const GridIndex& grid, const MaterialMaps& mats, double dt,
                             VectorState state0) {
  return VectorSim(grid, mats, dt, std::move(state0));
}

inline VectorOutputs step_vector(VectorSim& sim, std::span<const double> u_perp,
                                 std::span<const double> u_btan) {
  return sim.step(u_perp, u_btan);
}

inline VectorOutputs vector_outputs(const VectorSim& sim) { return sim.outputs(); }

/// Midpoint-rule integration of A: A + dt * dA/dt. With the simulator at
/// step n (dA/dt at n*dt) this carries A from (n-1/2)dt to (n+1/2)dt.
inline std::array<std::vector<double>, 3> reconstruct_a(
    const VectorSim& sim, const std::array<std::vector<double>, 3>& a_prev) {
  auto a = a_prev;
  for (Axis ax : kAxes) {
    const auto& d = sim.state().dA_dt[idx(ax)];
    require_size(a[idx(ax)].size(), d.size(), "reconstruct_a: a_prev");
    for (std::size_t e = 0; e < d.size(); ++e) a[idx(ax)][e] += sim.dt() * d[e];
  }
  return a;
}

}  // namespace pfdtd
