#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "pfdtd/core.hpp"
#include "pfdtd/grid.hpp"

namespace pfdtd {

/// Coefficients of an isotropic lossless medium sampled where the update
/// equations need them.
///
/// eps_edge    permittivity on primary edges            [axis][edge id]
/// chi_node    chi = mu*eps^2 on primary nodes          [node id]
/// mu_inv_face inverse permeability on secondary edges  [axis][face id]
/// eps_perp    permittivity at perpendicular hanging sites (shared by the
///             scalar and vector families, same ordering)
/// mu_inv_btan inverse permeability at tangential-B hanging sites
struct MaterialMaps {
  std::array<std::vector<double>, 3> eps_edge;
  std::vector<double> chi_node;
  std::array<std::vector<double>, 3> mu_inv_face;
  std::vector<double> eps_perp;
  std::vector<double> mu_inv_btan;
  /// min over cells of sqrt(mu*eps); known when built from cells or uniform.
  std::optional<double> min_sqrt_mu_eps;

  void validate(const GridIndex& g) const {
    auto check = [](std::span<const double> v, std::size_t n, const char* what) {
      require_size(v.size(), n, what);
      for (double x : v) {
        if (!(x > 0.0) || !std::isfinite(x)) {
          throw InvalidArgument(std::string(what) + ": entries must be positive and finite");
        }
      }
    };
    for (Axis a : kAxes) {
      check(eps_edge[idx(a)], g.edge_count(a), "materials: eps_edge");
      check(mu_inv_face[idx(a)], g.face_count(a), "materials: mu_inv_face");
    }
    check(chi_node, g.node_count(), "materials: chi_node");
    check(eps_perp, g.perp_site_count(), "materials: eps_perp");
    check(mu_inv_btan, g.btan_site_count(), "materials: mu_inv_btan");
  }
};

inline MaterialMaps uniform_materials(const GridIndex& g, double eps_r, double mu_r) {
  if (!(eps_r > 0.0) || !(mu_r > 0.0) || !std::isfinite(eps_r) || !std::isfinite(mu_r)) {
    throw InvalidArgument("materials: relative constants must be positive");
  }
  const double eps = eps_r * kEps0;
  const double mu = mu_r * kMu0;
  MaterialMaps m;
  for (Axis a : kAxes) {
    m.eps_edge[idx(a)].assign(g.edge_count(a), eps);
    m.mu_inv_face[idx(a)].assign(g.face_count(a), 1.0 / mu);
  }
  m.chi_node.assign(g.node_count(), mu * eps * eps);
  m.eps_perp.assign(g.perp_site_count(), eps);
  m.mu_inv_btan.assign(g.btan_site_count(), 1.0 / mu);
  m.min_sqrt_mu_eps = std::sqrt(mu * eps);
  return m;
}

namespace detail {

// Mean of cell values over the index box lo..hi (inclusive, clipped to the grid).
// Written as v0 + mean(v - v0) so a constant field averages to itself exactly.
inline double box_mean(const GridIndex& g, std::span<const double> cell, Index3 lo, Index3 hi) {
  const auto& n = g.cells();
  for (int d = 0; d < 3; ++d) {
    lo[d] = std::max(lo[d], 0);
    hi[d] = std::min(hi[d], n[d] - 1);
  }
  const double v0 = cell[g.cell_id(lo[0], lo[1], lo[2])];
  double acc = 0.0;
  int count = 0;
  for (int i = lo[0]; i <= hi[0]; ++i) {
    for (int j = lo[1]; j <= hi[1]; ++j) {
      for (int k = lo[2]; k <= hi[2]; ++k) {
        acc += cell[g.cell_id(i, j, k)] - v0;
        ++count;
      }
    }
  }
  return v0 + acc / count;
}

inline Index3 node_cells_lo(const Index3& p) { return {p[0] - 1, p[1] - 1, p[2] - 1}; }

}  // namespace detail

/// Samples per-cell permittivity and permeability (absolute SI values, cell id
/// order i-major, k fastest) onto edges, nodes, secondary edges and hanging
/// sites by arithmetic averaging over the sharing cells.
inline MaterialMaps materials_from_cells(const GridIndex& g, std::span<const double> cell_eps,
                                         std::span<const double> cell_mu) {
  require_size(cell_eps.size(), g.cell_count(), "materials: cell_eps");
  require_size(cell_mu.size(), g.cell_count(), "materials: cell_mu");
  double min_slowness = INFINITY;
  for (std::size_t c = 0; c < cell_eps.size(); ++c) {
    if (!(cell_eps[c] > 0.0) || !(cell_mu[c] > 0.0) || !std::isfinite(cell_eps[c]) ||
        !std::isfinite(cell_mu[c])) {
      throw InvalidArgument("materials: cell values must be positive and finite");
    }
    min_slowness = std::min(min_slowness, std::sqrt(cell_mu[c] * cell_eps[c]));
  }

  MaterialMaps m;
  for (Axis a : kAxes) {
    const int ia = idx(a);
    auto& eps = m.eps_edge[ia];
    eps.resize(g.edge_count(a));
    for (std::size_t e = 0; e < eps.size(); ++e) {
      const Index3 p = g.edge_ijk(a, e);
      Index3 lo = detail::node_cells_lo(p);
      Index3 hi = p;
      lo[ia] = hi[ia] = p[ia];
      eps[e] = detail::box_mean(g, cell_eps, lo, hi);
    }
    auto& mu_inv = m.mu_inv_face[ia];
    mu_inv.resize(g.face_count(a));
    for (std::size_t f = 0; f < mu_inv.size(); ++f) {
      const Index3 p = g.face_ijk(a, f);
      Index3 lo = p;
      Index3 hi = p;
      lo[ia] = p[ia] - 1;
      mu_inv[f] = 1.0 / detail::box_mean(g, cell_mu, lo, hi);
    }
  }

  m.chi_node.resize(g.node_count());
  for (std::size_t v = 0; v < m.chi_node.size(); ++v) {
    const Index3 p = g.node_ijk(v);
    const double eps = detail::box_mean(g, cell_eps, detail::node_cells_lo(p), p);
    const double mu = detail::box_mean(g, cell_mu, detail::node_cells_lo(p), p);
    m.chi_node[v] = mu * eps * eps;
  }

  // A boundary node's incident cells are exactly the boundary cells around it.
  const auto perp = g.enumerate_hanging(HangingFamily::ScalarGradPerp);
  m.eps_perp.resize(perp.size());
  for (std::size_t s = 0; s < perp.size(); ++s) {
    m.eps_perp[s] = detail::box_mean(g, cell_eps, detail::node_cells_lo(perp[s].p), perp[s].p);
  }
  const auto btan = g.enumerate_hanging(HangingFamily::BTan);
  m.mu_inv_btan.resize(btan.size());
  for (std::size_t s = 0; s < btan.size(); ++s) {
    const Index3& p = btan[s].p;
    const int ia = idx(btan[s].host_axis);
    Index3 lo = detail::node_cells_lo(p);
    Index3 hi = p;
    lo[ia] = hi[ia] = p[ia];
    m.mu_inv_btan[s] = 1.0 / detail::box_mean(g, cell_mu, lo, hi);
  }
  m.min_sqrt_mu_eps = min_slowness;
  return m;
}

}  // namespace pfdtd
