#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pfdtd/core.hpp"
#include "pfdtd/grid.hpp"
#include "pfdtd/scalar_solver.hpp"
#include "pfdtd/vector_solver.hpp"

namespace pfdtd {

/// Standing-wave solution in a vacuum-filled cube [0,a]^3:
///   phi = C_phi sin(kx x) sin(ky y) sin(kz z) cos(w t + phase)
///   A   = C_A   cos(kx x) sin(ky y) sin(kz z) sin(w t + phase) x^
/// with k = pi*(mx,my,mz)/a, w = sqrt(eps0/chi0)|k|, C_phi = -C_A eps0 kx/(chi0 w).
struct CavityMode {
  double a = 0.1;
  std::array<int, 3> modes{3, 1, 1};
  double kx = 0, ky = 0, kz = 0;
  double omega = 0;
  double c_a = 1e-9;
  double c_phi = 0;
  double phase = kPi / 3.0;
  double eps0 = kEps0;
  double mu0 = kMu0;
  double chi0 = kMu0 * kEps0 * kEps0;

  double period() const { return 2.0 * kPi / omega; }
};

inline CavityMode cavity_params(double a, double c_a, std::array<int, 3> modes = {3, 1, 1}) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("cavity: side length must be positive");
  if (c_a == 0.0 || !std::isfinite(c_a)) throw InvalidArgument("cavity: C_A must be finite and nonzero");
  for (int m : modes) {
    if (m < 1) throw InvalidArgument("cavity: mode integers must be >= 1");
  }
  CavityMode m;
  m.a = a;
  m.modes = modes;
  m.c_a = c_a;
  m.kx = modes[0] * kPi / a;
  m.ky = modes[1] * kPi / a;
  m.kz = modes[2] * kPi / a;
  m.omega = std::sqrt(m.eps0 / m.chi0 * (m.kx * m.kx + m.ky * m.ky + m.kz * m.kz));
  m.c_phi = -c_a * m.eps0 * m.kx / (m.chi0 * m.omega);
  return m;
}

enum class CavityField { Phi, DphiDt, DphiDx, DphiDy, DphiDz, Ax, DaxDt, By, Bz, Kappa };

inline CavityField parse_cavity_field(const std::string& s) {
  static const std::array<std::pair<const char*, CavityField>, 10> names{{
      {"phi", CavityField::Phi},       {"dphi_dt", CavityField::DphiDt},
      {"dphi_dx", CavityField::DphiDx}, {"dphi_dy", CavityField::DphiDy},
      {"dphi_dz", CavityField::DphiDz}, {"A_x", CavityField::Ax},
      {"dAx_dt", CavityField::DaxDt},   {"B_y", CavityField::By},
      {"B_z", CavityField::Bz},         {"kappa", CavityField::Kappa},
  }};
  for (const auto& [name, f] : names) {
    if (s == name) return f;
  }
  throw InvalidArgument("cavity: unknown field '" + s + "'");
}

inline double eval_cavity(const CavityMode& m, CavityField field, double x, double y, double z,
                          double t) {
  const double sx = std::sin(m.kx * x), cx = std::cos(m.kx * x);
  const double sy = std::sin(m.ky * y), cy = std::cos(m.ky * y);
  const double sz = std::sin(m.kz * z), cz = std::cos(m.kz * z);
  const double th = m.omega * t + m.phase;
  const double st = std::sin(th), ct = std::cos(th);
  switch (field) {
    case CavityField::Phi: return m.c_phi * sx * sy * sz * ct;
    case CavityField::DphiDt: return -m.c_phi * m.omega * sx * sy * sz * st;
    case CavityField::DphiDx: return m.c_phi * m.kx * cx * sy * sz * ct;
    case CavityField::DphiDy: return m.c_phi * m.ky * sx * cy * sz * ct;
    case CavityField::DphiDz: return m.c_phi * m.kz * sx * sy * cz * ct;
    case CavityField::Ax: return m.c_a * cx * sy * sz * st;
    case CavityField::DaxDt: return m.c_a * m.omega * cx * sy * sz * ct;
    case CavityField::By: return m.c_a * m.kz * cx * sy * cz * st;
    case CavityField::Bz: return -m.c_a * m.ky * cx * cy * sz * st;
    case CavityField::Kappa: return m.eps0 / m.chi0 * m.c_a * m.kx * sx * sy * sz * st;
  }
  throw InvalidArgument("cavity: unknown field");
}

inline double eval_cavity(const CavityMode& m, CavityField field, const Vec3& p, double t) {
  return eval_cavity(m, field, p[0], p[1], p[2], t);
}

struct CavityEnergies {
  double e_phi = 0;
  double e_a = 0;
};

inline CavityEnergies exact_energies(const CavityMode& m) {
  const double a3 = m.a * m.a * m.a;
  const double w2 = m.omega * m.omega;
  return {m.chi0 * m.c_phi * m.c_phi * w2 * a3 / 16.0, m.eps0 * m.c_a * m.c_a * w2 * a3 / 16.0};
}

namespace detail {

inline void require_cavity_extent(const GridIndex& g, const CavityMode& m) {
  const Vec3 ext = g.spec().extent();
  for (double e : ext) {
    if (std::abs(e - m.a) > 1e-12 * m.a) {
      throw InvalidArgument("cavity: grid extent does not match the cavity side length");
    }
  }
}

inline CavityField grad_component(Axis a) {
  switch (a) {
    case Axis::X: return CavityField::DphiDx;
    case Axis::Y: return CavityField::DphiDy;
    case Axis::Z: return CavityField::DphiDz;
  }
  return CavityField::DphiDx;
}

}  // namespace detail

/// grad_phi sampled at t=0, dphi_dt at t=-dt/2.
inline ScalarState cavity_scalar_state(const GridIndex& g, const CavityMode& m, double dt) {
  detail::require_cavity_extent(g, m);
  ScalarState s = ScalarState::zeros(g);
  for (Axis a : kAxes) {
    auto& v = s.grad_phi[idx(a)];
    for (std::size_t e = 0; e < v.size(); ++e) {
      v[e] = eval_cavity(m, detail::grad_component(a), g.edge_midpoint(a, g.edge_ijk(a, e)), 0.0);
    }
  }
  for (std::size_t v = 0; v < s.dphi_dt.size(); ++v) {
    s.dphi_dt[v] = eval_cavity(m, CavityField::DphiDt, g.node_position(g.node_ijk(v)), -0.5 * dt);
  }
  return s;
}

/// dA/dt sampled at t=0; B and kappa at t=-dt/2.
inline VectorState cavity_vector_state(const GridIndex& g, const CavityMode& m, double dt) {
  detail::require_cavity_extent(g, m);
  VectorState s = VectorState::zeros(g);
  auto& ax = s.dA_dt[0];
  for (std::size_t e = 0; e < ax.size(); ++e) {
    ax[e] = eval_cavity(m, CavityField::DaxDt, g.edge_midpoint(Axis::X, g.edge_ijk(Axis::X, e)), 0.0);
  }
  const double th = -0.5 * dt;
  auto& by = s.b[1];
  for (std::size_t f = 0; f < by.size(); ++f) {
    by[f] = eval_cavity(m, CavityField::By, g.face_center(Axis::Y, g.face_ijk(Axis::Y, f)), th);
  }
  auto& bz = s.b[2];
  for (std::size_t f = 0; f < bz.size(); ++f) {
    bz[f] = eval_cavity(m, CavityField::Bz, g.face_center(Axis::Z, g.face_ijk(Axis::Z, f)), th);
  }
  for (std::size_t v = 0; v < s.kappa.size(); ++v) {
    s.kappa[v] = eval_cavity(m, CavityField::Kappa, g.node_position(g.node_ijk(v)), th);
  }
  return s;
}

/// Exact boundary inputs of the cavity mode. Perpendicular samples are taken
/// at t = n*dt at the host node; tangential B at t = (n+1/2)*dt at the host
/// edge midpoint.
class CavityDrive {
 public:
  CavityDrive(const GridIndex& g, const CavityMode& m, double dt) : mode_(m), dt_(dt) {
    detail::require_cavity_extent(g, m);
    for (const auto& s : g.enumerate_hanging(HangingFamily::ScalarGradPerp)) {
      perp_.push_back({g.node_position(s.p), s.direction});
    }
    for (const auto& s : g.enumerate_hanging(HangingFamily::BTan)) {
      btan_.push_back({g.edge_midpoint(s.host_axis, s.p), s.direction});
    }
  }

  std::vector<double> scalar(long n) const {
    const double t = n * dt_;
    std::vector<double> u(perp_.size());
    for (std::size_t s = 0; s < perp_.size(); ++s) {
      u[s] = eval_cavity(mode_, detail::grad_component(perp_[s].axis), perp_[s].x, t);
    }
    return u;
  }

  VectorInputs vector(long n) const {
    VectorInputs in;
    const double t = n * dt_;
    in.perp.resize(perp_.size());
    for (std::size_t s = 0; s < perp_.size(); ++s) {
      // A has only an x component.
      in.perp[s] = perp_[s].axis == Axis::X ? eval_cavity(mode_, CavityField::DaxDt, perp_[s].x, t) : 0.0;
    }
    const double th = (n + 0.5) * dt_;
    in.btan.resize(btan_.size());
    for (std::size_t s = 0; s < btan_.size(); ++s) {
      switch (btan_[s].axis) {
        case Axis::X: in.btan[s] = 0.0; break;
        case Axis::Y: in.btan[s] = eval_cavity(mode_, CavityField::By, btan_[s].x, th); break;
        case Axis::Z: in.btan[s] = eval_cavity(mode_, CavityField::Bz, btan_[s].x, th); break;
      }
    }
    return in;
  }

 private:
  struct Sample {
    Vec3 x;
    Axis axis;
  };
  CavityMode mode_;
  double dt_;
  std::vector<Sample> perp_;
  std::vector<Sample> btan_;
};

inline std::vector<double> cavity_boundary_drive_scalar(const GridIndex& g, const CavityMode& m,
                                                        long n, double dt) {
  return CavityDrive(g, m, dt).scalar(n);
}

inline VectorInputs cavity_boundary_drive_vector(const GridIndex& g, const CavityMode& m, long n,
                                                 double dt) {
  return CavityDrive(g, m, dt).vector(n);
}

/// Analytic field on all nodes at time t.
inline std::vector<double> sample_nodes(const GridIndex& g, const CavityMode& m, CavityField f,
                                        double t) {
  std::vector<double> out(g.node_count());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = eval_cavity(m, f, g.node_position(g.node_ijk(v)), t);
  return out;
}

/// Analytic field on the midpoints of primary edges along `a` at time t.
inline std::vector<double> sample_edges(const GridIndex& g, const CavityMode& m, Axis a,
                                        CavityField f, double t) {
  std::vector<double> out(g.edge_count(a));
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = eval_cavity(m, f, g.edge_midpoint(a, g.edge_ijk(a, e)), t);
  return out;
}

}  // namespace pfdtd
