#include <gtest/gtest.h>

#include "pfdtd/cavity.hpp"
#include "pfdtd/dissipation.hpp"
#include "test_support.hpp"

using namespace pfdtd;

namespace {

const GridSpec kReferenceGrid{90, 30, 30, 0.1 / 90, 0.1 / 30, 0.1 / 30};

}  // namespace

TEST(Cavity, Parameters) {
  const auto m = cavity_params(0.1, 1e-9);
  EXPECT_NEAR(m.kx, 94.2478, 1e-4);
  EXPECT_NEAR(m.ky, 31.4159, 1e-4);
  EXPECT_EQ(m.ky, m.kz);
  EXPECT_NEAR(m.omega, 3.1237e10, 1e6);
  EXPECT_NEAR(m.c_phi, -0.27117, 1e-5);
  // Dispersion relation w = c |k|.
  const double c = 1.0 / std::sqrt(kMu0 * kEps0);
  EXPECT_NEAR(m.omega / (c * std::sqrt(m.kx * m.kx + m.ky * m.ky + m.kz * m.kz)), 1.0, 1e-15);
}

TEST(Cavity, RejectsBadParameters) {
  EXPECT_THROW(cavity_params(0.0, 1e-9), InvalidArgument);
  EXPECT_THROW(cavity_params(0.1, 0.0), InvalidArgument);
  EXPECT_THROW(cavity_params(0.1, 1e-9, {0, 1, 1}), InvalidArgument);
  EXPECT_THROW(parse_cavity_field("E_x"), InvalidArgument);
  EXPECT_EQ(parse_cavity_field("kappa"), CavityField::Kappa);
}

TEST(Cavity, ExactEnergies) {
  const auto m = cavity_params(0.1, 1e-9);
  const auto e = exact_energies(m);
  EXPECT_NEAR(e.e_a, 5.400e-13, 1e-16);
  EXPECT_NEAR(e.e_phi, 4.418e-13, 1e-16);
  EXPECT_NEAR(e.e_phi / e.e_a, 9.0 / 11.0, 1e-15);
}

TEST(Cavity, PhiVanishesOnBoundary) {
  const auto m = cavity_params(0.1, 1e-9);
  const double peak = std::abs(m.c_phi);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  for (int i = 0; i < 50; ++i) {
    const double y = u(rng), z = u(rng), t = u(rng) * 1e-8;
    EXPECT_NEAR(eval_cavity(m, CavityField::Phi, 0.0, y, z, t), 0.0, 1e-14 * peak);
    EXPECT_NEAR(eval_cavity(m, CavityField::Phi, 0.1, y, z, t), 0.0, 1e-14 * peak);
    EXPECT_NEAR(eval_cavity(m, CavityField::Phi, y, 0.1, z, t), 0.0, 1e-14 * peak);
    EXPECT_NEAR(eval_cavity(m, CavityField::Phi, y, z, 0.0, t), 0.0, 1e-14 * peak);
  }
}

TEST(Cavity, DphiDxOnLeftFace) {
  const auto m = cavity_params(0.1, 1e-9);
  const double y = 0.03, z = 0.07, t = 2e-11;
  const double want = m.c_phi * m.kx * std::sin(m.ky * y) * std::sin(m.kz * z) * std::cos(m.omega * t + kPi / 3);
  EXPECT_DOUBLE_EQ(eval_cavity(m, CavityField::DphiDx, 0.0, y, z, t), want);
}

TEST(Cavity, GaugeIdentityKappaEqualsDphiDt) {
  const auto m = cavity_params(0.1, 1e-9);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  const double scale = std::abs(m.c_phi) * m.omega;
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), y = u(rng), z = u(rng), t = u(rng) * 1e-8;
    EXPECT_NEAR(eval_cavity(m, CavityField::Kappa, x, y, z, t),
                eval_cavity(m, CavityField::DphiDt, x, y, z, t), 1e-12 * scale);
  }
}

// Centred differences of the analytic fields satisfy the source-free wave
// equations chi d2phi/dt2 = eps lap(phi), B = curl A, and the Lorenz gauge.
TEST(Cavity, FiniteDifferenceResiduals) {
  const auto m = cavity_params(0.1, 1e-9);
  const double x = 0.013, y = 0.041, z = 0.067, t = 3.3e-11;
  const double hs = 1e-5, ht = 1e-14;
  auto f = [&](CavityField fld, double dx, double dy, double dz, double dt) {
    return eval_cavity(m, fld, x + dx, y + dy, z + dz, t + dt);
  };
  auto d2 = [&](CavityField fld, int axis) {
    double o[3] = {0, 0, 0};
    o[axis] = hs;
    return (f(fld, o[0], o[1], o[2], 0) - 2 * f(fld, 0, 0, 0, 0) + f(fld, -o[0], -o[1], -o[2], 0)) / (hs * hs);
  };
  const double lap = d2(CavityField::Phi, 0) + d2(CavityField::Phi, 1) + d2(CavityField::Phi, 2);
  const double tt = (f(CavityField::Phi, 0, 0, 0, ht) - 2 * f(CavityField::Phi, 0, 0, 0, 0) +
                     f(CavityField::Phi, 0, 0, 0, -ht)) / (ht * ht);
  EXPECT_NEAR(m.chi0 * tt, m.eps0 * lap, 1e-4 * std::abs(m.eps0 * lap));

  // B_y = dA_x/dz, B_z = -dA_x/dy.
  const double dax_dz = (f(CavityField::Ax, 0, 0, hs, 0) - f(CavityField::Ax, 0, 0, -hs, 0)) / (2 * hs);
  const double dax_dy = (f(CavityField::Ax, 0, hs, 0, 0) - f(CavityField::Ax, 0, -hs, 0, 0)) / (2 * hs);
  EXPECT_NEAR(f(CavityField::By, 0, 0, 0, 0), dax_dz, 1e-7 * m.c_a * m.kz);
  EXPECT_NEAR(f(CavityField::Bz, 0, 0, 0, 0), -dax_dy, 1e-7 * m.c_a * m.ky);

  // eps0 div A = -chi0 dphi/dt.
  const double div_a = (f(CavityField::Ax, hs, 0, 0, 0) - f(CavityField::Ax, -hs, 0, 0, 0)) / (2 * hs);
  EXPECT_NEAR(m.eps0 * div_a, -m.chi0 * f(CavityField::DphiDt, 0, 0, 0, 0),
              1e-6 * m.eps0 * m.c_a * m.kx);

  // Time derivative fields.
  const double dphi_dt = (f(CavityField::Phi, 0, 0, 0, ht) - f(CavityField::Phi, 0, 0, 0, -ht)) / (2 * ht);
  EXPECT_NEAR(f(CavityField::DphiDt, 0, 0, 0, 0), dphi_dt, 1e-6 * std::abs(m.c_phi) * m.omega);
  const double dax_dt = (f(CavityField::Ax, 0, 0, 0, ht) - f(CavityField::Ax, 0, 0, 0, -ht)) / (2 * ht);
  EXPECT_NEAR(f(CavityField::DaxDt, 0, 0, 0, 0), dax_dt, 1e-6 * m.c_a * m.omega);
}

TEST(Cavity, InitialStatesMatchExactEnergies) {
  const auto g = build_grid(kReferenceGrid);
  const auto mats = uniform_materials(g, 1, 1);
  const auto m = cavity_params(0.1, 1e-9);
  const double dt = 0.999 * cfl_limit(kReferenceGrid, kEps0, kMu0);
  const auto e = exact_energies(m);
  const ScalarSim ss(g, mats, dt, cavity_scalar_state(g, m, dt));
  const VectorSim vs(g, mats, dt, cavity_vector_state(g, m, dt));
  EXPECT_NEAR(storage_scalar(ss), e.e_phi, 0.03 * e.e_phi);
  EXPECT_NEAR(storage_vector(vs), e.e_a, 0.03 * e.e_a);
}

TEST(Cavity, BoundaryNodesStartAtRest) {
  const auto g = build_grid(pfdtd::testing::cube(12, 0.1 / 12));
  const auto m = cavity_params(0.1, 1e-9);
  const auto s = cavity_scalar_state(g, m, 1e-12);
  const double peak = std::abs(m.c_phi) * m.omega;
  for (const auto& site : g.enumerate_hanging(HangingFamily::ScalarGradPerp)) {
    EXPECT_NEAR(s.dphi_dt[site.host], 0.0, 1e-13 * peak);
  }
}

TEST(Cavity, RejectsMismatchedGrid) {
  const auto g = build_grid(GridSpec{4, 4, 4, 0.01, 0.01, 0.02});
  EXPECT_THROW(cavity_scalar_state(g, cavity_params(0.04, 1e-9), 1e-12), InvalidArgument);
}

TEST(Cavity, ScalarDriveOnLeftFace) {
  const auto g = build_grid(GridSpec{9, 3, 3, 0.1 / 9, 0.1 / 3, 0.1 / 3});
  const auto m = cavity_params(0.1, 1e-9);
  const double dt = 1e-12;
  const long n = 7;
  const auto u = cavity_boundary_drive_scalar(g, m, n, dt);
  for (const auto& s : g.enumerate_hanging(HangingFamily::ScalarGradPerp)) {
    if (s.face != Face::XMinus) continue;
    const Vec3 p = g.node_position(s.p);
    const double want = m.c_phi * m.kx * std::sin(m.ky * p[1]) * std::sin(m.kz * p[2]) *
                        std::cos(m.omega * n * dt + kPi / 3);
    EXPECT_NEAR(u[g.perp_site_index(s.face, s.p)], want, 1e-15 * std::abs(m.c_phi * m.kx));
  }
}

TEST(Cavity, VectorDriveNormalComponentsOnlyOnXFaces) {
  const auto g = build_grid(GridSpec{9, 3, 3, 0.1 / 9, 0.1 / 3, 0.1 / 3});
  const auto m = cavity_params(0.1, 1e-9);
  const auto in = cavity_boundary_drive_vector(g, m, 3, 1e-12);
  const auto sites = g.enumerate_hanging(HangingFamily::ADotPerp);
  bool any_nonzero = false;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    if (face_normal(sites[s].face) != Axis::X) {
      EXPECT_EQ(in.perp[s], 0.0);
    } else {
      any_nonzero = any_nonzero || in.perp[s] != 0.0;
    }
  }
  EXPECT_TRUE(any_nonzero);
  const auto bt = g.enumerate_hanging(HangingFamily::BTan);
  for (std::size_t s = 0; s < bt.size(); ++s) {
    if (bt[s].direction == Axis::X) {
      EXPECT_EQ(in.btan[s], 0.0);
    }
  }
}

TEST(Cavity, KappaTracksAnalyticDphiDt) {
  // Gauge identity in discrete form: kappa follows the analytic dphi/dt.
  const auto g = build_grid(GridSpec{45, 15, 15, 0.1 / 45, 0.1 / 15, 0.1 / 15});
  const auto mats = uniform_materials(g, 1, 1);
  const auto m = cavity_params(0.1, 1e-9);
  const double dt = 0.999 * cfl_limit(g.spec(), kEps0, kMu0);
  VectorSim sim(g, mats, dt, cavity_vector_state(g, m, dt));
  const CavityDrive drive(g, m, dt);
  for (int n = 0; n < 30; ++n) sim.step(drive.vector(sim.step_index()));
  const double t = (sim.step_index() - 0.5) * dt;
  const auto want = sample_nodes(g, m, CavityField::DphiDt, t);
  double err = 0, ref = 0;
  for (std::size_t v = 0; v < want.size(); ++v) {
    err += (sim.state().kappa[v] - want[v]) * (sim.state().kappa[v] - want[v]);
    ref += want[v] * want[v];
  }
  EXPECT_LT(std::sqrt(err / ref), 0.05);
  // Outputs sit on boundary nodes, where dphi/dt vanishes.
  const double peak = std::abs(m.c_phi) * m.omega;
  for (double y : sim.outputs().kappa) EXPECT_LT(std::abs(y), 0.05 * peak);
}
