#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "pfdtd/core.hpp"
#include "pfdtd/grid.hpp"
#include "pfdtd/materials.hpp"
#include "pfdtd/scalar_solver.hpp"
#include "pfdtd/vector_solver.hpp"

namespace pfdtd {

enum class SystemKind { Scalar, Vector };

inline const char* system_name(SystemKind k) { return k == SystemKind::Scalar ? "scalar" : "vector"; }

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Generalized state-space form
///   (R + F) x+ = (R - F) x- + B u,   y = L^T x,   B = L S
/// of one leapfrog step. Scalar state ordering: [grad_phi x|y|z, dphi_dt];
/// vector: [dA_dt x|y|z, b x|y|z, kappa]. Vector inputs: [perp sites, bTan sites].
struct SystemMatrices {
  SystemKind which = SystemKind::Scalar;
  double dt = 0.0;
  SparseMatrix R, F, B, L;
  Eigen::VectorXd S;
  std::size_t first_block = 0;  // size of the integer-time block

  Eigen::Index state_size() const { return R.rows(); }
  Eigen::Index input_size() const { return B.cols(); }
};

/// Upper bound on assembled state size.
inline constexpr std::size_t kMaxAssembledState = 200000;
/// Upper bound for dense factorizations and eigen-decompositions.
inline constexpr Eigen::Index kMaxDenseState = 12000;

namespace detail {

struct Offsets {
  std::array<std::size_t, 3> edge{};
  std::array<std::size_t, 3> face{};
  std::size_t node = 0;
  std::size_t total = 0;
};

inline Offsets scalar_offsets(const GridIndex& g) {
  Offsets o;
  std::size_t at = 0;
  for (Axis a : kAxes) {
    o.edge[idx(a)] = at;
    at += g.edge_count(a);
  }
  o.node = at;
  o.total = at + g.node_count();
  return o;
}

inline Offsets vector_offsets(const GridIndex& g) {
  Offsets o;
  std::size_t at = 0;
  for (Axis a : kAxes) {
    o.edge[idx(a)] = at;
    at += g.edge_count(a);
  }
  for (Axis a : kAxes) {
    o.face[idx(a)] = at;
    at += g.face_count(a);
  }
  o.node = at;
  o.total = at + g.node_count();
  return o;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

// Adds a second-block/first-block coupling r21 at (row, col): R gets it at both
// (row,col) and (col,row), F gets +r21 at (col,row) and -r21 at (row,col).
inline void add_coupling(Triplets& r, Triplets& f, std::size_t row, std::size_t col, double r21) {
  const auto ir = static_cast<Eigen::Index>(row);
  const auto ic = static_cast<Eigen::Index>(col);
  r.emplace_back(ir, ic, r21);
  r.emplace_back(ic, ir, r21);
  f.emplace_back(ic, ir, r21);
  f.emplace_back(ir, ic, -r21);
}

inline SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace detail

inline SystemMatrices assemble_system(const GridIndex& g, const MaterialMaps& mats, double dt,
                                      SystemKind which) {
  const auto off = which == SystemKind::Scalar ? detail::scalar_offsets(g) : detail::vector_offsets(g);
  if (off.total > kMaxAssembledState) {
    throw InvalidArgument("assemble: state dimension " + std::to_string(off.total) +
                          " exceeds the assembly limit");
  }
  SystemMatrices sys;
  sys.which = which;
  sys.dt = dt;
  const auto n = static_cast<Eigen::Index>(off.total);
  detail::Triplets r, f, b, l;

  // R11, R22 (nodes) and the node/edge divergence coupling, shared by both
  // systems. Coefficients come straight from the grid weights and materials.
  auto add_edges_and_nodes = [&](double div_sign) {
    for (Axis a : kAxes) {
      const int ia = idx(a);
      const Index3 ee = g.edge_extent(a);
      for (std::size_t e = 0; e < g.edge_count(a); ++e) {
        const auto row = off.edge[ia] + e;
        const Index3 tail = GridIndex::unflat(ee, e);
        const double flux = mats.eps_edge[ia][e] * g.edge_dual_area(a, tail);
        r.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(row),
                       flux * g.edge_length(a) / dt);
        Index3 head = tail;
        head[ia] += 1;
        detail::add_coupling(r, f, off.node + g.node_id(tail), row, div_sign * 0.5 * flux);
        detail::add_coupling(r, f, off.node + g.node_id(head), row, -div_sign * 0.5 * flux);
      }
    }
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      const auto row = static_cast<Eigen::Index>(off.node + v);
      r.emplace_back(row, row, mats.chi_node[v] * g.node_volume(g.node_ijk(v)) / dt);
    }
  };

  mats.validate(g);
  const auto perp = g.enumerate_hanging(HangingFamily::ScalarGradPerp);
  if (which == SystemKind::Scalar) {
    add_edges_and_nodes(1.0);
    sys.S.resize(static_cast<Eigen::Index>(perp.size()));
    for (std::size_t s = 0; s < perp.size(); ++s) {
      const auto row = static_cast<Eigen::Index>(off.node + perp[s].host);
      const auto col = static_cast<Eigen::Index>(s);
      const double w = perp[s].sign * perp[s].area * mats.eps_perp[s];
      l.emplace_back(row, col, 1.0);
      b.emplace_back(row, col, w);
      sys.S[col] = w;
    }
    sys.first_block = off.node;
  } else {
    add_edges_and_nodes(-1.0);
    // Faces: R22 diagonal and the curl coupling (mu^-1 l'' times the face
    // circulation coefficients of its four edges).
    for (Axis m : kAxes) {
      const int im = idx(m);
      const int ib = (im + 1) % 3;
      const int ic = (im + 2) % 3;
      const Axis bx = axis_from(ib);
      const Axis cx = axis_from(ic);
      const Index3 fe = g.face_extent(m);
      for (std::size_t fi = 0; fi < g.face_count(m); ++fi) {
        const auto row = off.face[im] + fi;
        const Index3 p = GridIndex::unflat(fe, fi);
        const double circ = mats.mu_inv_face[im][fi] * g.face_dual_length(m, p);
        r.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(row),
                       circ * g.face_area(m) / dt);
        Index3 pb = p;
        pb[ib] += 1;
        Index3 pc = p;
        pc[ic] += 1;
        const double w = 0.5 * circ;
        detail::add_coupling(r, f, row, off.edge[ic] + g.edge_id(cx, pb), w * g.h(cx));
        detail::add_coupling(r, f, row, off.edge[ic] + g.edge_id(cx, p), -w * g.h(cx));
        detail::add_coupling(r, f, row, off.edge[ib] + g.edge_id(bx, pc), -w * g.h(bx));
        detail::add_coupling(r, f, row, off.edge[ib] + g.edge_id(bx, p), w * g.h(bx));
      }
    }
    const auto btan = g.enumerate_hanging(HangingFamily::BTan);
    sys.S.resize(static_cast<Eigen::Index>(perp.size() + btan.size()));
    for (std::size_t s = 0; s < perp.size(); ++s) {
      const auto row = static_cast<Eigen::Index>(off.node + perp[s].host);
      const auto col = static_cast<Eigen::Index>(s);
      // Minus sign: kappa is driven by -div(eps dA/dt).
      const double w = -perp[s].sign * perp[s].area * mats.eps_perp[s];
      l.emplace_back(row, col, 1.0);
      b.emplace_back(row, col, w);
      sys.S[col] = w;
    }
    for (std::size_t s = 0; s < btan.size(); ++s) {
      const auto row = static_cast<Eigen::Index>(off.edge[idx(btan[s].host_axis)] + btan[s].host);
      const auto col = static_cast<Eigen::Index>(perp.size() + s);
      const double w = btan[s].sign * btan[s].area * mats.mu_inv_btan[s];
      l.emplace_back(row, col, 1.0);
      b.emplace_back(row, col, w);
      sys.S[col] = w;
    }
    sys.first_block = off.face[0];
  }
  const auto ni = sys.S.size();
  sys.R = detail::from_triplets(n, n, r);
  sys.F = detail::from_triplets(n, n, f);
  sys.B = detail::from_triplets(n, ni, b);
  sys.L = detail::from_triplets(n, ni, l);
  return sys;
}

// ---- state packing -------------------------------------------------------------

inline Eigen::VectorXd pack_state(const ScalarState& s) {
  std::size_t n = s.dphi_dt.size();
  for (const auto& v : s.grad_phi) n += v.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  Eigen::Index at = 0;
  for (const auto& v : s.grad_phi) for (double d : v) x[at++] = d;
  for (double d : s.dphi_dt) x[at++] = d;
  return x;
}

inline Eigen::VectorXd pack_state(const VectorState& s) {
  std::size_t n = s.kappa.size();
  for (const auto& v : s.dA_dt) n += v.size();
  for (const auto& v : s.b) n += v.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  Eigen::Index at = 0;
  for (const auto& v : s.dA_dt) for (double d : v) x[at++] = d;
  for (const auto& v : s.b) for (double d : v) x[at++] = d;
  for (double d : s.kappa) x[at++] = d;
  return x;
}

inline ScalarState unpack_scalar(const GridIndex& g, const Eigen::VectorXd& x) {
  ScalarState s = ScalarState::zeros(g);
  require_size(static_cast<std::size_t>(x.size()), detail::scalar_offsets(g).total, "unpack_scalar");
  Eigen::Index at = 0;
  for (auto& v : s.grad_phi) for (double& d : v) d = x[at++];
  for (double& d : s.dphi_dt) d = x[at++];
  return s;
}

inline VectorState unpack_vector(const GridIndex& g, const Eigen::VectorXd& x) {
  VectorState s = VectorState::zeros(g);
  require_size(static_cast<std::size_t>(x.size()), detail::vector_offsets(g).total, "unpack_vector");
  Eigen::Index at = 0;
  for (auto& v : s.dA_dt) for (double& d : v) d = x[at++];
  for (auto& v : s.b) for (double& d : v) d = x[at++];
  for (double& d : s.kappa) d = x[at++];
  return s;
}

inline Eigen::VectorXd pack_inputs(const VectorInputs& in) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(in.perp.size() + in.btan.size()));
  Eigen::Index at = 0;
  for (double d : in.perp) u[at++] = d;
  for (double d : in.btan) u[at++] = d;
  return u;
}

// ---- dense implicit-step oracle --------------------------------------------------

/// Solves (R + F) x+ = (R - F) x- + B u by dense LU on the diagonally scaled
/// system. Independent of the explicit stencil ordering used by the simulators.
class DenseOracle {
 public:
  explicit DenseOracle(const SystemMatrices& sys) {
    const Eigen::Index n = sys.state_size();
    if (n > kMaxDenseState) throw InvalidArgument("dense oracle: state too large");
    scale_ = Eigen::VectorXd(sys.R.diagonal()).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd rd(sys.R);
    const Eigen::MatrixXd fd(sys.F);
    lhs_scaled_ = scale_.asDiagonal() * (rd + fd) * scale_.asDiagonal();
    rhs_state_ = rd - fd;
    b_ = Eigen::MatrixXd(sys.B);
    lu_.compute(lhs_scaled_);
    if (!(lu_.rcond() > 1e-13)) throw NumericError("dense oracle: (R + F) is singular");
  }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    require_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(rhs_state_.rows()),
                 "dense oracle: state");
    require_size(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(b_.cols()),
                 "dense oracle: inputs");
    const Eigen::VectorXd rhs = rhs_state_ * x + b_ * u;
    const Eigen::VectorXd y = lu_.solve(scale_.asDiagonal() * rhs);
    return scale_.asDiagonal() * y;
  }

  Eigen::VectorXd outputs(const SystemMatrices& sys, const Eigen::VectorXd& x) const {
    return sys.L.transpose() * x;
  }

 private:
  Eigen::VectorXd scale_;
  Eigen::MatrixXd lhs_scaled_;
  Eigen::MatrixXd rhs_state_;
  Eigen::MatrixXd b_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

inline Eigen::VectorXd dense_oracle_step(const SystemMatrices& sys, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u) {
  return DenseOracle(sys).step(x, u);
}

/// (dt/2) x^T R x with the assembled R.
inline double storage_assembled(const SystemMatrices& sys, const Eigen::VectorXd& x) {
  return 0.5 * sys.dt * x.dot(sys.R * x);
}

// ---- positive definiteness -------------------------------------------------------

enum class PdMethod { DenseEigen, Factorization };

struct PdResult {
  bool positive_definite = false;
  /// DenseEigen: smallest eigenvalue of the Jacobi-scaled R.
  /// Factorization: smallest diagonal of the Cholesky factor of the shifted,
  /// scaled R (NaN when the factorization breaks down).
  double smallest_estimate = 0.0;
};

inline constexpr double kPdTolerance = 1e-12;

/// Definiteness of symmetric R. The test runs on D^-1/2 R D^-1/2 with
/// D = diag(R) (a congruence, so the inertia is unchanged); R's blocks carry
/// very different physical units and the raw spectrum would bury the sign of
/// the smallest eigenvalue under the tolerance.
inline PdResult check_positive_definite(const SparseMatrix& r, PdMethod method) {
  if (r.rows() != r.cols()) throw InvalidArgument("pd check: matrix is not square");
  const SparseMatrix rt = r.transpose();
  const double asym = SparseMatrix(r - rt).coeffs().cwiseAbs().maxCoeff();
  const double rmax = r.coeffs().cwiseAbs().maxCoeff();
  if (asym > 1e-12 * rmax) throw InvalidArgument("pd check: matrix is not symmetric");

  const Eigen::VectorXd d = r.diagonal();
  if ((d.array() <= 0.0).any()) return {false, d.minCoeff()};
  const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
  const SparseMatrix scaled = s.asDiagonal() * r * s.asDiagonal();

  PdResult out;
  if (method == PdMethod::DenseEigen) {
    if (r.rows() > kMaxDenseState) throw InvalidArgument("pd check: state too large for dense eigen");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(scaled), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("pd check: eigen-decomposition failed");
    const auto& ev = es.eigenvalues();
    const double norm = std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
    out.smallest_estimate = ev[0];
    out.positive_definite = ev[0] > -kPdTolerance * norm;
  } else {
    // Gershgorin bound on the scaled norm sets the shift.
    double norm = 0.0;
    for (Eigen::Index c = 0; c < scaled.outerSize(); ++c) {
      double row = 0.0;
      for (SparseMatrix::InnerIterator it(scaled, c); it; ++it) row += std::abs(it.value());
      norm = std::max(norm, row);
    }
    SparseMatrix shifted = scaled;
    for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) += kPdTolerance * norm;
    Eigen::SimplicialLLT<SparseMatrix> llt(shifted);
    out.positive_definite = llt.info() == Eigen::Success;
    if (out.positive_definite) {
      const SparseMatrix lm = llt.matrixL();
      out.smallest_estimate = lm.diagonal().minCoeff();
    } else {
      out.smallest_estimate = std::nan("");
    }
  }
  return out;
}

inline PdResult check_positive_definite(const SystemMatrices& sys, PdMethod method) {
  return check_positive_definite(sys.R, method);
}

// ---- triplet dump ----------------------------------------------------------------

/// Writes "# name rows cols nnz" followed by one "row col value" line per
/// stored entry (0-based, 17 significant digits).
inline void write_triplets(std::ostream& os, const std::string& name, const SparseMatrix& m) {
  os << "# " << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  char buf[64];
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      os << it.row() << ' ' << it.col() << ' ' << buf << '\n';
    }
  }
}

inline void write_system_triplets(std::ostream& os, const SystemMatrices& sys) {
  write_triplets(os, "R", sys.R);
  write_triplets(os, "F", sys.F);
  write_triplets(os, "B", sys.B);
  write_triplets(os, "L", sys.L);
  SparseMatrix s(sys.S.size(), sys.S.size());
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < sys.S.size(); ++i) t.emplace_back(i, i, sys.S[i]);
  s.setFromTriplets(t.begin(), t.end());
  write_triplets(os, "S", s);
}

}  // namespace pfdtd
