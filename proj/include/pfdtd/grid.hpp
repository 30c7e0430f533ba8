#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pfdtd/core.hpp"

namespace pfdtd {

/// Box of nx*ny*nz primary cells with uniform spacing.
struct GridSpec {
  int nx = 1, ny = 1, nz = 1;
  double dx = 1.0, dy = 1.0, dz = 1.0;

  std::array<int, 3> cells() const { return {nx, ny, nz}; }
  Vec3 spacing() const { return {dx, dy, dz}; }
  Vec3 extent() const { return {nx * dx, ny * dy, nz * dz}; }

  void validate() const {
    if (nx < 1 || ny < 1 || nz < 1) {
      throw InvalidArgument("grid: cell counts must be >= 1");
    }
    if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0) || !std::isfinite(dx) ||
        !std::isfinite(dy) || !std::isfinite(dz)) {
      throw InvalidArgument("grid: cell sizes must be positive and finite");
    }
  }
};

enum class EntityKind { Node, Edge, Face };

/// A grid entity: node, primary edge along `axis`, or primary face normal to `axis`.
/// Primary faces double as secondary edges.
struct Entity {
  EntityKind kind = EntityKind::Node;
  Axis axis = Axis::X;
  Index3 p{0, 0, 0};
};

enum class HangingFamily { ScalarGradPerp, ADotPerp, BTan };

/// One boundary input sample.
///
/// Perpendicular families hang off a boundary node along the face normal; the
/// tangential-B family hangs off a primary edge lying in the face and carries
/// the B component along the remaining axis. `sign` and `area` make up the
/// diagonal input weight together with the material coefficient.
struct HangingSite {
  HangingFamily family = HangingFamily::ScalarGradPerp;
  Face face = Face::XMinus;
  std::size_t host = 0;   // node id (perp) or edge id along host_axis (bTan)
  Axis host_axis = Axis::X;
  Axis direction = Axis::X;
  int sign = 1;
  double area = 0.0;
  Index3 p{0, 0, 0};
};

class GridIndex {
 public:
  explicit GridIndex(const GridSpec& spec) : spec_(spec) {
    spec_.validate();
    n_ = spec_.cells();
    h_ = spec_.spacing();
    std::size_t perp = 0;
    std::size_t btan = 0;
    for (Face f : kFaces) {
      perp_base_[static_cast<int>(f)] = perp;
      perp += perp_sites_on_face(f);
      const Axis nrm = face_normal(f);
      for (Axis a : kAxes) {
        if (a == nrm) continue;
        btan_base_[static_cast<int>(f)][idx(a)] = btan;
        btan += btan_sites_on_face(f, a);
      }
    }
    perp_count_ = perp;
    btan_count_ = btan;
  }

  const GridSpec& spec() const { return spec_; }
  const std::array<int, 3>& cells() const { return n_; }
  const Vec3& spacing() const { return h_; }
  double h(Axis a) const { return h_[idx(a)]; }
  int n(Axis a) const { return n_[idx(a)]; }

  // ---- extents and counts --------------------------------------------------

  Index3 node_extent() const { return {n_[0] + 1, n_[1] + 1, n_[2] + 1}; }
  Index3 edge_extent(Axis a) const {
    Index3 e = node_extent();
    e[idx(a)] = n_[idx(a)];
    return e;
  }
  Index3 face_extent(Axis a) const {
    Index3 e = n_;
    e[idx(a)] = n_[idx(a)] + 1;
    return e;
  }
  Index3 extent(const Entity& e) const {
    switch (e.kind) {
      case EntityKind::Node: return node_extent();
      case EntityKind::Edge: return edge_extent(e.axis);
      case EntityKind::Face: return face_extent(e.axis);
    }
    return {};
  }

  static std::size_t volume(const Index3& e) {
    return static_cast<std::size_t>(e[0]) * static_cast<std::size_t>(e[1]) *
           static_cast<std::size_t>(e[2]);
  }
  std::size_t node_count() const { return volume(node_extent()); }
  std::size_t edge_count(Axis a) const { return volume(edge_extent(a)); }
  std::size_t face_count(Axis a) const { return volume(face_extent(a)); }
  std::size_t edge_count() const {
    return edge_count(Axis::X) + edge_count(Axis::Y) + edge_count(Axis::Z);
  }
  std::size_t face_count() const {
    return face_count(Axis::X) + face_count(Axis::Y) + face_count(Axis::Z);
  }
  std::size_t cell_count() const { return volume(n_); }

  // ---- index maps (k fastest) ----------------------------------------------

  static std::size_t flat(const Index3& ext, int i, int j, int k) {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(ext[1]) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(ext[2]) +
           static_cast<std::size_t>(k);
  }
  static Index3 unflat(const Index3& ext, std::size_t id) {
    const auto k = static_cast<int>(id % static_cast<std::size_t>(ext[2]));
    id /= static_cast<std::size_t>(ext[2]);
    const auto j = static_cast<int>(id % static_cast<std::size_t>(ext[1]));
    const auto i = static_cast<int>(id / static_cast<std::size_t>(ext[1]));
    return {i, j, k};
  }

  std::size_t node_id(int i, int j, int k) const { return flat(node_extent(), i, j, k); }
  std::size_t node_id(const Index3& p) const { return node_id(p[0], p[1], p[2]); }
  std::size_t edge_id(Axis a, const Index3& p) const {
    return flat(edge_extent(a), p[0], p[1], p[2]);
  }
  std::size_t face_id(Axis a, const Index3& p) const {
    return flat(face_extent(a), p[0], p[1], p[2]);
  }
  std::size_t cell_id(int i, int j, int k) const { return flat(n_, i, j, k); }

  Index3 node_ijk(std::size_t id) const { return unflat(node_extent(), id); }
  Index3 cell_ijk(std::size_t id) const { return unflat(n_, id); }
  Index3 edge_ijk(Axis a, std::size_t id) const { return unflat(edge_extent(a), id); }
  Index3 face_ijk(Axis a, std::size_t id) const { return unflat(face_extent(a), id); }

  std::size_t id(const Entity& e) const {
    check(e);
    return flat(extent(e), e.p[0], e.p[1], e.p[2]);
  }

  bool contains(const Entity& e) const {
    const Index3 ext = extent(e);
    for (int d = 0; d < 3; ++d) {
      if (e.p[d] < 0 || e.p[d] >= ext[d]) return false;
    }
    return true;
  }

  void check(const Entity& e) const {
    if (!contains(e)) throw InvalidArgument("grid: entity index out of range");
  }

  // ---- dual weights ----------------------------------------------------------

  /// Secondary-grid length along `a` associated with node coordinate `i`;
  /// halved where the secondary cell is cut by the boundary.
  double dual_length(Axis a, int i) const {
    const double full = h_[idx(a)];
    return (i == 0 || i == n_[idx(a)]) ? 0.5 * full : full;
  }

  double node_volume(const Index3& p) const {
    return dual_length(Axis::X, p[0]) * dual_length(Axis::Y, p[1]) *
           dual_length(Axis::Z, p[2]);
  }
  double edge_length(Axis a) const { return h_[idx(a)]; }
  double edge_dual_area(Axis a, const Index3& p) const {
    const Axis b = axis_from(idx(a) + 1);
    const Axis c = axis_from(idx(a) + 2);
    return dual_length(b, p[idx(b)]) * dual_length(c, p[idx(c)]);
  }
  double face_area(Axis a) const {
    return h_[(idx(a) + 1) % 3] * h_[(idx(a) + 2) % 3];
  }
  double face_dual_length(Axis a, const Index3& p) const {
    return dual_length(a, p[idx(a)]);
  }

  /// V'' for nodes, S'' for primary edges, l'' for primary faces (secondary edges).
  double dual_weight(const Entity& e) const {
    check(e);
    switch (e.kind) {
      case EntityKind::Node: return node_volume(e.p);
      case EntityKind::Edge: return edge_dual_area(e.axis, e.p);
      case EntityKind::Face: return face_dual_length(e.axis, e.p);
    }
    return 0.0;
  }

  /// l' for primary edges, S' for primary faces, 1 for nodes.
  double primary_weight(const Entity& e) const {
    check(e);
    switch (e.kind) {
      case EntityKind::Node: return 1.0;
      case EntityKind::Edge: return edge_length(e.axis);
      case EntityKind::Face: return face_area(e.axis);
    }
    return 0.0;
  }

  // ---- positions -------------------------------------------------------------

  Vec3 node_position(const Index3& p) const {
    return {p[0] * h_[0], p[1] * h_[1], p[2] * h_[2]};
  }
  Vec3 edge_midpoint(Axis a, const Index3& p) const {
    Vec3 x = node_position(p);
    x[idx(a)] += 0.5 * h_[idx(a)];
    return x;
  }
  Vec3 face_center(Axis a, const Index3& p) const {
    Vec3 x = node_position(p);
    for (int d = 0; d < 3; ++d) {
      if (d != idx(a)) x[d] += 0.5 * h_[d];
    }
    return x;
  }

  // ---- hanging sites ---------------------------------------------------------

  std::size_t perp_sites_on_face(Face f) const {
    const int nrm = idx(face_normal(f));
    std::size_t c = 1;
    for (int d = 0; d < 3; ++d) {
      if (d != nrm) c *= static_cast<std::size_t>(n_[d] + 1);
    }
    return c;
  }
  std::size_t btan_sites_on_face(Face f, Axis edge_axis) const {
    const int nrm = idx(face_normal(f));
    const int ea = idx(edge_axis);
    if (ea == nrm) return 0;
    const int other = 3 - nrm - ea;
    return static_cast<std::size_t>(n_[ea]) * static_cast<std::size_t>(n_[other] + 1);
  }
  std::size_t perp_site_count() const { return perp_count_; }
  std::size_t btan_site_count() const { return btan_count_; }
  std::size_t site_count(HangingFamily fam) const {
    return fam == HangingFamily::BTan ? btan_count_ : perp_count_;
  }

  /// Index of the perpendicular site hosted by node `p` on face `f`.
  std::size_t perp_site_index(Face f, const Index3& p) const {
    const int nrm = idx(face_normal(f));
    const int lo = nrm == 0 ? 1 : 0;
    const int hi = nrm == 2 ? 1 : 2;
    return perp_base_[static_cast<int>(f)] +
           static_cast<std::size_t>(p[lo]) * static_cast<std::size_t>(n_[hi] + 1) +
           static_cast<std::size_t>(p[hi]);
  }

  /// Index of the tangential-B site hosted by the `edge_axis` edge at `p` on face `f`.
  std::size_t btan_site_index(Face f, Axis edge_axis, const Index3& p) const {
    const int nrm = idx(face_normal(f));
    const int ea = idx(edge_axis);
    const int lo = std::min(ea, 3 - nrm - ea);
    const int hi = std::max(ea, 3 - nrm - ea);
    const int hi_ext = hi == ea ? n_[hi] : n_[hi] + 1;
    return btan_base_[static_cast<int>(f)][ea] +
           static_cast<std::size_t>(p[lo]) * static_cast<std::size_t>(hi_ext) +
           static_cast<std::size_t>(p[hi]);
  }

  /// Sites in face-major order (x-, x+, y-, y+, z-, z+); tangential-B sites are
  /// further grouped by host-edge axis; lexicographic (i,j,k) within a group.
  std::vector<HangingSite> enumerate_hanging(HangingFamily fam) const {
    std::vector<HangingSite> out;
    out.reserve(site_count(fam));
    for (Face f : kFaces) {
      const Axis nrm = face_normal(f);
      const int fixed = face_is_plus(f) ? n_[idx(nrm)] : 0;
      if (fam == HangingFamily::BTan) {
        for (Axis ea : kAxes) {
          if (ea == nrm) continue;
          const Axis bax = axis_from(3 - idx(nrm) - idx(ea));
          const int sign = btan_sign(f, ea);
          Index3 ext = edge_extent(ea);
          ext[idx(nrm)] = 1;
          for (int i = 0; i < ext[0]; ++i) {
            for (int j = 0; j < ext[1]; ++j) {
              for (int k = 0; k < ext[2]; ++k) {
                Index3 p{i, j, k};
                p[idx(nrm)] = fixed;
                HangingSite s;
                s.family = fam;
                s.face = f;
                s.host = edge_id(ea, p);
                s.host_axis = ea;
                s.direction = bax;
                s.sign = sign;
                s.area = edge_length(ea) * dual_length(bax, p[idx(bax)]);
                s.p = p;
                out.push_back(s);
              }
            }
          }
        }
      } else {
        Index3 ext = node_extent();
        ext[idx(nrm)] = 1;
        for (int i = 0; i < ext[0]; ++i) {
          for (int j = 0; j < ext[1]; ++j) {
            for (int k = 0; k < ext[2]; ++k) {
              Index3 p{i, j, k};
              p[idx(nrm)] = fixed;
              HangingSite s;
              s.family = fam;
              s.face = f;
              s.host = node_id(p);
              s.host_axis = nrm;
              s.direction = nrm;
              s.sign = face_outward_sign(f);
              const Axis b = axis_from(idx(nrm) + 1);
              const Axis c = axis_from(idx(nrm) + 2);
              s.area = dual_length(b, p[idx(b)]) * dual_length(c, p[idx(c)]);
              s.p = p;
              out.push_back(s);
            }
          }
        }
      }
    }
    return out;
  }

  /// Sign of the tangential-B input in the update of a boundary edge along
  /// `edge_axis` on face `f`: (u_B x u_E) . (-n).
  static int btan_sign(Face f, Axis edge_axis) {
    const Axis nrm = face_normal(f);
    const Axis bax = axis_from(3 - idx(nrm) - idx(edge_axis));
    // u_B x u_E is +/- u_nrm depending on cyclic order of (B, E, nrm).
    const int cyc = (idx(edge_axis) - idx(bax) + 3) % 3 == 1 ? 1 : -1;
    return cyc * -face_outward_sign(f);
  }

 private:
  GridSpec spec_;
  std::array<int, 3> n_{};
  Vec3 h_{};
  std::array<std::size_t, 6> perp_base_{};
  std::array<std::array<std::size_t, 3>, 6> btan_base_{};
  std::size_t perp_count_ = 0;
  std::size_t btan_count_ = 0;
};

inline GridIndex build_grid(const GridSpec& spec) { return GridIndex(spec); }

}  // namespace pfdtd
