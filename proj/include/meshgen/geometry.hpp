#pragma once

#include <meshgen/error.hpp>
#include <meshgen/projectors.hpp>
#include <meshgen/tfi.hpp>
#include <meshgen/vec3.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace meshgen {

/// Hexahedron corners in local (xi,eta,kappa) lexicographic order, xi fastest:
///   0=(0,0,0) 1=(1,0,0) 2=(0,1,0) 3=(1,1,0) 4=(0,0,1) 5=(1,0,1) 6=(0,1,1) 7=(1,1,1)
/// (vertices 1..8 of the two-prism decomposition, zero-based).
struct HexCell {
  std::array<Vec3, 8> r;
};

/// (1/6) |V1 . (V2 x V3)| with V1 = b-a, V2 = c-a, V3 = d-a.
inline double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return std::abs(dot(b - a, cross(c - a, d - a))) / 6.0;
}

/// Prism 124568 -> {1245, 2456, 4568}; prism 134578 -> {1345, 3457, 4578}.
inline constexpr std::array<std::array<int, 4>, 6> kHexTets{{
    {0, 1, 3, 4},
    {1, 3, 4, 5},
    {3, 4, 5, 7},
    {0, 2, 3, 4},
    {2, 3, 4, 6},
    {3, 4, 6, 7},
}};

struct HexVolume {
  double volume{0.0};
  bool degenerate_tet{false};
};

inline HexVolume hex_volume(const HexCell& c) {
  double scale = 0.0;
  for (const auto& p : c.r) scale = std::max(scale, distance(p, c.r[0]));
  const double floor = 1e-12 * scale * scale * scale;
  HexVolume out;
  double six_v = 0.0;
  for (const auto& t : kHexTets) {
    const Vec3& a = c.r[t[0]];
    const double w = std::abs(dot(c.r[t[1]] - a, cross(c.r[t[2]] - a, c.r[t[3]] - a)));
    if (w <= 6.0 * floor) out.degenerate_tet = true;
    six_v += w;
  }
  out.volume = six_v / 6.0;
  return out;
}

inline Vec3 cell_center(const HexCell& c) {
  Vec3 s{};
  for (const auto& p : c.r) s += p;
  return s * 0.125;
}

/// Cross product of the diagonals (q2 - q0) x (q3 - q1) of a quad given in
/// cyclic order. For a planar quad its length is twice the area.
inline Vec3 face_normal_diagonal(const Vec3& q0, const Vec3& q1, const Vec3& q2, const Vec3& q3) {
  return cross(q2 - q0, q3 - q1);
}

enum class HexSide { xi0 = 0, xi1 = 1, eta0 = 2, eta1 = 3, kappa0 = 4, kappa1 = 5 };

inline constexpr std::array<HexSide, 6> kHexSides{HexSide::xi0,  HexSide::xi1,    HexSide::eta0,
                                                  HexSide::eta1, HexSide::kappa0, HexSide::kappa1};

inline const char* side_name(HexSide s) {
  static constexpr std::array<const char*, 6> names{"xi0", "xi1", "eta0", "eta1", "kappa0", "kappa1"};
  return names[static_cast<std::size_t>(s)];
}

inline constexpr Axis side_axis(HexSide s) { return static_cast<Axis>(static_cast<int>(s) / 2); }
inline constexpr int side_value(HexSide s) { return static_cast<int>(s) % 2; }

/// Face corners per side, cyclic and oriented so the diagonal normal points out.
inline constexpr std::array<std::array<int, 4>, 6> kHexFaces{{
    {0, 4, 6, 2},
    {1, 3, 7, 5},
    {0, 1, 5, 4},
    {2, 6, 7, 3},
    {0, 2, 3, 1},
    {4, 5, 7, 6},
}};

/// Outward area-weighted normal and center of one quadrilateral face.
struct FaceGeometry {
  Vec3 normal;
  Vec3 center;
  std::array<std::size_t, 4> corners{};

  double area() const { return norm(normal); }
  Vec3 unit_normal() const { return normalized(normal); }
};

inline FaceGeometry quad_geometry(const Vec3& q0, const Vec3& q1, const Vec3& q2, const Vec3& q3) {
  FaceGeometry g;
  g.normal = 0.5 * face_normal_diagonal(q0, q1, q2, q3);
  g.center = 0.25 * (q0 + q1 + q2 + q3);
  return g;
}

inline FaceGeometry face_geometry(const HexCell& c, HexSide side) {
  const auto& f = kHexFaces[static_cast<std::size_t>(side)];
  auto g = quad_geometry(c.r[f[0]], c.r[f[1]], c.r[f[2]], c.r[f[3]]);
  for (std::size_t k = 0; k < 4; ++k) g.corners[k] = static_cast<std::size_t>(f[k]);
  return g;
}

/// Normal to the surface of constant `face_axis` through `at`, as the cross
/// product of the two covariant vectors tangent to it, ordered cyclically so
/// the result points towards increasing `face_axis` for a right-handed map.
/// Its length is the local area scale factor.
inline Vec3 face_normal_covariant(const BlockSpec& b, const RefPoint& at, Axis face_axis) {
  at.require_in_cube();
  const Axis t1 = static_cast<Axis>((index_of(face_axis) + 1) % 3);
  const Axis t2 = static_cast<Axis>((index_of(face_axis) + 2) % 3);
  return cross(covariant_vector(b, at, t1), covariant_vector(b, at, t2));
}

/// Determinant of the trilinear map's Jacobian at each corner.
inline std::array<double, 8> corner_jacobians(const HexCell& c) {
  std::array<double, 8> j{};
  for (int k = 0; k < 8; ++k) {
    std::array<Vec3, 3> e;
    for (int axis = 0; axis < 3; ++axis) {
      const int bit = 1 << axis;
      const int other = k ^ bit;
      e[axis] = (k & bit) ? c.r[k] - c.r[other] : c.r[other] - c.r[k];
    }
    j[k] = dot(e[0], cross(e[1], e[2]));
  }
  return j;
}

} // namespace meshgen
