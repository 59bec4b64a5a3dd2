#pragma once

#include <meshgen/meshgen.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace meshgen::testing {

using Map = std::function<Vec3(double, double, double)>;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611ULL);
  return gen;
}

inline double uniform(double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline RefPoint random_point() { return {uniform(), uniform(), uniform()}; }

/// The six faces of x = o + c0*xi + c1*eta + c2*kappa as planes.
inline BlockSpec affine_block(Vec3 o, std::array<Vec3, 3> c, Resolution r = {1, 1, 1}, std::string material = "rock",
                              std::array<Grading, 3> g = {}) {
  using S = ParametricSurface;
  return BlockSpec(ProjectorSpec::linear(Axis::xi, S::plane(o, c[1], c[2]), S::plane(o + c[0], c[1], c[2])),
                   ProjectorSpec::linear(Axis::eta, S::plane(o, c[0], c[2]), S::plane(o + c[1], c[0], c[2])),
                   ProjectorSpec::linear(Axis::kappa, S::plane(o, c[0], c[1]), S::plane(o + c[2], c[0], c[1])), r,
                   std::move(material), g);
}

inline BlockSpec box_block(Vec3 lo, Vec3 size, Resolution r = {1, 1, 1}, std::string material = "rock") {
  return affine_block(lo, {Vec3{size.x, 0, 0}, Vec3{0, size.y, 0}, Vec3{0, 0, size.z}}, r, std::move(material));
}

inline BlockSpec unit_cube(Resolution r = {1, 1, 1}) { return box_block({0, 0, 0}, {1, 1, 1}, r); }

/// Discrete surface sampling f on an (m+1) x (n+1) lattice.
inline ParametricSurface sample_surface(const std::function<Vec3(double, double)>& f, std::size_t m, std::size_t n) {
  std::vector<Vec3> pts;
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= m; ++i) pts.push_back(f(double(i) / m, double(j) / n));
  }
  return ParametricSurface::discrete(m, n, std::move(pts));
}

/// Block whose faces are discrete samples of a volume map; edges conform by construction.
inline BlockSpec sampled_block(const Map& f, std::size_t samples, Resolution r) {
  const auto face = [&](Axis a, double s) {
    return sample_surface(
        [&, a, s](double u, double v) {
          switch (a) {
            case Axis::xi: return f(s, u, v);
            case Axis::eta: return f(u, s, v);
            default: return f(u, v, s);
          }
        },
        samples, samples);
  };
  return BlockSpec(ProjectorSpec::linear(Axis::xi, face(Axis::xi, 0), face(Axis::xi, 1)),
                   ProjectorSpec::linear(Axis::eta, face(Axis::eta, 0), face(Axis::eta, 1)),
                   ProjectorSpec::linear(Axis::kappa, face(Axis::kappa, 0), face(Axis::kappa, 1)), r, "rock");
}

/// Block between two horizons over a rectangle (vertical walls).
inline BlockSpec layer_block(double x0, double x1, double y0, double y1, const HeightFunction& bottom,
                             const HeightFunction& top, Resolution r, std::string material = "rock") {
  using S = ParametricSurface;
  return BlockSpec(
      ProjectorSpec::linear(Axis::xi, S::wall(x0, y0, x0, y1, bottom, top), S::wall(x1, y0, x1, y1, bottom, top)),
      ProjectorSpec::linear(Axis::eta, S::wall(x0, y0, x1, y0, bottom, top), S::wall(x0, y1, x1, y1, bottom, top)),
      ProjectorSpec::linear(Axis::kappa, S::graph(x0, x1, y0, y1, bottom), S::graph(x0, x1, y0, y1, top)), r,
      std::move(material));
}

inline HeightFunction sine_height(double base, double amplitude, double kx, double ky, double phase = 0.0) {
  HeightFunction h = HeightFunction::flat(base);
  h.sines.push_back({amplitude, kx, ky, phase});
  return h;
}

/// Smooth random deformation of the unit cube, mild enough to stay invertible.
inline Map random_smooth_map() {
  std::array<double, 9> a{};
  for (auto& v : a) v = uniform(-0.08, 0.08);
  const Vec3 scale{uniform(0.5, 2.0), uniform(0.5, 2.0), uniform(0.5, 2.0)};
  const Vec3 shift{uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)};
  return [=](double x, double y, double z) {
    const double pi = std::numbers::pi;
    return Vec3{shift.x + scale.x * (x + a[0] * std::sin(pi * y) * std::cos(pi * z) + a[1] * x * x + a[2] * y * z),
                shift.y + scale.y * (y + a[3] * std::sin(pi * z) * std::cos(pi * x) + a[4] * y * y + a[5] * z * x),
                shift.z + scale.z * (z + a[6] * std::sin(pi * x) * std::cos(pi * y) + a[7] * z * z + a[8] * x * y)};
  };
}

inline std::vector<StructuredGrid> grids_of(std::initializer_list<BlockSpec> blocks) {
  std::vector<StructuredGrid> g;
  for (const auto& b : blocks) g.push_back(generate_grid(b));
  return g;
}

inline double angle(const Vec3& a, const Vec3& b) { return angle_between(a, b); }

} // namespace meshgen::testing
