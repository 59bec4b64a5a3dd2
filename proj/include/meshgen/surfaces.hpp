#pragma once

#include <meshgen/error.hpp>
#include <meshgen/vec3.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace meshgen {

/// Throws DomainError unless 0 <= t <= 1 (NaN is rejected too).
inline void require_unit(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError(std::string(what) + " = " + std::to_string(t) + " lies outside [0,1]");
  }
}

/// Which surface parameter a derivative or an edge refers to.
enum class SurfaceParam { u = 0, v = 1 };

/// Scalar height z = f(x,y) built from monomials and sinusoids.
///
/// f(x,y) = constant + sum c*x^px*y^py + sum A*sin(kx*x + ky*y + phase)
struct HeightFunction {
  struct Monomial {
    double coef{0.0};
    int px{0};
    int py{0};
  };
  struct Sine {
    double amplitude{0.0};
    double kx{0.0};
    double ky{0.0};
    double phase{0.0};
  };

  double constant{0.0};
  std::vector<Monomial> monomials;
  std::vector<Sine> sines;

  static HeightFunction flat(double z) { return HeightFunction{z, {}, {}}; }

  /// Mixed partial d^(nx+ny) f / dx^nx dy^ny for nx, ny in {0,1}.
  double partial(double x, double y, int nx, int ny) const {
    double f = (nx == 0 && ny == 0) ? constant : 0.0;
    for (const auto& m : monomials) {
      if (m.px < nx || m.py < ny) continue;
      const double cx = nx == 1 ? m.px : 1.0;
      const double cy = ny == 1 ? m.py : 1.0;
      f += m.coef * cx * cy * std::pow(x, m.px - nx) * std::pow(y, m.py - ny);
    }
    for (const auto& s : sines) {
      const double arg = s.kx * x + s.ky * y + s.phase;
      const double scale = (nx == 1 ? s.kx : 1.0) * (ny == 1 ? s.ky : 1.0);
      switch (nx + ny) {
        case 0: f += s.amplitude * std::sin(arg); break;
        case 1: f += s.amplitude * scale * std::cos(arg); break;
        default: f -= s.amplitude * scale * std::sin(arg); break;
      }
    }
    return f;
  }

  double operator()(double x, double y) const { return partial(x, y, 0, 0); }
};

/// Affine parallelogram: origin + u*u_axis + v*v_axis.
struct PlaneForm {
  Vec3 origin;
  Vec3 u_axis;
  Vec3 v_axis;
};

/// Bilinear patch through corners at (u,v) = (0,0), (1,0), (0,1), (1,1).
struct BilinearForm {
  std::array<Vec3, 4> corners;
};

/// z = f(x,y) over the rectangle [x0,x1] x [y0,y1]; u runs along x, v along y.
struct GraphForm {
  double x0{0.0};
  double x1{1.0};
  double y0{0.0};
  double y1{1.0};
  HeightFunction height;
};

/// Vertical ruled surface over the map-view segment from (ax,ay) to (bx,by).
/// u runs along the segment; v blends from the bottom horizon to the top one.
struct WallForm {
  double ax{0.0};
  double ay{0.0};
  double bx{1.0};
  double by{0.0};
  HeightFunction bottom;
  HeightFunction top;
};

/// (m+1) x (n+1) lattice of points, bilinearly interpolated.
/// Point (i,j) sits at parameter (i/m, j/n) and is stored at i + (m+1)*j.
struct DiscreteForm {
  std::size_t m{1};
  std::size_t n{1};
  std::vector<Vec3> points;
};

/// A map from the unit square to physical space.
///
/// Surfaces that bound a block along reference axis a are parametrized by the
/// two remaining reference axes in ascending order (xi < eta < kappa); e.g. the
/// xi = 0 face uses (u,v) = (eta,kappa). Immutable after construction.
class ParametricSurface {
 public:
  using Form = std::variant<PlaneForm, BilinearForm, GraphForm, WallForm, DiscreteForm>;

  explicit ParametricSurface(Form form) : form_(std::move(form)) { validate(); }

  static ParametricSurface plane(Vec3 origin, Vec3 u_axis, Vec3 v_axis) {
    return ParametricSurface(PlaneForm{origin, u_axis, v_axis});
  }
  static ParametricSurface bilinear(Vec3 p00, Vec3 p10, Vec3 p01, Vec3 p11) {
    return ParametricSurface(BilinearForm{{p00, p10, p01, p11}});
  }
  static ParametricSurface graph(double x0, double x1, double y0, double y1, HeightFunction f) {
    return ParametricSurface(GraphForm{x0, x1, y0, y1, std::move(f)});
  }
  static ParametricSurface wall(double ax, double ay, double bx, double by, HeightFunction bottom,
                                HeightFunction top) {
    return ParametricSurface(WallForm{ax, ay, bx, by, std::move(bottom), std::move(top)});
  }
  static ParametricSurface discrete(std::size_t m, std::size_t n, std::vector<Vec3> points) {
    return ParametricSurface(DiscreteForm{m, n, std::move(points)});
  }
  /// Samples `other` on an (m+1) x (n+1) parameter lattice.
  static ParametricSurface sampled(const ParametricSurface& other, std::size_t m, std::size_t n) {
    std::vector<Vec3> pts;
    pts.reserve((m + 1) * (n + 1));
    for (std::size_t j = 0; j <= n; ++j) {
      for (std::size_t i = 0; i <= m; ++i) {
        pts.push_back(other.eval(static_cast<double>(i) / static_cast<double>(m),
                                 static_cast<double>(j) / static_cast<double>(n)));
      }
    }
    return discrete(m, n, std::move(pts));
  }

  const Form& form() const noexcept { return form_; }
  bool is_discrete() const noexcept { return std::holds_alternative<DiscreteForm>(form_); }

  Vec3 eval(double u, double v) const { return partial(u, v, 0, 0); }

  Vec3 derivative(double u, double v, SurfaceParam which) const {
    return which == SurfaceParam::u ? partial(u, v, 1, 0) : partial(u, v, 0, 1);
  }

  /// d^(du+dv) r / du^du dv^dv with du, dv in {0,1}.
  Vec3 partial(double u, double v, int du, int dv) const {
    require_unit(u, "surface parameter u");
    require_unit(v, "surface parameter v");
    return std::visit([&](const auto& f) { return eval_form(f, u, v, du, dv); }, form_);
  }

 private:
  void validate() const {
    if (const auto* d = std::get_if<DiscreteForm>(&form_)) {
      if (d->m < 1 || d->n < 1) throw ConstructionError("discrete surface needs at least 2x2 points");
      if (d->points.size() != (d->m + 1) * (d->n + 1)) {
        throw ConstructionError("discrete surface expects " + std::to_string((d->m + 1) * (d->n + 1)) +
                                " points, got " + std::to_string(d->points.size()));
      }
      for (const auto& p : d->points) {
        if (!is_finite(p)) throw ConstructionError("discrete surface holds a non-finite point");
      }
    }
  }

  static Vec3 eval_form(const PlaneForm& p, double u, double v, int du, int dv) {
    if (du == 0 && dv == 0) return p.origin + u * p.u_axis + v * p.v_axis;
    if (du == 1 && dv == 0) return p.u_axis;
    if (du == 0 && dv == 1) return p.v_axis;
    return {};
  }

  static Vec3 eval_form(const BilinearForm& b, double u, double v, int du, int dv) {
    const auto& c = b.corners;
    if (du == 0 && dv == 0) return lerp(lerp(c[0], c[1], u), lerp(c[2], c[3], u), v);
    if (du == 1 && dv == 0) return lerp(c[1] - c[0], c[3] - c[2], v);
    if (du == 0 && dv == 1) return lerp(c[2] - c[0], c[3] - c[1], u);
    return c[3] - c[2] - c[1] + c[0];
  }

  static Vec3 eval_form(const GraphForm& g, double u, double v, int du, int dv) {
    const double x = std::lerp(g.x0, g.x1, u);
    const double y = std::lerp(g.y0, g.y1, v);
    const double lx = g.x1 - g.x0;
    const double ly = g.y1 - g.y0;
    const double fz = g.height.partial(x, y, du, dv) * (du == 1 ? lx : 1.0) * (dv == 1 ? ly : 1.0);
    if (du == 0 && dv == 0) return {x, y, fz};
    if (du == 1 && dv == 0) return {lx, 0.0, fz};
    if (du == 0 && dv == 1) return {0.0, ly, fz};
    return {0.0, 0.0, fz};
  }

  static Vec3 eval_form(const WallForm& w, double u, double v, int du, int dv) {
    const double x = std::lerp(w.ax, w.bx, u);
    const double y = std::lerp(w.ay, w.by, u);
    const double dx = w.bx - w.ax;
    const double dy = w.by - w.ay;
    if (du == 0) {
      const double zb = w.bottom(x, y);
      const double zt = w.top(x, y);
      if (dv == 0) return {x, y, std::lerp(zb, zt, v)};
      return {0.0, 0.0, zt - zb};
    }
    const double gb = w.bottom.partial(x, y, 1, 0) * dx + w.bottom.partial(x, y, 0, 1) * dy;
    const double gt = w.top.partial(x, y, 1, 0) * dx + w.top.partial(x, y, 0, 1) * dy;
    if (dv == 0) return {dx, dy, std::lerp(gb, gt, v)};
    return {0.0, 0.0, gt - gb};
  }

  // Locates parameter t on a lattice of `cells` cells. Parameters that are a
  // lattice value up to rounding snap to it so stored points come back exactly.
  static std::pair<std::size_t, double> locate(double t, std::size_t cells) {
    const double s = t * static_cast<double>(cells);
    const double r = std::round(s);
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(cells);
    double local_pos = s;
    if (std::abs(s - r) <= slack) local_pos = r;
    auto cell = static_cast<std::size_t>(std::floor(local_pos));
    cell = std::min(cell, cells - 1);
    const double frac = local_pos - static_cast<double>(cell);
    return {cell, std::clamp(frac, 0.0, 1.0)};
  }

  static Vec3 eval_form(const DiscreteForm& d, double u, double v, int du, int dv) {
    const auto [i, s] = locate(u, d.m);
    const auto [j, t] = locate(v, d.n);
    const auto at = [&](std::size_t a, std::size_t b) -> const Vec3& { return d.points[a + (d.m + 1) * b]; };
    const Vec3& p00 = at(i, j);
    const Vec3& p10 = at(i + 1, j);
    const Vec3& p01 = at(i, j + 1);
    const Vec3& p11 = at(i + 1, j + 1);
    const double sm = static_cast<double>(d.m);
    const double sn = static_cast<double>(d.n);
    if (du == 0 && dv == 0) return lerp(lerp(p00, p10, s), lerp(p01, p11, s), t);
    if (du == 1 && dv == 0) return sm * lerp(p10 - p00, p11 - p01, t);
    if (du == 0 && dv == 1) return sn * lerp(p01 - p00, p11 - p10, s);
    return (sm * sn) * (p11 - p10 - p01 + p00);
  }

  Form form_;
};

/// Direction vectors attached to a boundary surface (Hermite blending data).
/// Shares the surface representation but its values are vectors, not points.
class DerivativeField {
 public:
  explicit DerivativeField(ParametricSurface field) : field_(std::move(field)) {}

  static DerivativeField constant(Vec3 d) { return DerivativeField(ParametricSurface::plane(d, {}, {})); }

  Vec3 eval(double u, double v) const { return field_.eval(u, v); }
  Vec3 partial(double u, double v, int du, int dv) const { return field_.partial(u, v, du, dv); }
  const ParametricSurface& field() const noexcept { return field_; }

 private:
  ParametricSurface field_;
};

/// A boundary edge of a surface: one parameter held at 0 or 1, the other free.
struct SurfaceEdge {
  SurfaceParam fixed{SurfaceParam::u};
  double value{0.0};

  Vec3 point(const ParametricSurface& s, double t) const {
    return fixed == SurfaceParam::u ? s.eval(value, t) : s.eval(t, value);
  }
};

struct EdgePair {
  SurfaceEdge on_a;
  SurfaceEdge on_b;
};

inline constexpr int kConformitySamples = 33;

/// Largest distance between the two edge curves over the conformity samples.
inline double edge_gap(const ParametricSurface& a, const ParametricSurface& b, const EdgePair& edges) {
  double gap = 0.0;
  for (int k = 0; k < kConformitySamples; ++k) {
    const double t = static_cast<double>(k) / (kConformitySamples - 1);
    gap = std::max(gap, distance(edges.on_a.point(a, t), edges.on_b.point(b, t)));
  }
  return gap;
}

/// True iff both edge curves agree within `tol` at 33 uniform samples.
inline bool edges_conform(const ParametricSurface& a, const ParametricSurface& b, const EdgePair& edges,
                          double tol) {
  return edge_gap(a, b, edges) <= tol;
}

} // namespace meshgen
