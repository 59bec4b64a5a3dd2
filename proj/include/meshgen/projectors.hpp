#pragma once

#include <meshgen/error.hpp>
#include <meshgen/surfaces.hpp>
#include <meshgen/vec3.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace meshgen {

enum class Axis { xi = 0, eta = 1, kappa = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::xi, Axis::eta, Axis::kappa};

inline constexpr std::size_t index_of(Axis a) { return static_cast<std::size_t>(a); }

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::xi: return "xi";
    case Axis::eta: return "eta";
    case Axis::kappa: return "kappa";
  }
  return "?";
}

/// The two reference axes parametrizing a surface of constant `fixed`, as (u, v).
inline constexpr std::array<Axis, 2> surface_axes(Axis fixed) {
  switch (fixed) {
    case Axis::xi: return {Axis::eta, Axis::kappa};
    case Axis::eta: return {Axis::xi, Axis::kappa};
    case Axis::kappa: break;
  }
  return {Axis::xi, Axis::eta};
}

/// Point (xi, eta, kappa) of the reference unit cube.
struct RefPoint {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  RefPoint() = default;
  RefPoint(double xi, double eta, double kappa) : c{xi, eta, kappa} {}

  double operator[](Axis a) const { return c[index_of(a)]; }
  double& operator[](Axis a) { return c[index_of(a)]; }

  void require_in_cube() const {
    for (Axis a : kAxes) require_unit(c[index_of(a)], axis_name(a));
  }
};

/// Derivative order (0 or 1) per reference axis.
struct DerivOrder {
  std::array<int, 3> n{0, 0, 0};

  static DerivOrder none() { return {}; }
  static DerivOrder along(Axis a) {
    DerivOrder d;
    d.n[index_of(a)] = 1;
    return d;
  }
  int operator[](Axis a) const { return n[index_of(a)]; }
  int& operator[](Axis a) { return n[index_of(a)]; }
};

inline constexpr std::size_t kMaxLagrangeOrder = 8;

/// Throws ConstructionError unless knots run strictly ascending from 0 to 1.
inline void validate_knots(std::span<const double> knots) {
  if (knots.size() < 2) throw ConstructionError("knots: at least two knots are required");
  for (double k : knots) {
    if (!std::isfinite(k)) throw ConstructionError("knots: non-finite knot");
  }
  if (knots.front() != 0.0) throw ConstructionError("knots: first knot must be 0");
  if (knots.back() != 1.0) throw ConstructionError("knots: last knot must be 1");
  for (std::size_t j = 1; j < knots.size(); ++j) {
    if (knots[j] == knots[j - 1]) throw ConstructionError("knots: duplicate knot " + std::to_string(knots[j]));
    if (knots[j] < knots[j - 1]) throw ConstructionError("knots not ascending");
  }
}

/// Lagrange weighting factors beta_j(t) by the direct product of knot ratios.
inline std::vector<double> lagrange_weights(std::span<const double> knots, double t) {
  validate_knots(knots);
  require_unit(t, "t");
  const std::size_t n = knots.size();
  std::vector<double> beta(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) beta[j] *= (t - knots[i]) / (knots[j] - knots[i]);
    }
  }
  return beta;
}

/// omega_j = 1 / prod_{i != j} (knot_j - knot_i).
inline std::vector<double> barycentric_weights(std::span<const double> knots) {
  validate_knots(knots);
  const std::size_t n = knots.size();
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) prod *= knots[j] - knots[i];
    }
    w[j] = 1.0 / prod;
  }
  return w;
}

/// Parameters closer than this to a knot return that knot's surface exactly.
inline constexpr double kKnotSnap = 1e-14;

namespace detail {

// beta_j(t) = Omega * omega_j / (t - knot_j), Omega = prod_i (t - knot_i).
inline void barycentric_basis(std::span<const double> knots, std::span<const double> weights, double t,
                              std::span<double> out) {
  const std::size_t n = knots.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(t - knots[j]) < kKnotSnap) {
      for (std::size_t i = 0; i < n; ++i) out[i] = i == j ? 1.0 : 0.0;
      return;
    }
  }
  double omega = 1.0;
  for (double k : knots) omega *= t - k;
  for (std::size_t j = 0; j < n; ++j) out[j] = omega * weights[j] / (t - knots[j]);
}

// beta_j'(t) = omega_j * sum_{m != j} prod_{i != j, m} (t - knot_i); no poles.
inline void lagrange_basis_derivative(std::span<const double> knots, std::span<const double> weights, double t,
                                      std::span<double> out) {
  const std::size_t n = knots.size();
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == j) continue;
      double prod = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != j && i != m) prod *= t - knots[i];
      }
      sum += prod;
    }
    out[j] = weights[j] * sum;
  }
}

} // namespace detail

/// What a blending term samples: the operand's value at a node, or its
/// derivative along the projector's axis at that node (Hermite data).
struct BlendTerm {
  double node{0.0};
  int derivative{0};
};

struct LinearFamily {
  ParametricSurface s0;
  ParametricSurface s1;
};

struct LagrangianFamily {
  std::vector<double> knots;
  std::vector<ParametricSurface> surfaces;
  std::vector<double> weights;
};

struct HermiteFamily {
  ParametricSurface s0;
  ParametricSurface s1;
  DerivativeField d0;
  DerivativeField d1;
};

/// A univariate projector along one reference axis:
///
///   P(t; u, v) = sum_k phi_k(t) * datum_k(u, v)
///
/// where the data are the defining surfaces (and, for Hermite, the direction
/// fields on the two end surfaces) and (u, v) are the remaining reference axes.
class ProjectorSpec {
 public:
  using Family = std::variant<LinearFamily, LagrangianFamily, HermiteFamily>;

  static ProjectorSpec linear(Axis axis, ParametricSurface s0, ParametricSurface s1) {
    return ProjectorSpec(axis, LinearFamily{std::move(s0), std::move(s1)});
  }

  static ProjectorSpec lagrangian(Axis axis, std::vector<double> knots, std::vector<ParametricSurface> surfaces) {
    validate_knots(knots);
    if (knots.size() != surfaces.size()) {
      throw ConstructionError("lagrangian projector: " + std::to_string(knots.size()) + " knots but " +
                              std::to_string(surfaces.size()) + " surfaces");
    }
    if (knots.size() - 1 > kMaxLagrangeOrder) {
      throw ConstructionError("lagrangian projector: order " + std::to_string(knots.size() - 1) +
                              " exceeds the cap of " + std::to_string(kMaxLagrangeOrder));
    }
    auto w = barycentric_weights(knots);
    return ProjectorSpec(axis, LagrangianFamily{std::move(knots), std::move(surfaces), std::move(w)});
  }

  static ProjectorSpec hermite(Axis axis, ParametricSurface s0, ParametricSurface s1, DerivativeField d0,
                               DerivativeField d1) {
    return ProjectorSpec(axis, HermiteFamily{std::move(s0), std::move(s1), std::move(d0), std::move(d1)});
  }

  Axis axis() const noexcept { return axis_; }
  const Family& family() const noexcept { return family_; }

  const char* family_name() const {
    switch (family_.index()) {
      case 0: return "linear";
      case 1: return "lagrangian";
      default: return "hermite";
    }
  }

  /// Boundary surface at axis coordinate 0 (side == 0) or 1 (side == 1).
  const ParametricSurface& boundary(int side) const {
    return std::visit(
        [side](const auto& f) -> const ParametricSurface& {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, LagrangianFamily>) {
            return side == 0 ? f.surfaces.front() : f.surfaces.back();
          } else {
            return side == 0 ? f.s0 : f.s1;
          }
        },
        family_);
  }

  std::size_t term_count() const {
    switch (family_.index()) {
      case 0: return 2;
      case 1: return std::get<LagrangianFamily>(family_).knots.size();
      default: return 4;
    }
  }

  BlendTerm term(std::size_t k) const {
    switch (family_.index()) {
      case 0: return {static_cast<double>(k), 0};
      case 1: return {std::get<LagrangianFamily>(family_).knots[k], 0};
      default: return {static_cast<double>(k % 2), static_cast<int>(k / 2)};
    }
  }

  /// Blending functions phi_k(t), or their first derivatives when order == 1.
  void basis(double t, int order, std::span<double> out) const {
    switch (family_.index()) {
      case 0:
        out[0] = order == 0 ? 1.0 - t : -1.0;
        out[1] = order == 0 ? t : 1.0;
        return;
      case 1: {
        const auto& f = std::get<LagrangianFamily>(family_);
        if (order == 0) {
          detail::barycentric_basis(f.knots, f.weights, t, out);
        } else {
          detail::lagrange_basis_derivative(f.knots, f.weights, t, out);
        }
        return;
      }
      default: {
        const double t2 = t * t;
        const double t3 = t2 * t;
        if (order == 0) {
          out[0] = 2.0 * t3 - 3.0 * t2 + 1.0;
          out[1] = -2.0 * t3 + 3.0 * t2;
          out[2] = t3 - 2.0 * t2 + t;
          out[3] = t3 - t2;
        } else {
          out[0] = 6.0 * t2 - 6.0 * t;
          out[1] = -6.0 * t2 + 6.0 * t;
          out[2] = 3.0 * t2 - 4.0 * t + 1.0;
          out[3] = 3.0 * t2 - 2.0 * t;
        }
        return;
      }
    }
  }

  /// Partial derivative (du, dv) of the k-th datum at surface parameters (u, v).
  Vec3 datum(std::size_t k, double u, double v, int du, int dv) const {
    switch (family_.index()) {
      case 0: {
        const auto& f = std::get<LinearFamily>(family_);
        return (k == 0 ? f.s0 : f.s1).partial(u, v, du, dv);
      }
      case 1: return std::get<LagrangianFamily>(family_).surfaces[k].partial(u, v, du, dv);
      default: {
        const auto& f = std::get<HermiteFamily>(family_);
        switch (k) {
          case 0: return f.s0.partial(u, v, du, dv);
          case 1: return f.s1.partial(u, v, du, dv);
          case 2: return f.d0.partial(u, v, du, dv);
          default: return f.d1.partial(u, v, du, dv);
        }
      }
    }
  }

 private:
  ProjectorSpec(Axis axis, Family family) : axis_(axis), family_(std::move(family)) {}

  Axis axis_;
  Family family_;
};

/// Evaluates a projector, or one of its partial derivatives (order <= 1 per axis).
inline Vec3 eval_projector(const ProjectorSpec& p, const RefPoint& at, const DerivOrder& order) {
  at.require_in_cube();
  const auto params = surface_axes(p.axis());
  const double u = at[params[0]];
  const double v = at[params[1]];
  const int du = order[params[0]];
  const int dv = order[params[1]];

  std::array<double, kMaxLagrangeOrder + 1> phi{};
  const std::size_t n = p.term_count();
  p.basis(at[p.axis()], order[p.axis()], std::span<double>(phi.data(), n));

  Vec3 r{};
  for (std::size_t k = 0; k < n; ++k) {
    if (phi[k] == 0.0) continue;
    r += phi[k] * p.datum(k, u, v, du, dv);
  }
  return r;
}

inline Vec3 eval_projector(const ProjectorSpec& p, const RefPoint& at) {
  return eval_projector(p, at, DerivOrder::none());
}

/// d/dt of the projector along its own axis.
inline Vec3 eval_projector_axis_derivative(const ProjectorSpec& p, const RefPoint& at) {
  return eval_projector(p, at, DerivOrder::along(p.axis()));
}

} // namespace meshgen
