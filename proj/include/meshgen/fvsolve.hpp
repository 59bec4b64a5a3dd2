#pragma once

#include <meshgen/error.hpp>
#include <meshgen/multiblock.hpp>
#include <meshgen/vec3.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace meshgen {

/// Isotropic scalar permeability per material.
struct PermeabilityField {
  std::map<std::string, double> by_material;

  double at(const std::string& material) const {
    const auto it = by_material.find(material);
    if (it == by_material.end()) throw ConfigError("no permeability for material '" + material + "'");
    return it->second;
  }

  void validate() const {
    for (const auto& [name, k] : by_material) {
      if (!(k > 0.0) || !std::isfinite(k)) {
        throw ConfigError("permeability of '" + name + "' must be positive, got " + std::to_string(k));
      }
    }
  }
};

struct Dirichlet {
  double pressure{0.0};
};

/// Prescribed outward Darcy flux per unit face area.
struct Neumann {
  double flux{0.0};
};

using BoundaryCondition = std::variant<Dirichlet, Neumann>;

/// Steady single-phase pressure problem  -div(K grad p) = f  on a mesh.
/// Boundary faces without a condition are no-flow.
struct PressureProblem {
  std::reference_wrapper<const MultiblockMesh> mesh;
  PermeabilityField permeability;
  std::vector<double> source;                                // f at each cell center
  std::vector<std::optional<BoundaryCondition>> boundary;    // per face; interior entries ignored
  double tolerance{1e-12};
  int max_iterations{10000};

  explicit PressureProblem(const MultiblockMesh& m)
      : mesh(m), source(m.cells.size(), 0.0), boundary(m.faces.size()) {}

  bool has_dirichlet() const {
    const auto& faces = mesh.get().faces;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].is_boundary() && boundary[f] && std::holds_alternative<Dirichlet>(*boundary[f])) return true;
    }
    return false;
  }

  void validate() const {
    const auto& m = mesh.get();
    if (source.size() != m.cells.size()) throw ConfigError("source must hold one value per cell");
    if (boundary.size() != m.faces.size()) throw ConfigError("boundary conditions must be indexed by face");
    if (!(tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("solver needs at least one iteration");
    permeability.validate();
    for (const auto& c : m.cells) permeability.at(c.material);
  }
};

/// Compressed sparse row matrix.
class SparseMatrix {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() = default;

  /// Duplicate (row, col) entries are summed in insertion order.
  SparseMatrix(std::size_t n, std::vector<Triplet> entries) : n_(n), row_ptr_(n + 1, 0) {
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (const auto& t : entries) {
      if (t.row >= n || t.col >= n) throw ConstructionError("sparse entry out of range");
      if (!cols_.empty() && row_of_last_ == t.row && cols_.back() == t.col) {
        values_.back() += t.value;
        continue;
      }
      cols_.push_back(t.col);
      values_.push_back(t.value);
      row_of_last_ = t.row;
      ++row_ptr_[t.row + 1];
    }
    std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  double at(std::size_t i, std::size_t j) const {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (cols_[k] == j) return values_[k];
    }
    return 0.0;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
      y[i] = s;
    }
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
    return d;
  }

  /// Bitwise equality of every entry with its transpose.
  bool is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        if (at(cols_[k], i) != values_[k]) return false;
      }
    }
    return true;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) f(i, cols_[k], values_[k]);
    }
  }

 private:
  std::size_t n_{0};
  std::size_t row_of_last_{0};
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

struct LinearSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  /// Faces whose two-point transmissibility came out non-positive (skewed cells).
  std::vector<std::size_t> nonpositive_faces;
};

namespace detail {

// K_c (A.d) / |d|^2 with A the area-weighted normal pointing out of the cell
// and d the vector from the cell center to the face center.
inline double half_transmissibility(double k, const Vec3& area_normal, const Vec3& cell_center, const Vec3& face_center) {
  const Vec3 d = face_center - cell_center;
  const double dd = dot(d, d);
  if (dd == 0.0) return 0.0;
  return k * dot(area_normal, d) / dd;
}

} // namespace detail

/// Two-point transmissibility of every face: harmonic combination of the two
/// half transmissibilities for interior faces, the owner's half value for
/// boundary faces.
inline std::vector<double> face_transmissibilities(const PressureProblem& problem) {
  const auto& m = problem.mesh.get();
  std::vector<double> t(m.faces.size(), 0.0);
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& face = m.faces[f];
    const auto& own = m.cells[face.owner];
    const double to = detail::half_transmissibility(problem.permeability.at(own.material), face.geometry.normal,
                                                    own.center, face.geometry.center);
    if (face.is_boundary()) {
      t[f] = to;
      continue;
    }
    const auto& nb = m.cells[*face.neighbor];
    const double tn = detail::half_transmissibility(problem.permeability.at(nb.material), -face.geometry.normal,
                                                    nb.center, face.geometry.center);
    const double sum = to + tn;
    t[f] = sum != 0.0 ? to * tn / sum : 0.0;
  }
  return t;
}

/// Cell-centered two-point flux discretization. Row c states
///   sum_faces outward flux = f(center_c) * Vol_c.
inline LinearSystem assemble_tpfa(const PressureProblem& problem) {
  problem.validate();
  if (!problem.has_dirichlet()) {
    throw SingularSystemError("pressure problem has no Dirichlet face; the all-Neumann system is singular");
  }
  const auto& m = problem.mesh.get();
  const auto trans = face_transmissibilities(problem);

  LinearSystem sys;
  sys.rhs.assign(m.cells.size(), 0.0);
  for (std::size_t c = 0; c < m.cells.size(); ++c) sys.rhs[c] = problem.source[c] * m.cells[c].volume;

  std::vector<SparseMatrix::Triplet> entries;
  entries.reserve(m.faces.size() * 4);
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& face = m.faces[f];
    const std::size_t o = face.owner;
    if (!face.is_boundary()) {
      const double t = trans[f];
      if (!(t > 0.0)) sys.nonpositive_faces.push_back(f);
      const std::size_t n = *face.neighbor;
      entries.push_back({o, o, t});
      entries.push_back({n, n, t});
      entries.push_back({o, n, -t});
      entries.push_back({n, o, -t});
      continue;
    }
    const auto& bc = problem.boundary[f];
    if (!bc) continue;
    if (const auto* d = std::get_if<Dirichlet>(&*bc)) {
      const double t = trans[f];
      if (!(t > 0.0)) sys.nonpositive_faces.push_back(f);
      entries.push_back({o, o, t});
      sys.rhs[o] += t * d->pressure;
    } else {
      sys.rhs[o] -= std::get<Neumann>(*bc).flux * face.geometry.area();
    }
  }
  sys.matrix = SparseMatrix(m.cells.size(), std::move(entries));
  return sys;
}

struct SolveResult {
  std::vector<double> solution;
  int iterations{0};
  double relative_residual{0.0};
};

/// Jacobi-preconditioned conjugate gradients; stops once the true relative
/// residual ||b - Ax|| / ||b|| drops to `tol`.
inline SolveResult solve_pressure(const LinearSystem& sys, double tol, int max_iterations) {
  const auto& a = sys.matrix;
  const std::size_t n = a.size();
  if (sys.rhs.size() != n) throw ConstructionError("right-hand side size does not match the matrix");
  if (!(tol > 0.0)) throw ConfigError("solver tolerance must be positive");

  const auto norm2 = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  const auto dotv = [](std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  };

  SolveResult out;
  out.solution.assign(n, 0.0);
  const double bnorm = norm2(sys.rhs);
  if (bnorm == 0.0) return out;

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

  auto& x = out.solution;
  std::vector<double> r = sys.rhs;
  std::vector<double> z(n), p(n), ap(n);
  const auto restart = [&] {
    a.multiply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = sys.rhs[i] - ap[i];
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
  };
  restart();
  double rz = dotv(r, z);
  double rel = norm2(r) / bnorm;

  while (rel > tol) {
    if (out.iterations >= max_iterations) {
      throw ConvergenceError("conjugate gradients did not converge in " + std::to_string(max_iterations) +
                                 " iterations (relative residual " + std::to_string(rel) + ")",
                             rel, out.iterations);
    }
    ++out.iterations;
    a.multiply(p, ap);
    const double pap = dotv(p, ap);
    if (!(pap > 0.0)) {
      throw ConvergenceError("conjugate gradients broke down: matrix is not positive definite", rel, out.iterations);
    }
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    rel = norm2(r) / bnorm;
    if (rel <= tol) {
      // Confirm against the true residual; recursive residuals drift.
      restart();
      rz = dotv(r, z);
      rel = norm2(r) / bnorm;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dotv(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  out.relative_residual = rel;
  return out;
}

/// Darcy flux through every face: owner -> neighbor for interior faces,
/// outward for boundary faces.
inline std::vector<double> compute_fluxes(const PressureProblem& problem, std::span<const double> pressure) {
  const auto& m = problem.mesh.get();
  if (pressure.size() != m.cells.size()) throw ConfigError("pressure must hold one value per cell");
  const auto trans = face_transmissibilities(problem);
  std::vector<double> q(m.faces.size(), 0.0);
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& face = m.faces[f];
    const double po = pressure[face.owner];
    if (!face.is_boundary()) {
      q[f] = trans[f] * (po - pressure[*face.neighbor]);
      continue;
    }
    const auto& bc = problem.boundary[f];
    if (!bc) continue;
    if (const auto* d = std::get_if<Dirichlet>(&*bc)) {
      q[f] = trans[f] * (po - d->pressure);
    } else {
      q[f] = std::get<Neumann>(*bc).flux * face.geometry.area();
    }
  }
  return q;
}

struct FluxBalance {
  std::vector<double> residual;  // outward flux sum minus source integral, per cell
  double max_abs{0.0};
};

inline FluxBalance flux_balance(const PressureProblem& problem, std::span<const double> fluxes) {
  const auto& m = problem.mesh.get();
  FluxBalance b;
  b.residual.assign(m.cells.size(), 0.0);
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& face = m.faces[f];
    b.residual[face.owner] += fluxes[f];
    if (face.neighbor) b.residual[*face.neighbor] -= fluxes[f];
  }
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    b.residual[c] -= problem.source[c] * m.cells[c].volume;
    b.max_abs = std::max(b.max_abs, std::abs(b.residual[c]));
  }
  return b;
}

/// Assembles and solves with the problem's own solver settings.
inline SolveResult solve(const PressureProblem& problem) {
  return solve_pressure(assemble_tpfa(problem), problem.tolerance, problem.max_iterations);
}

} // namespace meshgen
