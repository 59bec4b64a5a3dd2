#pragma once

#include <meshgen/error.hpp>
#include <meshgen/projectors.hpp>
#include <meshgen/surfaces.hpp>
#include <meshgen/vec3.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace meshgen {

/// Cells per reference axis.
struct Resolution {
  int nx{1};
  int ny{1};
  int nz{1};

  int operator[](Axis a) const { return a == Axis::xi ? nx : (a == Axis::eta ? ny : nz); }
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct MeshCounts {
  std::int64_t nodes{0};
  std::int64_t cells{0};
  std::int64_t faces{0};
  friend bool operator==(const MeshCounts&, const MeshCounts&) = default;
};

inline MeshCounts mesh_counts(const Resolution& r) {
  if (r.nx < 1 || r.ny < 1 || r.nz < 1) {
    throw DomainError("resolution must be positive, got (" + std::to_string(r.nx) + "," + std::to_string(r.ny) +
                      "," + std::to_string(r.nz) + ")");
  }
  const std::int64_t nx = r.nx;
  const std::int64_t ny = r.ny;
  const std::int64_t nz = r.nz;
  return {(nx + 1) * (ny + 1) * (nz + 1), nx * ny * nz,
          nx * ny * (nz + 1) + nx * nz * (ny + 1) + ny * nz * (nx + 1)};
}

/// Monotone map of [0,1] onto itself used to cluster nodes along one axis.
class Grading {
 public:
  enum class Kind { uniform, power, tanh };

  Grading() = default;

  static Grading uniform() { return {}; }
  /// g(t) = t^exponent; exponent > 1 clusters nodes near t = 0.
  static Grading power(double exponent) { return Grading(Kind::power, exponent); }
  /// Symmetric clustering towards both ends; larger beta clusters harder.
  static Grading tanh(double beta) { return Grading(Kind::tanh, beta); }

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return parameter_; }

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    switch (kind_) {
      case Kind::uniform: return t;
      case Kind::power: return std::pow(t, parameter_);
      case Kind::tanh: return 0.5 * (1.0 + std::tanh(parameter_ * (t - 0.5)) / std::tanh(0.5 * parameter_));
    }
    return t;
  }

 private:
  Grading(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {
    if (kind_ != Kind::uniform && !(std::isfinite(parameter_) && parameter_ > 0.0)) {
      throw ConstructionError("grading parameter must be positive and finite, got " + std::to_string(parameter_));
    }
  }

  Kind kind_{Kind::uniform};
  double parameter_{1.0};
};

namespace detail {

inline Vec3 tensor_eval(std::span<const ProjectorSpec* const> factors, const RefPoint& at, const DerivOrder& order) {
  if (factors.size() == 1) return eval_projector(*factors[0], at, order);
  const ProjectorSpec& outer = *factors[0];
  const Axis a = outer.axis();
  std::array<double, kMaxLagrangeOrder + 1> phi{};
  const std::size_t n = outer.term_count();
  outer.basis(at[a], order[a], std::span<double>(phi.data(), n));

  Vec3 r{};
  for (std::size_t k = 0; k < n; ++k) {
    if (phi[k] == 0.0) continue;
    const BlendTerm term = outer.term(k);
    RefPoint q = at;
    q[a] = term.node;
    DerivOrder inner = order;
    inner[a] = term.derivative;
    r += phi[k] * tensor_eval(factors.subspan(1), q, inner);
  }
  return r;
}

} // namespace detail

/// Tensor product P_A o P_B (o P_C): the outer projector's blending functions
/// applied to the inner product restricted to the outer projector's nodes
/// (and, for Hermite, to the inner product's derivative there).
///
/// Factors must vary in distinct axes; the only exception is a projector
/// composed with itself, which reproduces the projector.
class TensorProduct {
 public:
  TensorProduct(std::initializer_list<const ProjectorSpec*> factors) : factors_(factors) { validate(); }
  explicit TensorProduct(std::vector<const ProjectorSpec*> factors) : factors_(std::move(factors)) { validate(); }

  Vec3 eval(const RefPoint& at, const DerivOrder& order = DerivOrder::none()) const {
    at.require_in_cube();
    return detail::tensor_eval(factors_, at, order);
  }

  std::span<const ProjectorSpec* const> factors() const noexcept { return factors_; }

 private:
  void validate() const {
    if (factors_.empty()) throw ConstructionError("tensor product needs at least one projector");
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i] == nullptr) throw ConstructionError("tensor product factor is null");
      for (std::size_t j = 0; j < i; ++j) {
        if (factors_[i] != factors_[j] && factors_[i]->axis() == factors_[j]->axis()) {
          throw ConstructionError(std::string("tensor product of two distinct projectors along ") +
                                  axis_name(factors_[i]->axis()));
        }
      }
    }
  }

  std::vector<const ProjectorSpec*> factors_;
};

inline Vec3 tensor_product(const ProjectorSpec& a, const ProjectorSpec& b, const RefPoint& at) {
  return TensorProduct{&a, &b}.eval(at);
}

inline Vec3 tensor_product(const ProjectorSpec& a, const ProjectorSpec& b, const ProjectorSpec& c,
                           const RefPoint& at) {
  return TensorProduct{&a, &b, &c}.eval(at);
}

/// P_A (+) P_B = P_A + P_B - P_A o P_B.
inline Vec3 boolean_sum(const ProjectorSpec& a, const ProjectorSpec& b, const RefPoint& at,
                        const DerivOrder& order = DerivOrder::none()) {
  const TensorProduct ab{&a, &b};
  const Vec3 pa = eval_projector(a, at, order);
  const Vec3 pb = eval_projector(b, at, order);
  return pa + pb - ab.eval(at, order);
}

/// One hexahedral TFI block: a projector per reference axis plus sampling.
class BlockSpec {
 public:
  BlockSpec(ProjectorSpec p_xi, ProjectorSpec p_eta, ProjectorSpec p_kappa, Resolution resolution,
            std::string material, std::array<Grading, 3> grading = {})
      : projectors_{std::move(p_xi), std::move(p_eta), std::move(p_kappa)},
        resolution_(resolution),
        material_(std::move(material)),
        grading_(grading) {
    for (Axis a : kAxes) {
      if (projectors_[index_of(a)].axis() != a) {
        throw ConstructionError(std::string("projector in the ") + axis_name(a) + " slot varies along " +
                                axis_name(projectors_[index_of(a)].axis()));
      }
    }
    mesh_counts(resolution_);
  }

  const ProjectorSpec& projector(Axis a) const { return projectors_[index_of(a)]; }
  const Resolution& resolution() const noexcept { return resolution_; }
  const std::string& material() const noexcept { return material_; }
  const Grading& grading(Axis a) const { return grading_[index_of(a)]; }

  /// Surface bounding the block at reference coordinate a = side.
  const ParametricSurface& face(Axis a, int side) const { return projector(a).boundary(side); }

 private:
  std::array<ProjectorSpec, 3> projectors_;
  Resolution resolution_;
  std::string material_;
  std::array<Grading, 3> grading_;
};

/// r(xi,eta,kappa) = P_xi + P_eta + P_kappa - P_xi.eta - P_xi.kappa - P_eta.kappa + P_xi.eta.kappa,
/// or its partial derivative of the given order.
inline Vec3 boolean_sum_eval(const BlockSpec& b, const RefPoint& at, const DerivOrder& order = DerivOrder::none()) {
  at.require_in_cube();
  const ProjectorSpec* px = &b.projector(Axis::xi);
  const ProjectorSpec* py = &b.projector(Axis::eta);
  const ProjectorSpec* pz = &b.projector(Axis::kappa);
  Vec3 r = eval_projector(*px, at, order);
  r += eval_projector(*py, at, order);
  r += eval_projector(*pz, at, order);
  r -= TensorProduct{px, py}.eval(at, order);
  r -= TensorProduct{px, pz}.eval(at, order);
  r -= TensorProduct{py, pz}.eval(at, order);
  r += TensorProduct{px, py, pz}.eval(at, order);
  return r;
}

/// Exact partial derivative of the TFI map along one reference axis.
inline Vec3 covariant_vector(const BlockSpec& b, const RefPoint& at, Axis axis) {
  return boolean_sum_eval(b, at, DerivOrder::along(axis));
}

/// det[r_xi, r_eta, r_kappa]; positive for a non-inverted, right-handed map.
inline double jacobian_determinant(const BlockSpec& b, const RefPoint& at) {
  const Vec3 rx = covariant_vector(b, at, Axis::xi);
  const Vec3 ry = covariant_vector(b, at, Axis::eta);
  const Vec3 rz = covariant_vector(b, at, Axis::kappa);
  return dot(rx, cross(ry, rz));
}

/// One of the 12 block edges: where face (a = side_a) meets face (b = side_b).
struct BlockEdge {
  Axis a{Axis::xi};
  int side_a{0};
  Axis b{Axis::eta};
  int side_b{0};
  double gap{0.0};

  std::string describe() const {
    return std::string(axis_name(a)) + "=" + std::to_string(side_a) + " / " + axis_name(b) + "=" +
           std::to_string(side_b);
  }
};

namespace detail {

inline SurfaceEdge edge_on_face(Axis face_axis, Axis fixed_axis, int side) {
  const auto params = surface_axes(face_axis);
  return {params[0] == fixed_axis ? SurfaceParam::u : SurfaceParam::v, static_cast<double>(side)};
}

} // namespace detail

/// Gap between the two face surfaces along each of the 12 block edges.
inline std::vector<BlockEdge> block_edges(const BlockSpec& b) {
  std::vector<BlockEdge> edges;
  edges.reserve(12);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const Axis a = kAxes[i];
      const Axis c = kAxes[j];
      for (int sa = 0; sa < 2; ++sa) {
        for (int sc = 0; sc < 2; ++sc) {
          const EdgePair pair{detail::edge_on_face(a, c, sc), detail::edge_on_face(c, a, sa)};
          edges.push_back({a, sa, c, sc, edge_gap(b.face(a, sa), b.face(c, sc), pair)});
        }
      }
    }
  }
  return edges;
}

/// Absolute conformity tolerance: 1e-9 scaled by the block size (at least 1).
inline double conformity_tolerance(const BlockSpec& b) {
  Vec3 lo = b.face(Axis::xi, 0).eval(0.0, 0.0);
  Vec3 hi = lo;
  for (Axis a : kAxes) {
    for (int side = 0; side < 2; ++side) {
      for (double u : {0.0, 1.0}) {
        for (double v : {0.0, 1.0}) {
          const Vec3 p = b.face(a, side).eval(u, v);
          for (std::size_t k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
          }
        }
      }
    }
  }
  return 1e-9 * std::max(1.0, distance(lo, hi));
}

/// Edges whose face surfaces disagree by more than `tol`.
inline std::vector<BlockEdge> nonconforming_edges(const BlockSpec& b, double tol) {
  std::vector<BlockEdge> bad;
  for (const auto& e : block_edges(b)) {
    if (!(e.gap <= tol)) bad.push_back(e);
  }
  return bad;
}

inline std::vector<BlockEdge> nonconforming_edges(const BlockSpec& b) {
  return nonconforming_edges(b, conformity_tolerance(b));
}

/// (nx+1) x (ny+1) x (nz+1) lattice of physical points, ix fastest.
class StructuredGrid {
 public:
  StructuredGrid(Resolution resolution, std::vector<Vec3> nodes, std::string material,
                 std::array<std::vector<double>, 3> samples = {})
      : resolution_(resolution), nodes_(std::move(nodes)), material_(std::move(material)),
        samples_(std::move(samples)) {
    const auto counts = mesh_counts(resolution_);
    if (static_cast<std::int64_t>(nodes_.size()) != counts.nodes) {
      throw ConstructionError("structured grid expects " + std::to_string(counts.nodes) + " nodes, got " +
                              std::to_string(nodes_.size()));
    }
  }

  const Resolution& resolution() const noexcept { return resolution_; }
  const std::string& material() const noexcept { return material_; }
  std::span<const Vec3> nodes() const noexcept { return nodes_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(resolution_.nx) * resolution_.ny * resolution_.nz;
  }

  std::size_t index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(resolution_.nx + 1) *
               (static_cast<std::size_t>(iy) + static_cast<std::size_t>(resolution_.ny + 1) * iz);
  }

  const Vec3& node(int ix, int iy, int iz) const { return nodes_[index(ix, iy, iz)]; }

  /// Reference coordinates of the lattice lines along `a` (empty if unknown).
  std::span<const double> samples(Axis a) const { return samples_[index_of(a)]; }

 private:
  Resolution resolution_;
  std::vector<Vec3> nodes_;
  std::string material_;
  std::array<std::vector<double>, 3> samples_;
};

/// Grid generation in a block: node (ix,iy,iz) is the TFI map evaluated at the
/// graded reference coordinates (g(ix/nx), g(iy/ny), g(iz/nz)).
inline StructuredGrid generate_grid(const BlockSpec& b) {
  const auto bad = nonconforming_edges(b);
  if (!bad.empty()) {
    std::string msg = "block surfaces do not conform along edge " + bad.front().describe() +
                      " (gap " + std::to_string(bad.front().gap) + ")";
    if (bad.size() > 1) msg += " and " + std::to_string(bad.size() - 1) + " more edge(s)";
    throw SpecError(msg);
  }

  const Resolution& res = b.resolution();
  std::array<std::vector<double>, 3> samples;
  for (Axis a : kAxes) {
    const int n = res[a];
    auto& s = samples[index_of(a)];
    s.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) s[static_cast<std::size_t>(i)] = b.grading(a)(static_cast<double>(i) / n);
  }

  std::vector<Vec3> nodes;
  nodes.reserve(static_cast<std::size_t>(mesh_counts(res).nodes));
  for (int iz = 0; iz <= res.nz; ++iz) {
    for (int iy = 0; iy <= res.ny; ++iy) {
      for (int ix = 0; ix <= res.nx; ++ix) {
        const RefPoint at(samples[0][static_cast<std::size_t>(ix)], samples[1][static_cast<std::size_t>(iy)],
                          samples[2][static_cast<std::size_t>(iz)]);
        nodes.push_back(boolean_sum_eval(b, at));
      }
    }
  }
  return StructuredGrid(res, std::move(nodes), b.material(), std::move(samples));
}

/// Generates independent blocks on up to `threads` worker threads. Output order
/// and content do not depend on the thread count; the first failing block (by
/// index) has its exception rethrown.
inline std::vector<StructuredGrid> generate_grids(std::span<const BlockSpec> blocks, unsigned threads = 1) {
  std::vector<std::optional<StructuredGrid>> out(blocks.size());
  std::vector<std::exception_ptr> errors(blocks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < blocks.size(); i = next++) {
      try {
        out[i].emplace(generate_grid(blocks[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(std::max<std::size_t>(blocks.size(), 1)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<StructuredGrid> grids;
  grids.reserve(blocks.size());
  for (auto& g : out) grids.push_back(std::move(*g));
  return grids;
}

} // namespace meshgen
