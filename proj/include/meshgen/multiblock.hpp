#pragma once

#include <meshgen/error.hpp>
#include <meshgen/geometry.hpp>
#include <meshgen/tfi.hpp>
#include <meshgen/vec3.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace meshgen {

/// Logical address of a cell inside its source block.
struct CellAddress {
  std::size_t block{0};
  int ix{0};
  int iy{0};
  int iz{0};
};

struct MeshCell {
  std::array<std::size_t, 8> nodes{};  // HexCell corner order
  std::string material;
  CellAddress address;
  double volume{0.0};
  Vec3 center;
  bool degenerate{false};
};

/// Which block side a boundary face came from.
struct BoundaryTag {
  std::size_t block{0};
  HexSide side{HexSide::xi0};
};

struct MeshFace {
  std::array<std::size_t, 4> nodes{};  // cyclic, outward from the owner
  std::size_t owner{0};
  HexSide owner_side{HexSide::xi0};
  std::optional<std::size_t> neighbor;
  std::optional<BoundaryTag> boundary;
  FaceGeometry geometry;

  bool is_boundary() const noexcept { return !neighbor.has_value(); }
};

/// Node sharing between two blocks, recorded while merging.
struct InterfaceStats {
  std::size_t block_a{0};
  std::size_t block_b{0};
  std::size_t shared_nodes{0};
  double max_gap{0.0};
};

/// Globally numbered hexahedral mesh assembled from structured blocks.
class MultiblockMesh {
 public:
  std::vector<Vec3> nodes;
  std::vector<MeshCell> cells;
  std::vector<MeshFace> faces;
  /// Resolution of each source block, in block order.
  std::vector<Resolution> block_resolutions;
  /// Local (ix fastest) node index -> global node id, per block.
  std::vector<std::vector<std::size_t>> block_node_ids;
  /// Node sharing per block pair (a < b), ordered by (a, b).
  std::vector<InterfaceStats> interfaces;
  /// Coincident local nodes removed during merging (all blocks).
  std::size_t merged_duplicates{0};
  double merge_tolerance{0.0};

  std::size_t block_count() const noexcept { return block_resolutions.size(); }

  HexCell hex(std::size_t cell) const {
    HexCell h;
    for (std::size_t k = 0; k < 8; ++k) h.r[k] = nodes[cells[cell].nodes[k]];
    return h;
  }

  double total_volume() const {
    double v = 0.0;
    for (const auto& c : cells) v += c.volume;
    return v;
  }
};

namespace detail {

struct CellKey {
  std::int64_t i;
  std::int64_t j;
  std::int64_t k;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& c) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {c.i, c.j, c.k}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Uniform hash grid over points for fixed-radius neighbour queries.
class PointHash {
 public:
  explicit PointHash(double cell) : cell_(cell) {}

  CellKey key(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / cell_)), static_cast<std::int64_t>(std::floor(p.y / cell_)),
            static_cast<std::int64_t>(std::floor(p.z / cell_))};
  }

  void insert(const Vec3& p, std::size_t id) { buckets_[key(p)].push_back(id); }

  /// Ids whose bucket overlaps the axis-aligned box [lo, hi].
  template <class F>
  void for_each_in_box(const Vec3& lo, const Vec3& hi, F&& f) const {
    const CellKey a = key(lo);
    const CellKey b = key(hi);
    for (std::int64_t i = a.i; i <= b.i; ++i) {
      for (std::int64_t j = a.j; j <= b.j; ++j) {
        for (std::int64_t k = a.k; k <= b.k; ++k) {
          const auto it = buckets_.find({i, j, k});
          if (it == buckets_.end()) continue;
          for (std::size_t id : it->second) f(id);
        }
      }
    }
  }

 private:
  double cell_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> buckets_;
};

struct QuadKeyHash {
  std::size_t operator()(const std::array<std::size_t, 4>& q) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t v : q) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + (vb * denom) * ab + (vc * denom) * ac;
}

// True if p lies on the quad: its projection falls inside one of the quad's
// triangles (up to a tiny in-plane slack) and it sits close to that triangle's
// plane. The normal slack absorbs the sag of curved faces between corners.
inline bool point_on_quad(const Vec3& p, const std::array<Vec3, 4>& q, double tol) {
  double diam = std::max(distance(q[0], q[2]), distance(q[1], q[3]));
  const double normal_slack = std::max(tol, 0.05 * diam);
  const double plane_slack = std::max(tol, 1e-9 * diam);
  static constexpr std::array<std::array<int, 3>, 4> tris{{{0, 1, 2}, {0, 2, 3}, {1, 2, 3}, {1, 3, 0}}};
  for (const auto& t : tris) {
    const Vec3& a = q[t[0]];
    const Vec3& b = q[t[1]];
    const Vec3& c = q[t[2]];
    const Vec3 n = normalized(cross(b - a, c - a));
    if (norm(n) == 0.0) continue;
    const double h = dot(p - a, n);
    if (std::abs(h) > normal_slack) continue;
    const Vec3 in_plane = p - h * n;
    if (distance(in_plane, closest_point_on_triangle(in_plane, a, b, c)) <= plane_slack) return true;
  }
  return false;
}

} // namespace detail

/// Default merge tolerance: 1e-9 times the diagonal of the grids' bounding box.
inline double default_merge_tolerance(std::span<const StructuredGrid> grids) {
  bool first = true;
  Vec3 lo;
  Vec3 hi;
  for (const auto& g : grids) {
    for (const auto& p : g.nodes()) {
      if (first) {
        lo = hi = p;
        first = false;
      }
      for (std::size_t k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], p[k]);
        hi[k] = std::max(hi[k], p[k]);
      }
    }
  }
  const double diag = distance(lo, hi);
  return 1e-9 * (diag > 0.0 ? diag : 1.0);
}

/// Merges independently generated blocks into one conforming mesh.
///
/// Nodes closer than `merge_tol` are unified, keeping the lowest
/// (block, local index) representative. Faces shared by two cells become
/// interior faces; interfaces whose lattices overlap without matching node
/// for node are rejected.
inline MultiblockMesh assemble_multiblock(std::span<const StructuredGrid> grids, double merge_tol) {
  if (grids.empty()) throw AssemblyError("assembly needs at least one block");
  if (!(merge_tol > 0.0) || !std::isfinite(merge_tol)) {
    throw AssemblyError("merge tolerance must be positive, got " + std::to_string(merge_tol));
  }

  MultiblockMesh mesh;
  mesh.merge_tolerance = merge_tol;
  detail::PointHash hash(4.0 * merge_tol);
  // Blocks contributing to each global node, with each contributor's distance to the representative.
  std::vector<std::vector<std::pair<std::size_t, double>>> contributors;
  std::map<std::pair<std::size_t, std::size_t>, InterfaceStats> pairs;

  for (std::size_t b = 0; b < grids.size(); ++b) {
    const auto& g = grids[b];
    mesh.block_resolutions.push_back(g.resolution());
    auto& ids = mesh.block_node_ids.emplace_back();
    ids.reserve(g.node_count());
    for (const Vec3& p : g.nodes()) {
      if (!is_finite(p)) throw AssemblyError("block " + std::to_string(b) + " has a non-finite node");
      std::optional<std::size_t> match;
      const Vec3 slack{merge_tol, merge_tol, merge_tol};
      hash.for_each_in_box(p - slack, p + slack, [&](std::size_t id) {
        if (distance(mesh.nodes[id], p) <= merge_tol && (!match || id < *match)) match = id;
      });
      if (match) {
        const double gap = distance(mesh.nodes[*match], p);
        auto& list = contributors[*match];
        for (const auto& [other, other_gap] : list) {
          if (other == b) continue;
          auto& s = pairs[{other, b}];
          s.block_a = other;
          s.block_b = b;
          s.max_gap = std::max({s.max_gap, gap, other_gap});
        }
        list.emplace_back(b, gap);
        ++mesh.merged_duplicates;
        ids.push_back(*match);
      } else {
        const std::size_t id = mesh.nodes.size();
        mesh.nodes.push_back(p);
        contributors.push_back({{b, 0.0}});
        hash.insert(p, id);
        ids.push_back(id);
      }
    }
  }
  // A node met twice within one block counts once per pair.
  for (auto& [key, s] : pairs) {
    std::size_t shared = 0;
    for (const auto& list : contributors) {
      bool has_a = false;
      bool has_b = false;
      for (const auto& c : list) {
        has_a |= c.first == key.first;
        has_b |= c.first == key.second;
      }
      shared += (has_a && has_b) ? 1 : 0;
    }
    s.shared_nodes = shared;
    mesh.interfaces.push_back(s);
  }

  for (std::size_t b = 0; b < grids.size(); ++b) {
    const auto& g = grids[b];
    const auto& res = g.resolution();
    const auto& ids = mesh.block_node_ids[b];
    for (int iz = 0; iz < res.nz; ++iz) {
      for (int iy = 0; iy < res.ny; ++iy) {
        for (int ix = 0; ix < res.nx; ++ix) {
          MeshCell cell;
          for (int k = 0; k < 8; ++k) {
            cell.nodes[static_cast<std::size_t>(k)] = ids[g.index(ix + (k & 1), iy + ((k >> 1) & 1), iz + ((k >> 2) & 1))];
          }
          cell.material = g.material();
          cell.address = {b, ix, iy, iz};
          mesh.cells.push_back(std::move(cell));
        }
      }
    }
  }
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const HexCell h = mesh.hex(c);
    const HexVolume v = hex_volume(h);
    mesh.cells[c].volume = v.volume;
    mesh.cells[c].degenerate = v.degenerate_tet;
    mesh.cells[c].center = cell_center(h);
  }

  std::unordered_map<std::array<std::size_t, 4>, std::size_t, detail::QuadKeyHash> face_of;
  face_of.reserve(mesh.cells.size() * 4);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cell = mesh.cells[c];
    for (HexSide side : kHexSides) {
      const auto& local = kHexFaces[static_cast<std::size_t>(side)];
      std::array<std::size_t, 4> quad;
      for (std::size_t k = 0; k < 4; ++k) quad[k] = cell.nodes[static_cast<std::size_t>(local[k])];
      auto key = quad;
      std::sort(key.begin(), key.end());
      const auto [it, inserted] = face_of.try_emplace(key, mesh.faces.size());
      if (inserted) {
        MeshFace f;
        f.nodes = quad;
        f.owner = c;
        f.owner_side = side;
        f.boundary = BoundaryTag{cell.address.block, side};
        f.geometry = quad_geometry(mesh.nodes[quad[0]], mesh.nodes[quad[1]], mesh.nodes[quad[2]], mesh.nodes[quad[3]]);
        f.geometry.corners = quad;
        mesh.faces.push_back(f);
      } else {
        auto& f = mesh.faces[it->second];
        if (f.neighbor) {
          throw AssemblyError("face shared by more than two cells (cells " + std::to_string(f.owner) + ", " +
                              std::to_string(*f.neighbor) + ", " + std::to_string(c) + ")");
        }
        f.neighbor = c;
        f.boundary.reset();
      }
    }
  }

  // Hanging-node check: no node of another block may sit on a boundary face.
  std::vector<std::vector<std::size_t>> node_blocks(mesh.nodes.size());
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    for (const auto& c : contributors[n]) {
      auto& nb = node_blocks[n];
      if (std::find(nb.begin(), nb.end(), c.first) == nb.end()) nb.push_back(c.first);
    }
  }
  if (grids.size() > 1) {
    double max_diam = 0.0;
    std::vector<char> on_boundary(mesh.nodes.size(), 0);
    for (const auto& f : mesh.faces) {
      if (!f.is_boundary()) continue;
      for (std::size_t n : f.nodes) on_boundary[n] = 1;
      max_diam = std::max({max_diam, distance(mesh.nodes[f.nodes[0]], mesh.nodes[f.nodes[2]]),
                           distance(mesh.nodes[f.nodes[1]], mesh.nodes[f.nodes[3]])});
    }
    detail::PointHash boundary_hash(std::max(max_diam, merge_tol));
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
      if (on_boundary[n]) boundary_hash.insert(mesh.nodes[n], n);
    }
    for (const auto& f : mesh.faces) {
      if (!f.is_boundary()) continue;
      const std::size_t block = f.boundary->block;
      std::array<Vec3, 4> q;
      Vec3 lo = mesh.nodes[f.nodes[0]];
      Vec3 hi = lo;
      for (std::size_t k = 0; k < 4; ++k) {
        q[k] = mesh.nodes[f.nodes[k]];
        for (std::size_t d = 0; d < 3; ++d) {
          lo[d] = std::min(lo[d], q[k][d]);
          hi[d] = std::max(hi[d], q[k][d]);
        }
      }
      const double pad = std::max(merge_tol, 0.05 * std::max(distance(q[0], q[2]), distance(q[1], q[3])));
      const Vec3 slack{pad, pad, pad};
      std::vector<std::size_t> candidates;
      boundary_hash.for_each_in_box(lo - slack, hi + slack, [&](std::size_t n) {
        const auto& nb = node_blocks[n];
        if (std::find(nb.begin(), nb.end(), block) != nb.end()) return;
        if (detail::point_on_quad(mesh.nodes[n], q, merge_tol)) candidates.push_back(n);
      });
      if (!candidates.empty()) {
        const std::size_t n = *std::min_element(candidates.begin(), candidates.end());
        const Vec3& p = mesh.nodes[n];
        throw AssemblyError("non-matching interface between block " + std::to_string(block) + " and block " +
                            std::to_string(node_blocks[n].front()) + ": node " + std::to_string(n) + " at (" +
                            std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.z) +
                            ") hangs on a boundary face of block " + std::to_string(block));
      }
    }
  }
  return mesh;
}

inline MultiblockMesh assemble_multiblock(std::span<const StructuredGrid> grids) {
  return assemble_multiblock(grids, default_merge_tolerance(grids));
}

/// Returns a copy of `mesh` with every cell tagged by its block's material.
inline MultiblockMesh assign_materials(MultiblockMesh mesh, const std::map<std::size_t, std::string>& by_block) {
  for (std::size_t b = 0; b < mesh.block_count(); ++b) {
    if (!by_block.contains(b)) throw ConfigError("no material given for block " + std::to_string(b));
  }
  for (auto& c : mesh.cells) c.material = by_block.at(c.address.block);
  return mesh;
}

struct InterfacePairReport {
  std::size_t block_a{0};
  std::size_t block_b{0};
  std::size_t shared_nodes{0};
  double max_gap{0.0};
  std::size_t faces{0};
};

struct InterfaceReport {
  std::vector<InterfacePairReport> pairs;
  MeshCounts block_totals;   // mesh_counts summed over blocks
  MeshCounts mesh_totals;    // entities in the assembled mesh
  std::size_t shared_nodes{0};
  std::size_t interface_faces{0};

  /// Block totals minus shared entities reproduce the assembled counts.
  bool consistent() const {
    return block_totals.nodes - static_cast<std::int64_t>(shared_nodes) == mesh_totals.nodes &&
           block_totals.cells == mesh_totals.cells &&
           block_totals.faces - static_cast<std::int64_t>(interface_faces) == mesh_totals.faces;
  }
};

inline InterfaceReport interface_report(const MultiblockMesh& mesh) {
  InterfaceReport r;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> face_counts;
  for (const auto& f : mesh.faces) {
    if (f.is_boundary()) continue;
    std::size_t a = mesh.cells[f.owner].address.block;
    std::size_t b = mesh.cells[*f.neighbor].address.block;
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    ++face_counts[{a, b}];
  }
  for (const auto& s : mesh.interfaces) {
    InterfacePairReport p{s.block_a, s.block_b, s.shared_nodes, s.max_gap, 0};
    if (auto it = face_counts.find({s.block_a, s.block_b}); it != face_counts.end()) p.faces = it->second;
    r.interface_faces += p.faces;
    r.pairs.push_back(p);
  }
  for (const auto& res : mesh.block_resolutions) {
    const auto c = mesh_counts(res);
    r.block_totals.nodes += c.nodes;
    r.block_totals.cells += c.cells;
    r.block_totals.faces += c.faces;
  }
  r.shared_nodes = mesh.merged_duplicates;
  r.mesh_totals = {static_cast<std::int64_t>(mesh.nodes.size()), static_cast<std::int64_t>(mesh.cells.size()),
                   static_cast<std::int64_t>(mesh.faces.size())};
  return r;
}

} // namespace meshgen
