#pragma once

// Legacy ASCII VTK unstructured-grid export.

#include <meshgen/error.hpp>
#include <meshgen/multiblock.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace meshgen {

/// Corner permutation from the mesh's xi-fastest order to VTK_HEXAHEDRON.
inline constexpr std::array<int, 8> kVtkHexOrder{0, 1, 3, 2, 4, 5, 7, 6};
inline constexpr int kVtkHexahedron = 12;

struct CellField {
  std::string name;
  std::variant<std::vector<int>, std::vector<double>> values;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// Writes the mesh and its cell fields; output depends only on the inputs.
inline void write_vtk(std::ostream& out, const MultiblockMesh& mesh, std::span<const CellField> fields,
                      std::string_view title = "meshgen hexahedral mesh") {
  const std::size_t nc = mesh.cells.size();
  for (const auto& f : fields) {
    const std::size_t n = std::visit([](const auto& v) { return v.size(); }, f.values);
    if (n != nc) throw IoError("cell field '" + f.name + "' has " + std::to_string(n) + " values for " +
                               std::to_string(nc) + " cells");
  }
  std::string head(title.substr(0, 255));
  for (char& ch : head) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  out << "# vtk DataFile Version 3.0\n" << head << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.nodes.size() << " double\n";
  for (const auto& p : mesh.nodes) {
    out << detail::format_double(p.x) << ' ' << detail::format_double(p.y) << ' ' << detail::format_double(p.z)
        << '\n';
  }
  out << "CELLS " << nc << ' ' << nc * 9 << '\n';
  for (const auto& c : mesh.cells) {
    out << 8;
    for (int k : kVtkHexOrder) out << ' ' << c.nodes[static_cast<std::size_t>(k)];
    out << '\n';
  }
  out << "CELL_TYPES " << nc << '\n';
  for (std::size_t c = 0; c < nc; ++c) out << kVtkHexahedron << '\n';
  if (fields.empty()) return;
  out << "CELL_DATA " << nc << '\n';
  for (const auto& f : fields) {
    if (const auto* iv = std::get_if<std::vector<int>>(&f.values)) {
      out << "SCALARS " << f.name << " int 1\nLOOKUP_TABLE default\n";
      for (int v : *iv) out << v << '\n';
    } else {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : std::get<std::vector<double>>(f.values)) out << detail::format_double(v) << '\n';
    }
  }
}

inline void export_vtk(const std::filesystem::path& path, const MultiblockMesh& mesh,
                       std::span<const CellField> fields, std::string_view title = "meshgen hexahedral mesh") {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_vtk(out, mesh, fields, title);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

} // namespace meshgen
