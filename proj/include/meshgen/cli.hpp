#pragma once

// Command-line driver: meshgen {generate,solve,inspect,check} <spec>.

#include <meshgen/error.hpp>
#include <meshgen/fvsolve.hpp>
#include <meshgen/geometry.hpp>
#include <meshgen/log.hpp>
#include <meshgen/multiblock.hpp>
#include <meshgen/scene.hpp>
#include <meshgen/vtk.hpp>

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace meshgen::cli {

enum ExitCode : int { kSuccess = 0, kValidationError = 1, kRuntimeError = 2 };

struct Options {
  std::string command;
  std::string spec;
  std::string output;
  bool report{false};
  unsigned threads{1};
};

namespace detail {

inline std::string fmt(double v) { return meshgen::detail::format_double(v); }

inline std::optional<SceneSpec> load(const Options& o, std::ostream& err) {
  auto parsed = parse_spec(o.spec);
  if (!parsed.ok()) {
    for (const auto& d : parsed.errors) err << o.spec << ": " << d.format() << '\n';
    err << parsed.errors.size() << " error(s) in " << o.spec << '\n';
    return std::nullopt;
  }
  log::info("parsed " + o.spec + ": " + std::to_string(parsed.scene->blocks.size()) + " block(s)");
  return std::move(parsed.scene);
}

inline std::vector<int> material_ids(const SceneSpec& scene, const MultiblockMesh& mesh) {
  std::vector<int> ids;
  ids.reserve(mesh.cells.size());
  for (const auto& c : mesh.cells) ids.push_back(static_cast<int>(scene.material_index(c.material).value()));
  return ids;
}

inline std::vector<double> volumes(const MultiblockMesh& mesh) {
  std::vector<double> v;
  v.reserve(mesh.cells.size());
  for (const auto& c : mesh.cells) v.push_back(c.volume);
  return v;
}

inline std::string title(const SceneSpec& scene) {
  std::string t = "meshgen hexahedral mesh; material ids:";
  for (std::size_t i = 0; i < scene.materials.size(); ++i) t += " " + std::to_string(i) + "=" + scene.materials[i].name;
  return t;
}

inline nlohmann::ordered_json mesh_report(const SceneSpec& scene, const MultiblockMesh& mesh) {
  nlohmann::ordered_json r;
  r["blocks"] = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < scene.blocks.size(); ++b) {
    const auto c = mesh_counts(mesh.block_resolutions[b]);
    r["blocks"].push_back({{"id", scene.blocks[b].id},
                           {"material", scene.blocks[b].block.material()},
                           {"nodes", c.nodes},
                           {"cells", c.cells},
                           {"faces", c.faces}});
  }
  const auto ir = interface_report(mesh);
  r["mesh"] = {{"nodes", mesh.nodes.size()},
               {"cells", mesh.cells.size()},
               {"faces", mesh.faces.size()},
               {"volume", mesh.total_volume()}};
  r["interfaces"] = nlohmann::ordered_json::array();
  for (const auto& p : ir.pairs) {
    r["interfaces"].push_back({{"a", scene.blocks[p.block_a].id},
                               {"b", scene.blocks[p.block_b].id},
                               {"shared_nodes", p.shared_nodes},
                               {"faces", p.faces},
                               {"max_gap", p.max_gap}});
  }
  r["consistent"] = ir.consistent();
  return r;
}

inline int generate(const Options& o, std::ostream& out, std::ostream& err, bool with_solve) {
  const auto scene = load(o, err);
  if (!scene) return kValidationError;
  if (with_solve && !scene->problem) {
    err << o.spec << ": " << codes::kMissingField << " /problem: solve needs a 'problem' section\n";
    return kValidationError;
  }
  const auto mesh = build_mesh(*scene, o.threads);
  log::info("assembled " + std::to_string(mesh.nodes.size()) + " nodes, " + std::to_string(mesh.cells.size()) +
            " cells");
  for (const auto& c : mesh.cells) {
    if (c.degenerate) {
      log::warn("degenerate cell in block " + scene->blocks[c.address.block].id);
      break;
    }
  }

  std::vector<CellField> fields{{"material", material_ids(*scene, mesh)}, {"volume", volumes(mesh)}};
  auto report = mesh_report(*scene, mesh);
  if (with_solve) {
    const auto problem = make_problem(*scene, mesh);
    const auto result = solve(problem);
    const auto fluxes = compute_fluxes(problem, result.solution);
    const auto balance = flux_balance(problem, fluxes);
    log::info("solver converged in " + std::to_string(result.iterations) + " iterations");
    fields.push_back({"pressure", result.solution});
    report["solve"] = {{"iterations", result.iterations},
                       {"relative_residual", result.relative_residual},
                       {"max_cell_residual", balance.max_abs}};
  }
  export_vtk(o.output, mesh, fields, title(*scene));
  if (o.report) out << report.dump(2) << '\n';
  return kSuccess;
}

inline int inspect(const Options& o, std::ostream& out, std::ostream& err) {
  const auto scene = load(o, err);
  if (!scene) return kValidationError;
  const auto mesh = build_mesh(*scene, o.threads);
  for (std::size_t b = 0; b < scene->blocks.size(); ++b) {
    const auto& r = mesh.block_resolutions[b];
    const auto c = mesh_counts(r);
    out << "block " << scene->blocks[b].id << ": resolution " << r.nx << "x" << r.ny << "x" << r.nz << ", nodes "
        << c.nodes << ", cells " << c.cells << ", faces " << c.faces << '\n';
  }
  out << "mesh: nodes " << mesh.nodes.size() << ", cells " << mesh.cells.size() << ", faces " << mesh.faces.size()
      << '\n';
  const auto ir = interface_report(mesh);
  for (const auto& p : ir.pairs) {
    out << "interface " << scene->blocks[p.block_a].id << "/" << scene->blocks[p.block_b].id << ": shared nodes "
        << p.shared_nodes << ", faces " << p.faces << ", max gap " << fmt(p.max_gap) << '\n';
  }
  out << "interfaces consistent: " << (ir.consistent() ? "yes" : "no") << '\n';

  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  double jmin = vmin;
  std::size_t inverted = 0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    vmin = std::min(vmin, mesh.cells[c].volume);
    vmax = std::max(vmax, mesh.cells[c].volume);
    const auto j = corner_jacobians(mesh.hex(c));
    const double m = *std::min_element(j.begin(), j.end());
    jmin = std::min(jmin, m);
    if (!(m > 0.0)) ++inverted;
  }
  out << "cell volume: min " << fmt(vmin) << ", max " << fmt(vmax) << '\n';
  out << "corner jacobian: min " << fmt(jmin) << ", ";
  if (inverted == 0) {
    out << "all positive\n";
  } else {
    out << inverted << " cell(s) with non-positive corners\n";
  }
  return kSuccess;
}

inline int check(const Options& o, std::ostream& out, std::ostream& err) {
  const auto scene = load(o, err);
  if (!scene) return kValidationError;
  out << o.spec << ": ok (" << scene->blocks.size() << " block(s))\n";
  return kSuccess;
}

} // namespace detail

/// Runs the command line; never throws. Returns 0, 1 (validation) or 2 (runtime).
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block-structured hexahedral mesh generator", "meshgen"};
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("spec", o.spec, "scene spec file (JSON)")->required();
  };
  const auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "maximum number of blocks generated in parallel")
        ->check(CLI::Range(1u, 1024u));
  };
  auto* gen = app.add_subcommand("generate", "generate the mesh and write VTK");
  add_common(gen);
  gen->add_option("-o,--output", o.output, "output VTK file")->required();
  gen->add_flag("--report", o.report, "print a JSON report to standard output");
  add_threads(gen);

  auto* sol = app.add_subcommand("solve", "generate, solve the pressure problem and write VTK");
  add_common(sol);
  sol->add_option("-o,--output", o.output, "output VTK file")->required();
  sol->add_flag("--report", o.report, "print a JSON report to standard output");
  add_threads(sol);

  auto* ins = app.add_subcommand("inspect", "print block counts, interfaces and cell quality");
  add_common(ins);
  add_threads(ins);

  auto* chk = app.add_subcommand("check", "validate the spec only");
  add_common(chk);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidationError;
  }

  try {
    if (gen->parsed()) return detail::generate(o, out, err, false);
    if (sol->parsed()) return detail::generate(o, out, err, true);
    if (ins->parsed()) return detail::inspect(o, out, err);
    return detail::check(o, out, err);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << " (residual " << detail::fmt(e.residual()) << " after " << e.iterations()
        << " iterations)\n";
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
  }
  return kRuntimeError;
}

} // namespace meshgen::cli
