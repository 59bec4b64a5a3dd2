#pragma once

// Declarative scene files: JSON documents describing blocks, materials, an
// optional pressure problem and output settings. See docs/spec-format.md.

#include <meshgen/error.hpp>
#include <meshgen/fvsolve.hpp>
#include <meshgen/geometry.hpp>
#include <meshgen/multiblock.hpp>
#include <meshgen/projectors.hpp>
#include <meshgen/surfaces.hpp>
#include <meshgen/tfi.hpp>

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace meshgen {

/// Validation error codes reported by parse_spec (one per checked invariant).
namespace codes {
inline constexpr const char* kSyntax = "E100";
inline constexpr const char* kMissingField = "E110";
inline constexpr const char* kBadValue = "E111";
inline constexpr const char* kUnknownKey = "E112";
inline constexpr const char* kNoBlocks = "E119";
inline constexpr const char* kDuplicateBlock = "E120";
inline constexpr const char* kUnknownSurfaceForm = "E121";
inline constexpr const char* kBadDiscreteSurface = "E122";
inline constexpr const char* kUnknownHorizon = "E123";
inline constexpr const char* kUnknownFamily = "E130";
inline constexpr const char* kKnotsNotAscending = "E131";
inline constexpr const char* kKnotEndpoints = "E132";
inline constexpr const char* kKnotSurfaceCount = "E133";
inline constexpr const char* kOrderCap = "E134";
inline constexpr const char* kHermiteData = "E135";
inline constexpr const char* kAxisMismatch = "E136";
inline constexpr const char* kResolution = "E140";
inline constexpr const char* kGrading = "E141";
inline constexpr const char* kNonconforming = "E150";
inline constexpr const char* kUndefinedMaterial = "E160";
inline constexpr const char* kPermeability = "E161";
inline constexpr const char* kUnknownBlockRef = "E170";
inline constexpr const char* kUnknownSide = "E171";
inline constexpr const char* kNoDirichlet = "E172";
inline constexpr const char* kSolverSettings = "E173";
inline constexpr const char* kBoundaryKind = "E174";
inline constexpr const char* kMergeTolerance = "E180";
} // namespace codes

struct Diagnostic {
  std::string code;
  std::string path;  // JSON pointer-like location, e.g. /blocks/0/resolution
  std::string message;
  int line{0};
  int column{0};

  std::string format() const {
    std::string s = code + " ";
    if (line > 0) s += "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
    if (!path.empty()) s += path + ": ";
    return s + message;
  }
};

/// value + gradient . x, evaluated at a physical point.
struct ScalarField {
  double value{0.0};
  Vec3 gradient;

  double at(const Vec3& x) const { return value + dot(gradient, x); }
};

struct MaterialSpec {
  std::string name;
  double permeability{1.0};
};

struct BoundarySpec {
  enum class Kind { dirichlet, neumann };
  std::optional<std::string> block;  // all blocks when absent
  HexSide side{HexSide::xi0};
  Kind kind{Kind::dirichlet};
  ScalarField value;
};

struct ProblemSpec {
  ScalarField source;
  std::vector<BoundarySpec> boundary;
  double tolerance{1e-12};
  int max_iterations{10000};
};

struct OutputSpec {
  /// Relative to the bounding-box diagonal of all generated nodes.
  double merge_tolerance{1e-9};
};

struct NamedBlock {
  std::string id;
  BlockSpec block;
};

struct SceneSpec {
  std::vector<NamedBlock> blocks;
  std::vector<MaterialSpec> materials;  // sorted by name
  std::optional<ProblemSpec> problem;
  OutputSpec output;

  std::optional<std::size_t> material_index(const std::string& name) const {
    for (std::size_t i = 0; i < materials.size(); ++i) {
      if (materials[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> block_index(const std::string& id) const {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].id == id) return i;
    }
    return std::nullopt;
  }

  PermeabilityField permeability() const {
    PermeabilityField k;
    for (const auto& m : materials) k.by_material[m.name] = m.permeability;
    return k;
  }
};

struct ParseResult {
  std::optional<SceneSpec> scene;
  std::vector<Diagnostic> errors;

  bool ok() const { return scene.has_value() && errors.empty(); }
};

namespace detail {

using nlohmann::json;

class SceneReader {
 public:
  std::vector<Diagnostic> errors;

  void error(const char* code, const std::string& path, std::string message) {
    errors.push_back({code, path, std::move(message), 0, 0});
  }

  void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        error(codes::kUnknownKey, path, "unknown key '" + key + "'");
      }
    }
  }

  const json* field(const json& j, const std::string& path, const char* key, bool required = true) {
    if (!j.is_object()) {
      error(codes::kBadValue, path, "expected an object");
      return nullptr;
    }
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) error(codes::kMissingField, path, std::string("missing field '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& j, const std::string& path) {
    if (!j.is_number()) {
      error(codes::kBadValue, path, "expected a number");
      return std::nullopt;
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      error(codes::kBadValue, path, "number must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::vector<double>> numbers(const json& j, const std::string& path, std::size_t expected = 0) {
    if (!j.is_array() || (expected != 0 && j.size() != expected)) {
      error(codes::kBadValue, path,
            expected ? "expected an array of " + std::to_string(expected) + " numbers" : "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    bool ok = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto v = number(j[i], path + "/" + std::to_string(i));
      if (v) {
        out.push_back(*v);
      } else {
        ok = false;
      }
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<Vec3> vec3(const json& j, const std::string& path) {
    auto v = numbers(j, path, 3);
    if (!v) return std::nullopt;
    return Vec3{(*v)[0], (*v)[1], (*v)[2]};
  }

  std::optional<std::string> string(const json& j, const std::string& path) {
    if (!j.is_string()) {
      error(codes::kBadValue, path, "expected a string");
      return std::nullopt;
    }
    return j.get<std::string>();
  }

  std::optional<HeightFunction> height(const json& j, const std::string& path) {
    if (j.is_number()) {
      auto v = number(j, path);
      if (!v) return std::nullopt;
      return HeightFunction::flat(*v);
    }
    if (j.is_string()) {
      const auto name = j.get<std::string>();
      const auto it = horizons_.find(name);
      if (it == horizons_.end()) {
        error(codes::kUnknownHorizon, path, "unknown horizon '" + name + "'");
        return std::nullopt;
      }
      return it->second;
    }
    if (!j.is_object()) {
      error(codes::kBadValue, path, "expected a height function (number, horizon name or object)");
      return std::nullopt;
    }
    check_keys(j, path, {"constant", "terms"});
    HeightFunction h;
    bool ok = true;
    if (const json* c = field(j, path, "constant", false)) {
      auto v = number(*c, path + "/constant");
      ok &= v.has_value();
      h.constant = v.value_or(0.0);
    }
    if (const json* terms = field(j, path, "terms", false)) {
      if (!terms->is_array()) {
        error(codes::kBadValue, path + "/terms", "expected an array");
        return std::nullopt;
      }
      for (std::size_t i = 0; i < terms->size(); ++i) {
        const json& t = (*terms)[i];
        const std::string tp = path + "/terms/" + std::to_string(i);
        const json* type = field(t, tp, "type");
        if (!type) {
          ok = false;
          continue;
        }
        const auto kind = string(*type, tp + "/type");
        if (kind == "monomial") {
          check_keys(t, tp, {"type", "coef", "px", "py"});
          HeightFunction::Monomial m;
          const json* coef = field(t, tp, "coef");
          auto c = coef ? number(*coef, tp + "/coef") : std::nullopt;
          const auto exponent = [&](const char* key) -> std::optional<int> {
            const json* e = field(t, tp, key, false);
            if (!e) return 0;
            if (!e->is_number_integer() || e->get<int>() < 0) {
              error(codes::kBadValue, tp + "/" + key, "exponent must be a non-negative integer");
              return std::nullopt;
            }
            return e->get<int>();
          };
          auto px = exponent("px");
          auto py = exponent("py");
          if (!c || !px || !py) {
            ok = false;
            continue;
          }
          m.coef = *c;
          m.px = *px;
          m.py = *py;
          h.monomials.push_back(m);
        } else if (kind == "sine") {
          check_keys(t, tp, {"type", "amplitude", "kx", "ky", "phase"});
          HeightFunction::Sine s;
          bool term_ok = true;
          const auto opt = [&](const char* key, double& out, bool required) {
            if (const json* v = field(t, tp, key, required)) {
              auto n = number(*v, tp + "/" + key);
              if (n) {
                out = *n;
              } else {
                term_ok = false;
              }
            } else if (required) {
              term_ok = false;
            }
          };
          opt("amplitude", s.amplitude, true);
          opt("kx", s.kx, false);
          opt("ky", s.ky, false);
          opt("phase", s.phase, false);
          if (!term_ok) {
            ok = false;
            continue;
          }
          h.sines.push_back(s);
        } else if (kind) {
          error(codes::kBadValue, tp + "/type", "unknown height term '" + *kind + "' (expected monomial or sine)");
          ok = false;
        } else {
          ok = false;
        }
      }
    }
    if (!ok) return std::nullopt;
    return h;
  }

  void read_horizons(const json& j, const std::string& path) {
    if (!j.is_object()) {
      error(codes::kBadValue, path, "expected an object of named height functions");
      return;
    }
    for (const auto& [name, value] : j.items()) {
      if (value.is_string()) {
        error(codes::kBadValue, path + "/" + name, "horizons cannot refer to other horizons");
        continue;
      }
      if (auto h = height(value, path + "/" + name)) horizons_[name] = *h;
    }
  }

  std::optional<ParametricSurface> surface(const json& j, const std::string& path, bool as_derivative = false) {
    const json* form_j = field(j, path, "form");
    if (!form_j) return std::nullopt;
    const auto form = string(*form_j, path + "/form");
    if (!form) return std::nullopt;

    if (*form == "plane") {
      check_keys(j, path, {"form", "origin", "u", "v"});
      const json* o = field(j, path, "origin");
      const json* u = field(j, path, "u");
      const json* v = field(j, path, "v");
      auto po = o ? vec3(*o, path + "/origin") : std::nullopt;
      auto pu = u ? vec3(*u, path + "/u") : std::nullopt;
      auto pv = v ? vec3(*v, path + "/v") : std::nullopt;
      if (!po || !pu || !pv) return std::nullopt;
      return ParametricSurface::plane(*po, *pu, *pv);
    }
    if (*form == "bilinear") {
      check_keys(j, path, {"form", "corners"});
      const json* c = field(j, path, "corners");
      if (!c) return std::nullopt;
      if (!c->is_array() || c->size() != 4) {
        error(codes::kBadValue, path + "/corners", "expected 4 corner points ordered (0,0), (1,0), (0,1), (1,1)");
        return std::nullopt;
      }
      std::array<Vec3, 4> p;
      bool ok = true;
      for (std::size_t k = 0; k < 4; ++k) {
        auto v = vec3((*c)[k], path + "/corners/" + std::to_string(k));
        ok &= v.has_value();
        if (v) p[k] = *v;
      }
      if (!ok) return std::nullopt;
      return ParametricSurface::bilinear(p[0], p[1], p[2], p[3]);
    }
    if (*form == "graph") {
      check_keys(j, path, {"form", "x", "y", "height"});
      const json* x = field(j, path, "x");
      const json* y = field(j, path, "y");
      const json* h = field(j, path, "height");
      auto rx = x ? numbers(*x, path + "/x", 2) : std::nullopt;
      auto ry = y ? numbers(*y, path + "/y", 2) : std::nullopt;
      auto f = h ? height(*h, path + "/height") : std::nullopt;
      if (!rx || !ry || !f) return std::nullopt;
      return ParametricSurface::graph((*rx)[0], (*rx)[1], (*ry)[0], (*ry)[1], *f);
    }
    if (*form == "wall") {
      check_keys(j, path, {"form", "from", "to", "bottom", "top"});
      const json* a = field(j, path, "from");
      const json* b = field(j, path, "to");
      const json* lo = field(j, path, "bottom");
      const json* hi = field(j, path, "top");
      auto pa = a ? numbers(*a, path + "/from", 2) : std::nullopt;
      auto pb = b ? numbers(*b, path + "/to", 2) : std::nullopt;
      auto fb = lo ? height(*lo, path + "/bottom") : std::nullopt;
      auto ft = hi ? height(*hi, path + "/top") : std::nullopt;
      if (!pa || !pb || !fb || !ft) return std::nullopt;
      return ParametricSurface::wall((*pa)[0], (*pa)[1], (*pb)[0], (*pb)[1], *fb, *ft);
    }
    if (*form == "discrete") {
      check_keys(j, path, {"form", "points"});
      const json* pts = field(j, path, "points");
      if (!pts) return std::nullopt;
      if (!pts->is_array() || pts->size() < 2 || !(*pts)[0].is_array() || (*pts)[0].size() < 2) {
        error(codes::kBadDiscreteSurface, path + "/points", "expected rows of points forming at least a 2x2 grid");
        return std::nullopt;
      }
      const std::size_t cols = (*pts)[0].size();
      std::vector<Vec3> flat;
      bool ok = true;
      for (std::size_t r = 0; r < pts->size(); ++r) {
        const json& row = (*pts)[r];
        if (!row.is_array() || row.size() != cols) {
          error(codes::kBadDiscreteSurface, path + "/points/" + std::to_string(r),
                "every row must hold " + std::to_string(cols) + " points");
          ok = false;
          continue;
        }
        for (std::size_t c = 0; c < cols; ++c) {
          auto p = vec3(row[c], path + "/points/" + std::to_string(r) + "/" + std::to_string(c));
          ok &= p.has_value();
          if (p) flat.push_back(*p);
        }
      }
      if (!ok) return std::nullopt;
      return ParametricSurface::discrete(cols - 1, pts->size() - 1, std::move(flat));
    }
    if (*form == "constant" && as_derivative) {
      check_keys(j, path, {"form", "value"});
      const json* v = field(j, path, "value");
      auto d = v ? vec3(*v, path + "/value") : std::nullopt;
      if (!d) return std::nullopt;
      return ParametricSurface::plane(*d, {}, {});
    }
    error(codes::kUnknownSurfaceForm, path + "/form",
          "unknown surface form '" + *form + "' (expected plane, bilinear, graph, wall or discrete" +
              (as_derivative ? ", constant)" : ")"));
    return std::nullopt;
  }

  std::optional<std::vector<ParametricSurface>> surface_list(const json& j, const std::string& path,
                                                             bool as_derivative = false) {
    if (!j.is_array()) {
      error(codes::kBadValue, path, "expected an array of surfaces");
      return std::nullopt;
    }
    std::vector<ParametricSurface> out;
    bool ok = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto s = surface(j[i], path + "/" + std::to_string(i), as_derivative);
      ok &= s.has_value();
      if (s) out.push_back(std::move(*s));
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<ProjectorSpec> projector(const json& j, const std::string& path, Axis axis) {
    if (const json* ax = field(j, path, "axis", false)) {
      auto name = string(*ax, path + "/axis");
      if (name && *name != axis_name(axis)) {
        error(codes::kAxisMismatch, path + "/axis",
              "projector declares axis '" + *name + "' but sits in the " + axis_name(axis) + " slot");
      }
    }
    const json* fam = field(j, path, "family");
    if (!fam) return std::nullopt;
    const auto family = string(*fam, path + "/family");
    if (!family) return std::nullopt;

    if (*family == "linear") {
      check_keys(j, path, {"axis", "family", "surfaces"});
      const json* s = field(j, path, "surfaces");
      auto list = s ? surface_list(*s, path + "/surfaces") : std::nullopt;
      if (!list) return std::nullopt;
      if (list->size() != 2) {
        error(codes::kBadValue, path + "/surfaces", "linear projector takes exactly 2 surfaces");
        return std::nullopt;
      }
      return ProjectorSpec::linear(axis, (*list)[0], (*list)[1]);
    }
    if (*family == "lagrangian") {
      check_keys(j, path, {"axis", "family", "knots", "surfaces"});
      const json* k = field(j, path, "knots");
      const json* s = field(j, path, "surfaces");
      auto knots = k ? numbers(*k, path + "/knots") : std::nullopt;
      auto list = s ? surface_list(*s, path + "/surfaces") : std::nullopt;
      bool ok = knots && list;
      if (knots) {
        if (knots->size() < 2) {
          error(codes::kKnotSurfaceCount, path + "/knots", "at least two knots are required");
          ok = false;
        } else {
          if (knots->front() != 0.0 || knots->back() != 1.0) {
            error(codes::kKnotEndpoints, path + "/knots", "knots must start at 0 and end at 1");
            ok = false;
          }
          for (std::size_t i = 1; i < knots->size(); ++i) {
            if (!((*knots)[i] > (*knots)[i - 1])) {
              error(codes::kKnotsNotAscending, path + "/knots", "knots not ascending");
              ok = false;
              break;
            }
          }
          if (knots->size() - 1 > kMaxLagrangeOrder) {
            error(codes::kOrderCap, path + "/knots",
                  "lagrangian order " + std::to_string(knots->size() - 1) + " exceeds the cap of " +
                      std::to_string(kMaxLagrangeOrder));
            ok = false;
          }
        }
      }
      if (knots && list && knots->size() != list->size()) {
        error(codes::kKnotSurfaceCount, path,
              std::to_string(knots->size()) + " knots but " + std::to_string(list->size()) + " surfaces");
        ok = false;
      }
      if (!ok) return std::nullopt;
      return ProjectorSpec::lagrangian(axis, std::move(*knots), std::move(*list));
    }
    if (*family == "hermite") {
      check_keys(j, path, {"axis", "family", "surfaces", "derivatives"});
      const json* s = field(j, path, "surfaces");
      const json* d = field(j, path, "derivatives");
      auto list = s ? surface_list(*s, path + "/surfaces") : std::nullopt;
      auto ders = d ? surface_list(*d, path + "/derivatives", true) : std::nullopt;
      if (!list || !ders) return std::nullopt;
      if (list->size() != 2 || ders->size() != 2) {
        error(codes::kHermiteData, path, "hermite projector takes 2 surfaces and 2 derivative fields");
        return std::nullopt;
      }
      return ProjectorSpec::hermite(axis, (*list)[0], (*list)[1], DerivativeField((*ders)[0]),
                                    DerivativeField((*ders)[1]));
    }
    error(codes::kUnknownFamily, path + "/family",
          "unknown projector family '" + *family + "' (expected linear, lagrangian or hermite)");
    return std::nullopt;
  }

  std::optional<Grading> grading(const json& j, const std::string& path) {
    const json* t = field(j, path, "type");
    if (!t) return std::nullopt;
    const auto type = string(*t, path + "/type");
    if (!type) return std::nullopt;
    const auto param = [&](const char* key) -> std::optional<double> {
      const json* p = field(j, path, key);
      auto v = p ? number(*p, path + "/" + key) : std::nullopt;
      if (v && !(*v > 0.0)) {
        error(codes::kGrading, path + "/" + key, "grading parameter must be positive");
        return std::nullopt;
      }
      return v;
    };
    if (*type == "uniform") {
      check_keys(j, path, {"type"});
      return Grading::uniform();
    }
    if (*type == "power") {
      check_keys(j, path, {"type", "exponent"});
      auto p = param("exponent");
      if (!p) return std::nullopt;
      return Grading::power(*p);
    }
    if (*type == "tanh") {
      check_keys(j, path, {"type", "beta"});
      auto p = param("beta");
      if (!p) return std::nullopt;
      return Grading::tanh(*p);
    }
    error(codes::kGrading, path + "/type", "unknown grading '" + *type + "' (expected uniform, power or tanh)");
    return std::nullopt;
  }

  // Layer shorthand: vertical walls over a rectangle between two horizons.
  std::optional<std::array<ProjectorSpec, 3>> layer(const json& j, const std::string& path) {
    check_keys(j, path, {"x", "y", "bottom", "top"});
    const json* x = field(j, path, "x");
    const json* y = field(j, path, "y");
    const json* lo = field(j, path, "bottom");
    const json* hi = field(j, path, "top");
    auto rx = x ? numbers(*x, path + "/x", 2) : std::nullopt;
    auto ry = y ? numbers(*y, path + "/y", 2) : std::nullopt;
    auto fb = lo ? height(*lo, path + "/bottom") : std::nullopt;
    auto ft = hi ? height(*hi, path + "/top") : std::nullopt;
    if (!rx || !ry || !fb || !ft) return std::nullopt;
    const double x0 = (*rx)[0], x1 = (*rx)[1], y0 = (*ry)[0], y1 = (*ry)[1];
    return std::array<ProjectorSpec, 3>{
        ProjectorSpec::linear(Axis::xi, ParametricSurface::wall(x0, y0, x0, y1, *fb, *ft),
                              ParametricSurface::wall(x1, y0, x1, y1, *fb, *ft)),
        ProjectorSpec::linear(Axis::eta, ParametricSurface::wall(x0, y0, x1, y0, *fb, *ft),
                              ParametricSurface::wall(x0, y1, x1, y1, *fb, *ft)),
        ProjectorSpec::linear(Axis::kappa, ParametricSurface::graph(x0, x1, y0, y1, *fb),
                              ParametricSurface::graph(x0, x1, y0, y1, *ft)),
    };
  }

  std::optional<NamedBlock> block(const json& j, const std::string& path) {
    check_keys(j, path, {"id", "material", "resolution", "grading", "projectors", "layer"});
    const json* id_j = field(j, path, "id");
    const json* mat_j = field(j, path, "material");
    const json* res_j = field(j, path, "resolution");
    auto id = id_j ? string(*id_j, path + "/id") : std::nullopt;
    auto material = mat_j ? string(*mat_j, path + "/material") : std::nullopt;
    if (id && id->empty()) {
      error(codes::kBadValue, path + "/id", "block id must not be empty");
      id.reset();
    }

    std::optional<Resolution> res;
    if (res_j) {
      if (!res_j->is_array() || res_j->size() != 3 ||
          !std::all_of(res_j->begin(), res_j->end(), [](const json& v) { return v.is_number_integer(); })) {
        error(codes::kResolution, path + "/resolution", "resolution must be three integers [nx, ny, nz]");
      } else {
        Resolution r{(*res_j)[0].get<int>(), (*res_j)[1].get<int>(), (*res_j)[2].get<int>()};
        if (r.nx < 1 || r.ny < 1 || r.nz < 1) {
          error(codes::kResolution, path + "/resolution", "resolution entries must be positive");
        } else {
          res = r;
        }
      }
    }

    std::array<Grading, 3> grad{};
    bool grading_ok = true;
    if (const json* g = field(j, path, "grading", false)) {
      if (!g->is_object()) {
        error(codes::kGrading, path + "/grading", "expected an object keyed by axis");
        grading_ok = false;
      } else {
        check_keys(*g, path + "/grading", {"xi", "eta", "kappa"});
        for (Axis a : kAxes) {
          if (const json* ga = field(*g, path + "/grading", axis_name(a), false)) {
            auto parsed = grading(*ga, path + "/grading/" + axis_name(a));
            if (parsed) {
              grad[index_of(a)] = *parsed;
            } else {
              grading_ok = false;
            }
          }
        }
      }
    }

    std::optional<std::array<ProjectorSpec, 3>> projectors;
    const json* proj_j = field(j, path, "projectors", false);
    const json* layer_j = field(j, path, "layer", false);
    if (proj_j && layer_j) {
      error(codes::kBadValue, path, "give either 'projectors' or 'layer', not both");
    } else if (layer_j) {
      projectors = layer(*layer_j, path + "/layer");
    } else if (proj_j) {
      if (!proj_j->is_object()) {
        error(codes::kBadValue, path + "/projectors", "expected an object keyed by axis");
      } else {
        check_keys(*proj_j, path + "/projectors", {"xi", "eta", "kappa"});
        std::array<std::optional<ProjectorSpec>, 3> p;
        for (Axis a : kAxes) {
          if (const json* pa = field(*proj_j, path + "/projectors", axis_name(a))) {
            p[index_of(a)] = projector(*pa, path + "/projectors/" + axis_name(a), a);
          }
        }
        if (p[0] && p[1] && p[2]) projectors = std::array<ProjectorSpec, 3>{*p[0], *p[1], *p[2]};
      }
    } else {
      error(codes::kMissingField, path, "missing field 'projectors' (or 'layer')");
    }

    if (!id || !material || !res || !grading_ok || !projectors) return std::nullopt;
    BlockSpec b((*projectors)[0], (*projectors)[1], (*projectors)[2], *res, *material, grad);
    for (const auto& e : nonconforming_edges(b)) {
      std::ostringstream msg;
      msg << "surfaces do not conform along edge " << e.describe() << " (gap " << e.gap << ")";
      error(codes::kNonconforming, path, msg.str());
    }
    return NamedBlock{*id, std::move(b)};
  }

  std::optional<ScalarField> scalar_field(const json& j, const std::string& path) {
    if (j.is_number()) {
      auto v = number(j, path);
      if (!v) return std::nullopt;
      return ScalarField{*v, {}};
    }
    if (!j.is_object()) {
      error(codes::kBadValue, path, "expected a number or {\"value\": c, \"gradient\": [a, b, c]}");
      return std::nullopt;
    }
    check_keys(j, path, {"value", "gradient"});
    ScalarField f;
    bool ok = true;
    if (const json* v = field(j, path, "value", false)) {
      auto n = number(*v, path + "/value");
      ok &= n.has_value();
      f.value = n.value_or(0.0);
    }
    if (const json* g = field(j, path, "gradient", false)) {
      auto n = vec3(*g, path + "/gradient");
      ok &= n.has_value();
      f.gradient = n.value_or(Vec3{});
    }
    if (!ok) return std::nullopt;
    return f;
  }

  std::optional<ProblemSpec> problem(const json& j, const std::string& path, const std::set<std::string>& block_ids) {
    check_keys(j, path, {"source", "boundary", "solver"});
    ProblemSpec p;
    bool ok = true;
    if (const json* s = field(j, path, "source", false)) {
      auto f = scalar_field(*s, path + "/source");
      ok &= f.has_value();
      if (f) p.source = *f;
    }
    const json* bnd = field(j, path, "boundary");
    if (bnd && !bnd->is_array()) {
      error(codes::kBadValue, path + "/boundary", "expected an array of boundary conditions");
      ok = false;
    } else if (bnd) {
      for (std::size_t i = 0; i < bnd->size(); ++i) {
        const json& e = (*bnd)[i];
        const std::string ep = path + "/boundary/" + std::to_string(i);
        check_keys(e, ep, {"side", "block", "dirichlet", "neumann"});
        BoundarySpec b;
        bool entry_ok = true;
        if (const json* side = field(e, ep, "side")) {
          auto name = string(*side, ep + "/side");
          const auto it = name ? std::find_if(kHexSides.begin(), kHexSides.end(),
                                              [&](HexSide s) { return *name == side_name(s); })
                               : kHexSides.end();
          if (name && it == kHexSides.end()) {
            error(codes::kUnknownSide, ep + "/side",
                  "unknown side '" + *name + "' (expected xi0, xi1, eta0, eta1, kappa0 or kappa1)");
          }
          if (it == kHexSides.end()) {
            entry_ok = false;
          } else {
            b.side = *it;
          }
        } else {
          entry_ok = false;
        }
        if (const json* blk = field(e, ep, "block", false)) {
          auto name = string(*blk, ep + "/block");
          if (name && !block_ids.contains(*name)) {
            error(codes::kUnknownBlockRef, ep + "/block", "unknown block '" + *name + "'");
            entry_ok = false;
          }
          b.block = name;
          entry_ok &= name.has_value();
        }
        const json* dir = field(e, ep, "dirichlet", false);
        const json* neu = field(e, ep, "neumann", false);
        if ((dir != nullptr) == (neu != nullptr)) {
          error(codes::kBoundaryKind, ep, "give exactly one of 'dirichlet' or 'neumann'");
          entry_ok = false;
        } else {
          b.kind = dir ? BoundarySpec::Kind::dirichlet : BoundarySpec::Kind::neumann;
          auto f = scalar_field(dir ? *dir : *neu, ep + (dir ? "/dirichlet" : "/neumann"));
          entry_ok &= f.has_value();
          if (f) b.value = *f;
        }
        ok &= entry_ok;
        if (entry_ok) p.boundary.push_back(b);
      }
      const bool any_dirichlet = std::any_of(bnd->begin(), bnd->end(), [](const json& e) {
        return e.is_object() && e.contains("dirichlet");
      });
      if (!any_dirichlet) {
        error(codes::kNoDirichlet, path + "/boundary", "no Dirichlet condition: the pressure problem would be singular");
        ok = false;
      }
    }
    if (const json* s = field(j, path, "solver", false)) {
      check_keys(*s, path + "/solver", {"tolerance", "max_iterations"});
      if (const json* t = field(*s, path + "/solver", "tolerance", false)) {
        auto v = number(*t, path + "/solver/tolerance");
        if (v && !(*v > 0.0)) {
          error(codes::kSolverSettings, path + "/solver/tolerance", "tolerance must be positive");
          v.reset();
        }
        ok &= v.has_value();
        p.tolerance = v.value_or(p.tolerance);
      }
      if (const json* m = field(*s, path + "/solver", "max_iterations", false)) {
        if (!m->is_number_integer() || m->get<long long>() < 1 || m->get<long long>() > 100000000) {
          error(codes::kSolverSettings, path + "/solver/max_iterations", "max_iterations must be a positive integer");
          ok = false;
        } else {
          p.max_iterations = m->get<int>();
        }
      }
    }
    if (!ok) return std::nullopt;
    return p;
  }

  std::optional<SceneSpec> scene(const json& root) {
    if (!root.is_object()) {
      error(codes::kBadValue, "", "scene must be a JSON object");
      return std::nullopt;
    }
    check_keys(root, "", {"horizons", "materials", "blocks", "problem", "output"});
    if (const json* h = field(root, "", "horizons", false)) read_horizons(*h, "/horizons");

    SceneSpec s;
    bool ok = true;
    const json* mats = field(root, "", "materials");
    if (mats && !mats->is_object()) {
      error(codes::kBadValue, "/materials", "expected an object keyed by material name");
      ok = false;
    } else if (mats) {
      for (const auto& [name, m] : mats->items()) {
        const std::string mp = "/materials/" + name;
        check_keys(m, mp, {"permeability"});
        const json* k = field(m, mp, "permeability");
        auto v = k ? number(*k, mp + "/permeability") : std::nullopt;
        if (v && !(*v > 0.0)) {
          error(codes::kPermeability, mp + "/permeability", "permeability must be positive");
          v.reset();
        }
        if (v) {
          s.materials.push_back({name, *v});
        } else {
          ok = false;
        }
      }
    } else {
      ok = false;
    }

    std::set<std::string> ids;
    const json* blocks = field(root, "", "blocks");
    if (blocks && (!blocks->is_array() || blocks->empty())) {
      error(codes::kNoBlocks, "/blocks", "expected a non-empty array of blocks");
      ok = false;
    } else if (blocks) {
      for (std::size_t i = 0; i < blocks->size(); ++i) {
        const std::string bp = "/blocks/" + std::to_string(i);
        auto b = block((*blocks)[i], bp);
        if (!b) {
          ok = false;
          // Still register the id so later references and duplicates resolve.
          if ((*blocks)[i].is_object() && (*blocks)[i].contains("id") && (*blocks)[i]["id"].is_string()) {
            ids.insert((*blocks)[i]["id"].get<std::string>());
          }
          continue;
        }
        if (!ids.insert(b->id).second) {
          error(codes::kDuplicateBlock, bp + "/id", "duplicate block id '" + b->id + "'");
          ok = false;
        }
        if (mats && mats->is_object() && !mats->contains(b->block.material())) {
          error(codes::kUndefinedMaterial, bp + "/material", "undefined material '" + b->block.material() + "'");
          ok = false;
        }
        s.blocks.push_back(std::move(*b));
      }
    } else {
      ok = false;
    }

    if (const json* p = field(root, "", "problem", false)) {
      s.problem = problem(*p, "/problem", ids);
      ok &= s.problem.has_value();
    }
    if (const json* o = field(root, "", "output", false)) {
      check_keys(*o, "/output", {"merge_tolerance"});
      if (const json* t = field(*o, "/output", "merge_tolerance", false)) {
        auto v = number(*t, "/output/merge_tolerance");
        if (v && !(*v > 0.0)) {
          error(codes::kMergeTolerance, "/output/merge_tolerance", "merge tolerance must be positive");
          v.reset();
        }
        ok &= v.has_value();
        s.output.merge_tolerance = v.value_or(s.output.merge_tolerance);
      }
    }
    if (!ok || !errors.empty()) return std::nullopt;
    return s;
  }

 private:
  std::map<std::string, HeightFunction> horizons_;
};

inline std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

} // namespace detail

/// Parses and fully validates a scene document, collecting every error.
inline ParseResult parse_spec_text(std::string_view text) {
  ParseResult out;
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = detail::line_column(text, e.byte);
    std::string what = e.what();
    if (const auto pos = what.find("]: "); pos != std::string::npos) what = what.substr(pos + 3);
    out.errors.push_back({codes::kSyntax, "", "syntax error: " + what, line, column});
    return out;
  }
  detail::SceneReader reader;
  auto scene = reader.scene(root);
  out.errors = std::move(reader.errors);
  if (scene && out.errors.empty()) {
    std::sort(scene->materials.begin(), scene->materials.end(),
              [](const MaterialSpec& a, const MaterialSpec& b) { return a.name < b.name; });
    out.scene = std::move(scene);
  }
  return out;
}

inline ParseResult parse_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open spec file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str());
}

/// Generates every block (up to `threads` in parallel) and assembles them.
inline MultiblockMesh build_mesh(const SceneSpec& scene, unsigned threads = 1) {
  std::vector<BlockSpec> specs;
  specs.reserve(scene.blocks.size());
  for (const auto& b : scene.blocks) specs.push_back(b.block);
  const auto grids = generate_grids(specs, threads);
  const double tol = scene.output.merge_tolerance * (default_merge_tolerance(grids) / 1e-9);
  return assemble_multiblock(grids, tol);
}

/// Binds the scene's problem section to an assembled mesh. For each boundary
/// face the last matching boundary entry wins; unmatched faces are no-flow.
inline PressureProblem make_problem(const SceneSpec& scene, const MultiblockMesh& mesh) {
  if (!scene.problem) throw ConfigError("scene has no problem section");
  const auto& spec = *scene.problem;
  PressureProblem p(mesh);
  p.permeability = scene.permeability();
  p.tolerance = spec.tolerance;
  p.max_iterations = spec.max_iterations;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) p.source[c] = spec.source.at(mesh.cells[c].center);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    if (!face.is_boundary()) continue;
    for (const auto& b : spec.boundary) {
      if (b.side != face.boundary->side) continue;
      if (b.block && scene.blocks[face.boundary->block].id != *b.block) continue;
      const double v = b.value.at(face.geometry.center);
      if (b.kind == BoundarySpec::Kind::dirichlet) {
        p.boundary[f] = Dirichlet{v};
      } else {
        p.boundary[f] = Neumann{v};
      }
    }
  }
  return p;
}

} // namespace meshgen
