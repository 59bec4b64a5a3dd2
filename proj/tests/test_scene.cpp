#include <meshgen/scene.hpp>

#include <gtest/gtest.h>
#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <functional>

using namespace meshgen;
using nlohmann::json;

namespace {

const std::filesystem::path kSpecs{MESHGEN_SPECS_DIR};

json load(const char* name) {
  std::ifstream in(kSpecs / name);
  return json::parse(in);
}

std::vector<std::string> codes_of(const ParseResult& r) {
  std::vector<std::string> out;
  for (const auto& e : r.errors) out.push_back(e.code);
  return out;
}

bool has(const ParseResult& r, std::string_view code) {
  return std::any_of(r.errors.begin(), r.errors.end(), [&](const Diagnostic& d) { return d.code == code; });
}

ParseResult mutate(const char* base, const std::function<void(json&)>& f) {
  json j = load(base);
  f(j);
  return parse_spec_text(j.dump());
}

json& cube_block(json& j) { return j["blocks"][0]; }

} // namespace

TEST(Scene, ShippedSpecsParse) {
  for (const char* name : {"cube.json", "two_block.json", "column.json", "nine_layer.json"}) {
    const auto r = parse_spec(kSpecs / name);
    EXPECT_TRUE(r.ok()) << name << ": " << (r.errors.empty() ? "" : r.errors[0].format());
  }
}

TEST(Scene, CubeBuildsUnitCube) {
  const auto r = parse_spec(kSpecs / "cube.json");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.scene->blocks.size(), 1u);
  EXPECT_EQ(r.scene->blocks[0].id, "cube");
  const auto m = build_mesh(*r.scene);
  EXPECT_EQ(m.nodes.size(), 27u);
  EXPECT_EQ(m.cells.size(), 8u);
  double v = 0;
  for (const auto& c : m.cells) v += c.volume;
  EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Scene, NineLayerExample) {
  const auto r = parse_spec(kSpecs / "nine_layer.json");
  ASSERT_TRUE(r.ok());
  const auto& s = *r.scene;
  ASSERT_EQ(s.blocks.size(), 9u);
  int refined = 0;
  for (const auto& b : s.blocks) {
    const auto res = b.block.resolution();
    if (res.nz > 2) {
      ++refined;
      EXPECT_EQ(b.block.material(), "sandstone");
    }
  }
  EXPECT_EQ(refined, 4);
  const auto m = build_mesh(s, 2);
  EXPECT_EQ(m.interfaces.size(), 8u);
  for (const auto& i : m.interfaces) EXPECT_GT(i.shared_nodes, 0u);
}

TEST(Scene, MaterialsSortedByName) {
  const auto r = mutate("two_block.json", [](json& j) { j["materials"]["clay"] = {{"permeability", 2.0}}; });
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.scene->materials.size(), 3u);
  EXPECT_EQ(r.scene->materials[0].name, "clay");
  EXPECT_EQ(r.scene->material_index("shale"), 2u);
  EXPECT_EQ(r.scene->permeability().by_material.at("shale"), 0.01);
}

TEST(Scene, KnotsNotAscending) {
  const auto r = mutate("cube.json", [](json& j) {
    auto& xi = cube_block(j)["projectors"]["xi"];
    const json s0 = xi["surfaces"][0], s1 = xi["surfaces"][1];
    xi = {{"family", "lagrangian"}, {"knots", {0, 0.7, 0.3, 1}}, {"surfaces", {s0, s0, s1, s1}}};
  });
  EXPECT_FALSE(r.ok());
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].code, codes::kKnotsNotAscending);
  EXPECT_EQ(r.errors[0].path, "/blocks/0/projectors/xi/knots");
  EXPECT_NE(r.errors[0].format().find("knots not ascending"), std::string::npos);
}

TEST(Scene, ErrorsAreCollected) {
  const auto r = mutate("cube.json", [](json& j) {
    auto& b = cube_block(j);
    b["resolution"] = {0, 2, 2};
    b["material"] = "granite";
    b["colour"] = "red";
    b["projectors"]["eta"]["family"] = "spline";
  });
  const auto c = codes_of(r);
  EXPECT_TRUE(has(r, codes::kResolution));
  EXPECT_TRUE(has(r, codes::kUnknownKey));
  EXPECT_TRUE(has(r, codes::kUnknownFamily));
  EXPECT_GE(c.size(), 3u);
}

TEST(Scene, SyntaxErrorLocation) {
  const auto r = parse_spec_text("{\n  \"blocks\": [\n    {\"id\": \"a\",, }\n  ]\n}\n");
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].code, codes::kSyntax);
  EXPECT_EQ(r.errors[0].line, 3);
  EXPECT_EQ(r.errors[0].column, 16);
  EXPECT_NE(r.errors[0].format().find("line 3, column 16"), std::string::npos);
}

TEST(Scene, MissingFileThrows) { EXPECT_THROW(parse_spec(kSpecs / "no_such_file.json"), IoError); }

struct CodeCase {
  const char* name;
  const char* base;
  std::function<void(json&)> edit;
  const char* code;
};

class SceneErrorCode : public ::testing::TestWithParam<CodeCase> {};

TEST_P(SceneErrorCode, Reported) {
  const auto& c = GetParam();
  const auto r = mutate(c.base, c.edit);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has(r, c.code)) << "got: " << (r.errors.empty() ? "nothing" : r.errors[0].format());
}

namespace {

json plane(Vec3 o, Vec3 u, Vec3 v) {
  return {{"form", "plane"}, {"origin", {o.x, o.y, o.z}}, {"u", {u.x, u.y, u.z}}, {"v", {v.x, v.y, v.z}}};
}

void lagrange_xi(json& j, json knots, int surfaces) {
  auto& xi = cube_block(j)["projectors"]["xi"];
  const json s0 = xi["surfaces"][0];
  json list = json::array();
  for (int i = 0; i < surfaces; ++i) list.push_back(s0);
  xi = {{"family", "lagrangian"}, {"knots", std::move(knots)}, {"surfaces", std::move(list)}};
}

const std::vector<CodeCase> kCases{
    {"MissingField", "cube.json", [](json& j) { cube_block(j).erase("resolution"); }, codes::kMissingField},
    {"BadValue", "cube.json", [](json& j) { cube_block(j)["projectors"]["xi"]["surfaces"][0]["origin"] = {0, "a", 0}; },
     codes::kBadValue},
    {"UnknownKey", "cube.json", [](json& j) { j["extra"] = 1; }, codes::kUnknownKey},
    {"NoBlocks", "cube.json", [](json& j) { j["blocks"] = json::array(); }, codes::kNoBlocks},
    {"DuplicateBlock", "two_block.json", [](json& j) { j["blocks"][1]["id"] = "lower"; }, codes::kDuplicateBlock},
    {"UnknownSurfaceForm", "cube.json",
     [](json& j) { cube_block(j)["projectors"]["xi"]["surfaces"][0]["form"] = "nurbs"; }, codes::kUnknownSurfaceForm},
    {"BadDiscreteSurface", "cube.json",
     [](json& j) {
       cube_block(j)["projectors"]["xi"]["surfaces"][0] = {{"form", "discrete"},
                                                           {"points", {{{0, 0, 0}, {0, 1, 0}}, {{0, 0, 1}}}}};
     },
     codes::kBadDiscreteSurface},
    {"UnknownHorizon", "two_block.json", [](json& j) { j["blocks"][0]["layer"]["top"] = "h7"; },
     codes::kUnknownHorizon},
    {"UnknownFamily", "cube.json", [](json& j) { cube_block(j)["projectors"]["xi"]["family"] = "cubic"; },
     codes::kUnknownFamily},
    {"KnotsNotAscending", "cube.json", [](json& j) { lagrange_xi(j, {0, 0.5, 0.5, 1}, 4); },
     codes::kKnotsNotAscending},
    {"KnotEndpoints", "cube.json", [](json& j) { lagrange_xi(j, {0.1, 0.5, 1}, 3); }, codes::kKnotEndpoints},
    {"KnotSurfaceCount", "cube.json", [](json& j) { lagrange_xi(j, {0, 0.5, 1}, 2); }, codes::kKnotSurfaceCount},
    {"OrderCap", "cube.json",
     [](json& j) {
       json k = json::array();
       const int n = static_cast<int>(kMaxLagrangeOrder) + 1;
       for (int i = 0; i <= n; ++i) k.push_back(double(i) / n);
       lagrange_xi(j, k, n + 1);
     },
     codes::kOrderCap},
    {"HermiteData", "cube.json",
     [](json& j) {
       auto& xi = cube_block(j)["projectors"]["xi"];
       xi["family"] = "hermite";
       xi["derivatives"] = {{{"form", "constant"}, {"value", {1, 0, 0}}}};
     },
     codes::kHermiteData},
    {"AxisMismatch", "cube.json", [](json& j) { cube_block(j)["projectors"]["xi"]["axis"] = "eta"; },
     codes::kAxisMismatch},
    {"Resolution", "cube.json", [](json& j) { cube_block(j)["resolution"] = {2, 2}; }, codes::kResolution},
    {"Grading", "cube.json",
     [](json& j) { cube_block(j)["grading"] = {{"xi", {{"type", "power"}, {"exponent", -1}}}}; }, codes::kGrading},
    {"Nonconforming", "cube.json",
     [](json& j) { cube_block(j)["projectors"]["xi"]["surfaces"][1] = plane({1.5, 0, 0}, {0, 1, 0}, {0, 0, 1}); },
     codes::kNonconforming},
    {"UndefinedMaterial", "cube.json", [](json& j) { cube_block(j)["material"] = "basalt"; },
     codes::kUndefinedMaterial},
    {"Permeability", "cube.json", [](json& j) { j["materials"]["rock"]["permeability"] = 0; }, codes::kPermeability},
    {"UnknownBlockRef", "column.json", [](json& j) { j["problem"]["boundary"][0]["block"] = "nowhere"; },
     codes::kUnknownBlockRef},
    {"UnknownSide", "column.json", [](json& j) { j["problem"]["boundary"][0]["side"] = "top"; }, codes::kUnknownSide},
    {"NoDirichlet", "column.json",
     [](json& j) { j["problem"]["boundary"] = json::array({{{"side", "kappa0"}, {"neumann", 1}}}); },
     codes::kNoDirichlet},
    {"SolverSettings", "column.json", [](json& j) { j["problem"]["solver"]["tolerance"] = -1; },
     codes::kSolverSettings},
    {"BoundaryKind", "column.json", [](json& j) { j["problem"]["boundary"][0]["neumann"] = 2; },
     codes::kBoundaryKind},
    {"MergeTolerance", "cube.json", [](json& j) { j["output"] = {{"merge_tolerance", 0}}; }, codes::kMergeTolerance},
};

} // namespace

INSTANTIATE_TEST_SUITE_P(Codes, SceneErrorCode, ::testing::ValuesIn(kCases),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(Scene, ProblemBinding) {
  const auto r = mutate("two_block.json", [](json& j) {
    j["problem"] = {{"source", {{"value", 1.0}, {"gradient", {0, 0, 2}}}},
                    {"boundary",
                     {{{"side", "kappa0"}, {"dirichlet", 5}},
                      {{"side", "kappa1"}, {"block", "upper"}, {"dirichlet", {{"value", 0}, {"gradient", {1, 0, 0}}}}},
                      {{"side", "kappa1"}, {"block", "lower"}, {"neumann", 7}},
                      {{"side", "xi0"}, {"neumann", 3}},
                      {{"side", "xi0"}, {"dirichlet", 4}}}}};
  });
  ASSERT_TRUE(r.ok()) << r.errors[0].format();
  const auto m = build_mesh(*r.scene);
  const auto p = make_problem(*r.scene, m);
  for (std::size_t c = 0; c < m.cells.size(); ++c) EXPECT_DOUBLE_EQ(p.source[c], 1.0 + 2.0 * m.cells[c].center.z);
  int top = 0, bottom = 0, west = 0, free = 0;
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& face = m.faces[f];
    if (!face.is_boundary()) continue;
    const auto& bc = p.boundary[f];
    switch (face.boundary->side) {
      case HexSide::kappa0:
        ASSERT_TRUE(bc && std::holds_alternative<Dirichlet>(*bc));
        EXPECT_EQ(std::get<Dirichlet>(*bc).pressure, 5.0);
        ++bottom;
        break;
      case HexSide::kappa1:
        ASSERT_TRUE(bc && std::holds_alternative<Dirichlet>(*bc));
        EXPECT_DOUBLE_EQ(std::get<Dirichlet>(*bc).pressure, face.geometry.center.x);
        ++top;
        break;
      case HexSide::xi0:
        ASSERT_TRUE(bc && std::holds_alternative<Dirichlet>(*bc));
        EXPECT_EQ(std::get<Dirichlet>(*bc).pressure, 4.0);
        ++west;
        break;
      default:
        EXPECT_FALSE(bc.has_value());
        ++free;
    }
  }
  EXPECT_EQ(bottom, 4);
  EXPECT_EQ(top, 4);
  EXPECT_EQ(west, 8);
  EXPECT_EQ(free, 24);
}

TEST(Scene, ColumnSolves) {
  const auto r = parse_spec(kSpecs / "column.json");
  ASSERT_TRUE(r.ok());
  const auto m = build_mesh(*r.scene);
  const auto s = solve(make_problem(*r.scene, m));
  ASSERT_EQ(s.solution.size(), 2u);
  EXPECT_NEAR(s.solution[0], 0.75, 1e-10);
  EXPECT_NEAR(s.solution[1], 0.25, 1e-10);
}

TEST(Scene, NoProblemSection) {
  const auto r = parse_spec(kSpecs / "cube.json");
  const auto m = build_mesh(*r.scene);
  EXPECT_THROW(make_problem(*r.scene, m), ConfigError);
}
