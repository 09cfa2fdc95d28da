#include <gtest/gtest.h>

#include "support.hpp"
#include "wfl/config.hpp"

using namespace wfl;

namespace {

json room_json() {
  return json::parse(R"({
    "extent": [4, 4],
    "band": {"center": 3.5e9, "bandwidth": 20e6, "count": 8},
    "array": {"type": "ula", "n": 8, "center": [0, -3], "spacing": "half"},
    "walls": [{"a": [-2.5, -4], "b": [-2.5, 2.5]},
              {"a": [2.5, -4], "b": [2.5, 2.5], "gain": [-0.5, 0.1]}],
    "exclusions": [{"min": [0.5, 0.5], "max": [1, 1]}],
    "max_order": 1
  })");
}

}  // namespace

TEST(SceneJson, ParsesFields) {
  const SceneFile sf = scene_from_json(room_json());
  EXPECT_EQ(sf.scene.extent_x, 4.0);
  EXPECT_EQ(sf.band.size(), 8u);
  EXPECT_EQ(sf.max_order, 1);
  ASSERT_EQ(sf.scene.array.size(), 8u);
  const auto& p = sf.scene.array.positions();
  EXPECT_NEAR(distance(p[0], p[1]), sf.band.lambda0() / 2, 1e-12);
  EXPECT_EQ(sf.scene.walls[0].reflection_gain, default_reflection_gain());
  EXPECT_EQ(sf.scene.walls[1].reflection_gain, (cplx{-0.5, 0.1}));
  ASSERT_EQ(sf.scene.exclusions.size(), 1u);
  EXPECT_EQ(sf.scene.exclusions[0].max.y, 1.0);
}

TEST(SceneJson, RoundTripIsExact) {
  const SceneFile a = scene_from_json(room_json());
  const SceneFile b = scene_from_json(scene_to_json(a));
  EXPECT_EQ(scene_to_json(a).dump(), scene_to_json(b).dump());
  ASSERT_EQ(a.band.size(), b.band.size());
  for (std::size_t k = 0; k < a.band.size(); ++k) EXPECT_EQ(a.band.frequencies()[k], b.band.frequencies()[k]);
  for (std::size_t j = 0; j < a.scene.array.size(); ++j)
    EXPECT_EQ(a.scene.array.positions()[j].x, b.scene.array.positions()[j].x);
}

TEST(SceneJson, ExplicitPositionsAndDefaults) {
  const auto sf = scene_from_json(json::parse(R"({"extent": [2, 2], "array": {"positions": [[0, -5], [1, -5]]}})"));
  EXPECT_EQ(sf.scene.array.size(), 2u);
  EXPECT_EQ(sf.band.size(), 64u);
  EXPECT_EQ(sf.max_order, 2);
  EXPECT_TRUE(sf.scene.walls.empty());
}

TEST(SceneJson, ErrorsAreFormatErrors) {
  auto bad = [](const char* field, json v) {
    json j = room_json();
    j[field] = std::move(v);
    return j;
  };
  EXPECT_THROW(scene_from_json(bad("extent", json::array({1}))), FormatError);
  EXPECT_THROW(scene_from_json(bad("max_order", 3)), FormatError);
  EXPECT_THROW(scene_from_json(bad("array", json{{"type", "planar"}, {"n", 4}, {"center", {0, -3}}})), FormatError);
  EXPECT_THROW(scene_from_json(bad("array", json{{"n", 4}, {"center", {0, -3}}, {"spacing", "quarter"}})),
               FormatError);
  json missing = room_json();
  missing.erase("array");
  EXPECT_THROW(scene_from_json(missing), FormatError);
  EXPECT_THROW(read_json_file("/nonexistent/scene.json"), FormatError);
}

TEST(SceneJson, InvalidGeometryPropagates) {
  json j = room_json();
  j["walls"] = json::array({json{{"a", {1, 1}}, {"b", {1, 1}}}});
  EXPECT_THROW(scene_from_json(j), InvalidGeometry);
  j["walls"] = json::array({json{{"a", {0, 3}}, {"b", {1, 3}}, {"gain", {1.5, 0}}}});
  EXPECT_THROW(scene_from_json(j), InvalidGeometry);
}

TEST(GridJson, DefaultsAndRoundTrip) {
  const double lam = 0.0857;
  const GridSpec d = grids_from_json(json::object(), lam);
  EXPECT_DOUBLE_EQ(d.local_spacing, lam / 8);
  EXPECT_DOUBLE_EQ(d.local_side, 94 * lam / 8);
  EXPECT_EQ(d.global_count, 1000u);
  const GridSpec ns = grids_from_json(json{{"local_spacing", 0.01}}, lam);
  EXPECT_DOUBLE_EQ(ns.local_side, 0.94);
  const GridSpec rt = grids_from_json(grids_to_json(ns), lam);
  EXPECT_EQ(grids_to_json(rt).dump(), grids_to_json(ns).dump());
  EXPECT_THROW(grids_from_json(json{{"circle_count", 0}}, lam), InvalidArgument);
}

TEST(LocalizerJson, DefaultsAndRoundTrip) {
  const LocalizerConfig d = localizer_from_json(json::object());
  EXPECT_EQ(d.init_loss, LossKind::PI);
  EXPECT_EQ(d.rule, DescentRule::GaussNewton);
  EXPECT_EQ(d.variant, Variant::OffGrid);
  EXPECT_FALSE(d.step_size);
  const auto c = localizer_from_json(json{{"init_loss", "PS"}, {"rule", "gradient"}, {"step_size", 1e-4},
                                          {"variant", "on-grid-naive"}, {"circles", false}, {"seed", 9}});
  EXPECT_EQ(localizer_to_json(localizer_from_json(localizer_to_json(c))).dump(), localizer_to_json(c).dump());
  EXPECT_EQ(*c.step_size, 1e-4);
  EXPECT_THROW(localizer_from_json(json{{"init_loss", "L2"}}), FormatError);
  EXPECT_THROW(localizer_from_json(json{{"rule", "newton"}}), FormatError);
  EXPECT_THROW(localizer_from_json(json{{"step_size", -1.0}}), InvalidArgument);
}

TEST(LocalizerJson, VariantStrings) {
  for (Variant v : {Variant::OnGrid, Variant::OffGrid, Variant::OffGridNaive, Variant::OnGridNaive})
    EXPECT_EQ(variant_from_string(to_string(v)), v);
  EXPECT_THROW(variant_from_string("offgrid"), FormatError);
}
