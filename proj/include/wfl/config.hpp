#pragma once
// JSON forms of scenes, grids and localizer settings.
//
// Scene file:
//   {
//     "extent": [Lx, Ly],
//     "band": {"center": 3.5e9, "bandwidth": 20e6, "count": 64}   (or "frequencies": [...]),
//     "array": {"type": "ula", "n": 64, "center": [x, y], "angle": 0, "spacing": "half"}
//              (or "positions": [[x, y], ...]),
//     "walls": [{"a": [x, y], "b": [x, y], "gain": [re, im]}],
//     "exclusions": [{"min": [x, y], "max": [x, y]}],
//     "max_order": 2
//   }
// Omitted band and gain fields take the defaults of FreqGrid::default_band()
// and default_reflection_gain().

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "wfl/errors.hpp"
#include "wfl/locengine.hpp"
#include "wfl/radio.hpp"
#include "wfl/scene.hpp"

namespace wfl {

using json = nlohmann::json;

struct SceneFile {
  Scene scene;
  FreqGrid band{FreqGrid::default_band()};
  int max_order{2};
};

namespace detail {

inline Vec2 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError(std::string(what) + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json vec_to(const Vec2& v) { return json::array({v.x, v.y}); }

}  // namespace detail

inline FreqGrid band_from_json(const json& j) {
  if (j.contains("frequencies")) return FreqGrid(j.at("frequencies").get<std::vector<double>>());
  return FreqGrid::uniform(j.value("center", 3.5e9), j.value("bandwidth", 20e6),
                           j.value("count", std::size_t{64}));
}

inline json band_to_json(const FreqGrid& band) {
  return json{{"frequencies", band.frequencies()}};
}

inline SceneFile scene_from_json(const json& j) {
  try {
    SceneFile sf;
    if (j.contains("band")) sf.band = band_from_json(j.at("band"));
    sf.max_order = j.value("max_order", 2);
    if (sf.max_order < 0 || sf.max_order > 2)
      throw FormatError("max_order must be 0, 1 or 2");
    const Vec2 ext = detail::vec_from(j.at("extent"), "extent");
    sf.scene.extent_x = ext.x;
    sf.scene.extent_y = ext.y;

    const json& a = j.at("array");
    if (a.contains("positions")) {
      std::vector<Vec2> pos;
      for (const auto& p : a.at("positions")) pos.push_back(detail::vec_from(p, "array.positions"));
      sf.scene.array = ArrayConfig(std::move(pos));
    } else {
      const std::string type = a.value("type", std::string("ula"));
      if (type != "ula") throw FormatError("array.type must be \"ula\" or positions must be given");
      double spacing = sf.band.lambda0() / 2;
      if (a.contains("spacing") && a.at("spacing").is_number()) spacing = a.at("spacing").get<double>();
      else if (a.contains("spacing") && a.at("spacing") != "half")
        throw FormatError("array.spacing must be a number or \"half\"");
      sf.scene.array = ArrayConfig::uniform_linear(a.at("n").get<std::size_t>(),
                                                   detail::vec_from(a.at("center"), "array.center"),
                                                   spacing, a.value("angle", 0.0));
    }

    if (j.contains("walls"))
      for (const auto& w : j.at("walls")) {
        Wall wall{detail::vec_from(w.at("a"), "wall.a"), detail::vec_from(w.at("b"), "wall.b")};
        if (w.contains("gain")) {
          const Vec2 g = detail::vec_from(w.at("gain"), "wall.gain");
          wall.reflection_gain = {g.x, g.y};
        }
        sf.scene.walls.push_back(wall);
      }
    if (j.contains("exclusions"))
      for (const auto& e : j.at("exclusions"))
        sf.scene.exclusions.push_back(
            {detail::vec_from(e.at("min"), "exclusion.min"), detail::vec_from(e.at("max"), "exclusion.max")});
    sf.scene.validate();
    return sf;
  } catch (const json::exception& e) {
    throw FormatError(std::string("scene JSON: ") + e.what());
  }
}

inline json scene_to_json(const SceneFile& sf) {
  json j;
  j["extent"] = json::array({sf.scene.extent_x, sf.scene.extent_y});
  j["band"] = band_to_json(sf.band);
  j["max_order"] = sf.max_order;
  json pos = json::array();
  for (const auto& p : sf.scene.array.positions()) pos.push_back(detail::vec_to(p));
  j["array"] = json{{"positions", pos}};
  j["walls"] = json::array();
  for (const auto& w : sf.scene.walls)
    j["walls"].push_back({{"a", detail::vec_to(w.a)},
                          {"b", detail::vec_to(w.b)},
                          {"gain", json::array({w.reflection_gain.real(), w.reflection_gain.imag()})}});
  j["exclusions"] = json::array();
  for (const auto& e : sf.scene.exclusions)
    j["exclusions"].push_back({{"min", detail::vec_to(e.min)}, {"max", detail::vec_to(e.max)}});
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline SceneFile load_scene(const std::string& path) { return scene_from_json(read_json_file(path)); }

inline GridSpec grids_from_json(const json& j, double lambda0) {
  GridSpec g = GridSpec::defaults(lambda0);
  g.global_count = j.value("global_count", g.global_count);
  g.local_spacing = j.value("local_spacing", g.local_spacing);
  g.local_side = j.value("local_side", 94 * g.local_spacing);
  g.circle_count = j.value("circle_count", g.circle_count);
  g.circle_points = j.value("circle_points", g.circle_points);
  g.naive_spacing = j.value("naive_spacing", g.naive_spacing);
  g.validate();
  return g;
}

inline json grids_to_json(const GridSpec& g) {
  return {{"global_count", g.global_count}, {"local_side", g.local_side},
          {"local_spacing", g.local_spacing}, {"circle_count", g.circle_count},
          {"circle_points", g.circle_points}, {"naive_spacing", g.naive_spacing}};
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "on-grid") return Variant::OnGrid;
  if (s == "off-grid") return Variant::OffGrid;
  if (s == "off-grid-naive") return Variant::OffGridNaive;
  if (s == "on-grid-naive") return Variant::OnGridNaive;
  throw FormatError("unknown variant '" + s + "'");
}

inline LocalizerConfig localizer_from_json(const json& j) {
  LocalizerConfig c;
  const std::string init = j.value("init_loss", std::string("PI"));
  if (init == "PI") c.init_loss = LossKind::PI;
  else if (init == "PS") c.init_loss = LossKind::PS;
  else throw FormatError("init_loss must be PI or PS");
  c.descent_steps = j.value("descent_steps", c.descent_steps);
  if (j.contains("step_size") && !j.at("step_size").is_null()) c.step_size = j.at("step_size").get<double>();
  c.step_scale = j.value("step_scale", c.step_scale);
  const std::string rule = j.value("rule", std::string(to_string(c.rule)));
  if (rule == "gauss-newton") c.rule = DescentRule::GaussNewton;
  else if (rule == "gradient") c.rule = DescentRule::Gradient;
  else throw FormatError("rule must be gauss-newton or gradient");
  if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.circles = j.value("circles", c.circles);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

inline json localizer_to_json(const LocalizerConfig& c) {
  json j{{"init_loss", to_string(c.init_loss)}, {"descent_steps", c.descent_steps},
         {"step_scale", c.step_scale},          {"rule", to_string(c.rule)},
         {"variant", to_string(c.variant)},     {"circles", c.circles},
         {"seed", c.seed}};
  j["step_size"] = c.step_size ? json(*c.step_size) : json(nullptr);
  return j;
}

}  // namespace wfl
