#include "crashnav/world/floorplan_io.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace crashnav::world {

using nlohmann::json;
using K = FloorPlanError::Kind;

namespace {

Vec2 parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FloorPlanError(K::BadField, where + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

FloorPlan load_floorplan(const std::string& document, double drone_radius) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw FloorPlanError(K::Parse, std::string("floorplan parse error: ") + e.what());
  }
  if (!doc.is_object()) throw FloorPlanError(K::Parse, "floorplan document must be an object");

  const auto version = doc.find("format_version");
  if (version == doc.end() || !version->is_number_integer())
    throw FloorPlanError(K::BadField, "missing integer format_version");
  if (version->get<int>() != kFloorPlanFormatVersion)
    throw FloorPlanError(K::BadField, "unsupported floorplan format_version " + std::to_string(version->get<int>()));

  FloorPlan plan;
  if (!doc.contains("name") || !doc["name"].is_string()) throw FloorPlanError(K::BadField, "missing name");
  plan.name = doc["name"].get<std::string>();

  if (!doc.contains("segments") || !doc["segments"].is_array())
    throw FloorPlanError(K::BadField, "missing segments array");
  for (std::size_t i = 0; i < doc["segments"].size(); ++i) {
    const json& js = doc["segments"][i];
    const std::string where = "segments[" + std::to_string(i) + "]";
    if (!js.is_object()) throw FloorPlanError(K::BadField, where + ": expected object");
    Segment s;
    s.a = parse_point(js.value("a", json()), where + ".a");
    s.b = parse_point(js.value("b", json()), where + ".b");
    if (!js.contains("material") || !js["material"].is_string())
      throw FloorPlanError(K::BadField, where + ": missing material");
    s.material.kind = material_kind_from_string(js["material"].get<std::string>());
    const json tex = js.value("texture_id", json(0));
    if (!tex.is_number_integer()) throw FloorPlanError(K::BadField, where + ": texture_id must be an integer");
    s.material.texture_id = tex.get<int>();
    plan.segments.push_back(s);
  }

  if (!doc.contains("spawn_regions") || !doc["spawn_regions"].is_array())
    throw FloorPlanError(K::BadField, "missing spawn_regions array");
  for (std::size_t i = 0; i < doc["spawn_regions"].size(); ++i) {
    const json& jr = doc["spawn_regions"][i];
    if (!jr.is_array() || jr.size() != 4)
      throw FloorPlanError(K::BadField, "spawn_regions[" + std::to_string(i) + "]: expected [x0, y0, x1, y1]");
    for (const auto& v : jr)
      if (!v.is_number()) throw FloorPlanError(K::BadField, "spawn_regions entries must be numbers");
    Rect r;
    r.min = {std::min(jr[0].get<double>(), jr[2].get<double>()), std::min(jr[1].get<double>(), jr[3].get<double>())};
    r.max = {std::max(jr[0].get<double>(), jr[2].get<double>()), std::max(jr[1].get<double>(), jr[3].get<double>())};
    plan.spawn_regions.push_back(r);
  }

  validate(plan, drone_radius);
  return plan;
}

FloorPlan load_floorplan_file(const std::filesystem::path& path, double drone_radius) {
  std::ifstream in(path);
  if (!in) throw FloorPlanError(K::Parse, "cannot open floorplan " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_floorplan(ss.str(), drone_radius);
}

std::string dump_floorplan(const FloorPlan& plan) {
  json doc;
  doc["format_version"] = kFloorPlanFormatVersion;
  doc["name"] = plan.name;
  doc["segments"] = json::array();
  for (const auto& s : plan.segments) {
    doc["segments"].push_back({{"a", {s.a.x(), s.a.y()}},
                               {"b", {s.b.x(), s.b.y()}},
                               {"material", std::string(to_string(s.material.kind))},
                               {"texture_id", s.material.texture_id}});
  }
  doc["spawn_regions"] = json::array();
  for (const auto& r : plan.spawn_regions)
    doc["spawn_regions"].push_back({r.min.x(), r.min.y(), r.max.x(), r.max.y()});
  return doc.dump(2);
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("CRASHNAV_DATA_DIR"); env && *env) return env;
  return CRASHNAV_DEFAULT_DATA_DIR;
}

std::filesystem::path shipped_plan_path(const std::string& name) { return data_dir() / "plans" / (name + ".json"); }

const std::vector<std::string>& shipped_plan_names() {
  static const std::vector<std::string> names{"glass_door", "office_floor",   "entrance_atrium",
                                              "hallway",    "hallway_chairs", "wean"};
  return names;
}

FloorPlan resolve_plan(const std::string& name_or_path) {
  const std::filesystem::path p(name_or_path);
  if (std::filesystem::is_regular_file(p)) return load_floorplan_file(p);
  return load_floorplan_file(shipped_plan_path(name_or_path));
}

}  // namespace crashnav::world
