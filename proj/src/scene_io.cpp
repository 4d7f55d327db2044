#include <fstream>
#include <sstream>

#include "json.hpp"
#include "retarget/errors.hpp"
#include "retarget/scene.hpp"

namespace retarget {

using nlohmann::json;

namespace {

Vec2 parse_point(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("expected a point [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Polygon parse_polygon(const json& j) {
  if (!j.is_array()) throw ParseError("expected a polygon [[x, y], ...]");
  Polygon poly;
  poly.reserve(j.size());
  for (const auto& p : j) poly.push_back(parse_point(p));
  return poly;
}

json point_json(Vec2 p) { return json::array({p.x, p.y}); }

json polygon_json(const Polygon& poly) {
  json arr = json::array();
  for (auto p : poly) arr.push_back(point_json(p));
  return arr;
}

}  // namespace

Scene load_scene(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scene document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scene document must be a JSON object");
  if (!doc.contains("id") || !doc["id"].is_string()) throw ParseError("scene requires a string \"id\"");
  if (!doc.contains("floor")) throw ParseError("scene requires \"floor\"");

  std::vector<FurnitureObject> objects;
  if (doc.contains("objects")) {
    if (!doc["objects"].is_array()) throw ParseError("\"objects\" must be an array");
    for (const auto& o : doc["objects"]) {
      if (!o.is_object()) throw ParseError("object entries must be JSON objects");
      if (!o.contains("id") || !o["id"].is_string()) throw ParseError("object requires a string \"id\"");
      if (!o.contains("category") || !o["category"].is_string())
        throw ParseError("object requires a string \"category\"");
      const auto category = parse_category(o["category"].get<std::string>());
      if (!category) throw ParseError("unknown category \"" + o["category"].get<std::string>() + "\"");
      if (!o.contains("footprint")) throw ParseError("object requires \"footprint\"");
      if (!o.contains("top_height") || !o["top_height"].is_number())
        throw ParseError("object requires a numeric \"top_height\"");
      std::optional<Vec2> attention;
      if (o.contains("attention_point") && !o["attention_point"].is_null())
        attention = parse_point(o["attention_point"]);
      Polygon fp = parse_polygon(o["footprint"]);
      if (fp.size() < 3) throw InvariantError(o["id"].get<std::string>(), "footprint needs at least 3 vertices");
      objects.push_back(make_object(o["id"].get<std::string>(), *category, std::move(fp),
                                    o["top_height"].get<double>(), attention));
    }
  }
  double clearance = kDefaultClearance;
  if (doc.contains("walkable_clearance")) {
    if (!doc["walkable_clearance"].is_number()) throw ParseError("\"walkable_clearance\" must be numeric");
    clearance = doc["walkable_clearance"].get<double>();
  }
  return Scene(doc["id"].get<std::string>(), parse_polygon(doc["floor"]), std::move(objects), clearance);
}

Scene load_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scene file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scene(buf.str());
}

std::string serialize_scene(const Scene& scene) {
  json doc;
  doc["id"] = scene.id();
  doc["floor"] = polygon_json(scene.floor());
  doc["walkable_clearance"] = scene.walkable_clearance();
  json objects = json::array();
  for (const auto& obj : scene.objects()) {
    json o;
    o["id"] = obj.id;
    o["category"] = std::string(category_name(obj.category));
    o["footprint"] = polygon_json(obj.footprint);
    o["top_height"] = obj.top_height;
    o["attention_point"] = point_json(obj.attention_point);
    objects.push_back(std::move(o));
  }
  doc["objects"] = std::move(objects);
  return doc.dump(2) + "\n";
}

}  // namespace retarget
