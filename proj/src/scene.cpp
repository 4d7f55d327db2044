#include "retarget/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "retarget/errors.hpp"
#include "retarget/rng.hpp"

namespace retarget {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "sofa", "chair", "table", "tv", "air_conditioner", "refrigerator",
    "sink", "lamp",  "piano", "cabinet", "shelf", "window",
};

Polygon counter_clockwise(Polygon poly) {
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

void check_polygon(const Polygon& poly, const std::string& owner, const char* what) {
  if (poly.size() < 3) throw InvariantError(owner, std::string(what) + " needs at least 3 vertices");
  for (auto p : poly) {
    if (!finite(p)) throw InvariantError(owner, std::string(what) + " has a non-finite vertex");
  }
  if (!is_simple(poly)) throw InvariantError(owner, std::string(what) + " is not simple");
  if (std::abs(signed_area(poly)) <= 0.0) throw InvariantError(owner, std::string(what) + " has zero area");
}

}  // namespace

std::string_view category_name(ObjectCategory c) { return kCategoryNames[category_index(c)]; }

std::optional<ObjectCategory> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    if (kCategoryNames[i] == name) return static_cast<ObjectCategory>(i);
  }
  return std::nullopt;
}

Scene::Scene(std::string id, Polygon floor, std::vector<FurnitureObject> objects, double walkable_clearance)
    : id_(std::move(id)), walkable_clearance_(walkable_clearance) {
  check_polygon(floor, id_, "floor");
  floor_ = counter_clockwise(std::move(floor));
  floor_box_ = bounding_box(floor_);
  if (!(walkable_clearance_ >= 0.0) || !std::isfinite(walkable_clearance_))
    throw InvariantError(id_, "walkable_clearance must be a finite non-negative length");

  std::set<std::string> seen;
  objects_.reserve(objects.size());
  for (auto& obj : objects) {
    if (!seen.insert(obj.id).second) throw InvariantError(obj.id, "duplicate object id");
    check_polygon(obj.footprint, obj.id, "footprint");
    obj.footprint = counter_clockwise(std::move(obj.footprint));
    if (!std::isfinite(obj.top_height) || obj.top_height < 0.0)
      throw InvariantError(obj.id, "top_height must be finite and >= 0");
    if (!finite(obj.attention_point) || !contains_point(obj.footprint, obj.attention_point))
      throw InvariantError(obj.id, "attention_point lies outside the footprint");
    if (!polygon_within(obj.footprint, floor_)) throw InvariantError(obj.id, "footprint leaves the floor");
    object_boxes_.push_back(bounding_box(obj.footprint));
    objects_.push_back(std::move(obj));
  }
}

bool Scene::is_free(Vec2 p, double clearance) const {
  if (!contains_point(floor_, p) || distance_to_boundary(floor_, p) < clearance) return false;
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    const auto& obj = objects_[i];
    if (is_sittable(obj.category)) continue;
    const Box& b = object_boxes_[i];
    if (p.x < b.min.x - clearance || p.x > b.max.x + clearance || p.y < b.min.y - clearance ||
        p.y > b.max.y + clearance)
      continue;
    if (contains_point(obj.footprint, p) || distance_to_boundary(obj.footprint, p) < clearance) return false;
  }
  return true;
}

double Scene::height_at(Vec2 p) const {
  double h = 0.0;
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    const auto& obj = objects_[i];
    if (obj.top_height <= h || !object_boxes_[i].contains(p)) continue;
    if (contains_point(obj.footprint, p)) h = obj.top_height;
  }
  return h;
}

Stance Scene::derive_stance(Vec2 p) const {
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    const auto& obj = objects_[i];
    if (is_sittable(obj.category) && object_boxes_[i].contains(p) && contains_point(obj.footprint, p))
      return Stance::sit;
  }
  return Stance::stand;
}

FurnitureObject make_object(std::string id, ObjectCategory category, Polygon footprint, double top_height,
                            std::optional<Vec2> attention_point) {
  FurnitureObject obj;
  obj.id = std::move(id);
  obj.category = category;
  obj.footprint = counter_clockwise(std::move(footprint));
  obj.top_height = top_height;
  obj.attention_point = attention_point ? *attention_point : centroid(obj.footprint);
  return obj;
}

Polygon rectangle(Vec2 center, double width, double depth, double rotation) {
  const double hw = 0.5 * width;
  const double hd = 0.5 * depth;
  Polygon poly{{-hw, -hd}, {hw, -hd}, {hw, hd}, {-hw, hd}};
  if (rotation != 0.0) {
    for (auto& p : poly) p = rotate(p, rotation);
  }
  for (auto& p : poly) p = p + center;
  return poly;
}

Placement transform_placement(const Placement& p, double rotation, Vec2 translation) {
  return Placement(rotate(p.position, rotation) + translation, p.heading + rotation);
}

Scene transform_scene(const Scene& scene, double rotation, Vec2 translation) {
  auto map = [&](Vec2 p) { return rotate(p, rotation) + translation; };
  Polygon floor;
  for (auto p : scene.floor()) floor.push_back(map(p));
  std::vector<FurnitureObject> objects = scene.objects();
  for (auto& obj : objects) {
    for (auto& p : obj.footprint) p = map(p);
    obj.attention_point = map(obj.attention_point);
  }
  return Scene(scene.id(), std::move(floor), std::move(objects), scene.walkable_clearance());
}

// ---- generation ------------------------------------------------------------

namespace {

struct Archetype {
  double width;
  double depth;
  double height;
};

constexpr std::array<Archetype, kCategoryCount> kArchetypes = {{
    {2.0, 0.9, 0.45},   // sofa
    {0.5, 0.5, 0.45},   // chair
    {1.2, 0.8, 0.75},   // table
    {1.2, 0.35, 1.2},   // tv (on its stand)
    {0.5, 0.3, 1.8},    // air_conditioner
    {0.8, 0.7, 1.8},    // refrigerator
    {0.6, 0.5, 0.9},    // sink
    {0.4, 0.4, 1.6},    // lamp
    {1.5, 0.6, 1.2},    // piano
    {1.0, 0.5, 1.0},    // cabinet
    {1.0, 0.35, 1.8},   // shelf
    {1.0, 0.1, 0.0},    // window
}};

// windows first so they claim wall space; chairs after tables so they can tuck in
constexpr std::array<ObjectCategory, kCategoryCount> kPlacementOrder = {
    ObjectCategory::window,  ObjectCategory::table,        ObjectCategory::sofa,
    ObjectCategory::tv,      ObjectCategory::refrigerator, ObjectCategory::sink,
    ObjectCategory::piano,   ObjectCategory::cabinet,      ObjectCategory::shelf,
    ObjectCategory::air_conditioner, ObjectCategory::lamp, ObjectCategory::chair,
};

constexpr int kMaxAttempts = 10000;

Polygon window_on_wall(Rng& rng, double w, double d, const Archetype& a) {
  const int wall = static_cast<int>(rng.index(4));
  const double along = (wall % 2 == 0) ? w : d;
  const double start = rng.uniform(0.0, along - a.width);
  const double t = a.depth;
  switch (wall) {
    case 0:  // bottom
      return {{start, 0.0}, {start + a.width, 0.0}, {start + a.width, t}, {start, t}};
    case 1:  // right
      return {{w - t, start}, {w, start}, {w, start + a.width}, {w - t, start + a.width}};
    case 2:  // top
      return {{start, d - t}, {start + a.width, d - t}, {start + a.width, d}, {start, d}};
    default:  // left
      return {{0.0, start}, {t, start}, {t, start + a.width}, {0.0, start + a.width}};
  }
}

}  // namespace

Scene generate_synthetic_scene(std::uint64_t seed, const SceneSpec& spec, std::string id) {
  if (!(spec.width > 0.0) || !(spec.depth > 0.0)) throw GenerationError("floor dimensions must be positive");
  Rng rng(derive_seed(seed, "scene-layout"));
  const double w = spec.width;
  const double d = spec.depth;
  Polygon floor{{0.0, 0.0}, {w, 0.0}, {w, d}, {0.0, d}};

  std::vector<FurnitureObject> objects;
  std::vector<std::size_t> tables;
  int attempts = 0;

  auto fits = [&](const Polygon& fp) {
    if (!polygon_within(fp, floor)) return false;
    for (const auto& other : objects) {
      if (polygons_intersect(fp, other.footprint)) return false;
    }
    return true;
  };

  for (ObjectCategory cat : kPlacementOrder) {
    const int count = spec.counts[category_index(cat)];
    const Archetype& a = kArchetypes[category_index(cat)];
    for (int k = 0; k < count; ++k) {
      bool placed = false;
      while (!placed) {
        if (++attempts > kMaxAttempts)
          throw GenerationError("could not place " + std::string(category_name(cat)) + " objects in scene " + id);
        Polygon fp;
        if (cat == ObjectCategory::window) {
          if (a.width > w || a.width > d) throw GenerationError("floor too small for a window");
          fp = window_on_wall(rng, w, d, a);
        } else if (cat == ObjectCategory::chair && !tables.empty() && rng.uniform() < 0.6) {
          const auto& table = objects[tables[rng.index(tables.size())]];
          const Vec2 c = centroid(table.footprint);
          const Vec2 edge = table.footprint[1] - table.footprint[0];
          const double table_rot = std::atan2(edge.y, edge.x);
          const std::size_t side = rng.index(4);
          const double side_rot = table_rot + static_cast<double>(side) * 0.5 * kPi;
          const auto& ta = kArchetypes[category_index(ObjectCategory::table)];
          const double reach = 0.5 * (side % 2 == 0 ? ta.width : ta.depth);
          const Vec2 offset = rotate({reach + 0.5 * a.depth + 0.05, 0.0}, side_rot);
          fp = rectangle(c + offset, a.width, a.depth, side_rot);
        } else {
          const double rot = static_cast<double>(rng.index(4)) * 0.5 * kPi;
          const Vec2 center{rng.uniform(0.0, w), rng.uniform(0.0, d)};
          fp = rectangle(center, a.width, a.depth, rot);
        }
        if (!fits(fp)) continue;
        const std::string obj_id = std::string(category_name(cat)) + std::to_string(k + 1);
        objects.push_back(make_object(obj_id, cat, std::move(fp), a.height));
        placed = true;
      }
    }
    if (cat == ObjectCategory::table) {
      for (std::size_t i = 0; i < objects.size(); ++i) {
        if (objects[i].category == ObjectCategory::table) tables.push_back(i);
      }
    }
  }
  return Scene(std::move(id), std::move(floor), std::move(objects));
}

SceneSpec random_scene_spec(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "scene-spec"));
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1))); };
  SceneSpec spec;
  spec.width = 5.5 + 0.25 * static_cast<double>(pick(0, 10));
  spec.depth = 5.5 + 0.25 * static_cast<double>(pick(0, 10));
  auto& c = spec.counts;
  c[category_index(ObjectCategory::sofa)] = pick(1, 2);
  c[category_index(ObjectCategory::chair)] = pick(2, 4);
  c[category_index(ObjectCategory::table)] = pick(1, 2);
  c[category_index(ObjectCategory::tv)] = 1;
  c[category_index(ObjectCategory::air_conditioner)] = pick(0, 1);
  c[category_index(ObjectCategory::refrigerator)] = pick(0, 1);
  c[category_index(ObjectCategory::sink)] = pick(0, 1);
  c[category_index(ObjectCategory::lamp)] = pick(0, 2);
  c[category_index(ObjectCategory::piano)] = pick(0, 1);
  c[category_index(ObjectCategory::cabinet)] = pick(0, 2);
  c[category_index(ObjectCategory::shelf)] = pick(0, 1);
  c[category_index(ObjectCategory::window)] = pick(1, 2);
  return spec;
}

}  // namespace retarget
