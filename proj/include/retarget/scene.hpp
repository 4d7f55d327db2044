#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retarget/geometry.hpp"

namespace retarget {

/// Closed, ordered category set. The integer value is the index used by the
/// per-category feature slots and is stable across serialization.
enum class ObjectCategory : std::uint8_t {
  sofa,
  chair,
  table,
  tv,
  air_conditioner,
  refrigerator,
  sink,
  lamp,
  piano,
  cabinet,
  shelf,
  window,
};

inline constexpr std::size_t kCategoryCount = 12;

std::string_view category_name(ObjectCategory c);
std::optional<ObjectCategory> parse_category(std::string_view name);
inline constexpr std::size_t category_index(ObjectCategory c) { return static_cast<std::size_t>(c); }
inline constexpr bool is_sittable(ObjectCategory c) {
  return c == ObjectCategory::sofa || c == ObjectCategory::chair;
}

struct FurnitureObject {
  std::string id;
  ObjectCategory category = ObjectCategory::table;
  Polygon footprint;  // counter-clockwise, meters
  double top_height = 0.0;
  Vec2 attention_point{};

  friend bool operator==(const FurnitureObject&, const FurnitureObject&) = default;
};

enum class Stance { stand, sit };

/// Position plus heading. The heading is normalized into [0, 2pi) on
/// construction; stance is derived from the scene (Scene::derive_stance).
struct Placement {
  Vec2 position{};
  double heading = 0.0;

  Placement() = default;
  Placement(Vec2 pos, double heading_rad) : position(pos), heading(normalize_angle(heading_rad)) {}

  friend bool operator==(const Placement&, const Placement&) = default;
};

inline constexpr double kDefaultClearance = 0.30;

/// A single-floor indoor scene: floor polygon plus categorized furniture
/// footprints with top heights. Immutable once constructed; the constructor
/// enforces every invariant and throws InvariantError on violation.
class Scene {
 public:
  Scene(std::string id, Polygon floor, std::vector<FurnitureObject> objects,
        double walkable_clearance = kDefaultClearance);

  const std::string& id() const noexcept { return id_; }
  const Polygon& floor() const noexcept { return floor_; }
  const std::vector<FurnitureObject>& objects() const noexcept { return objects_; }
  double walkable_clearance() const noexcept { return walkable_clearance_; }
  const Box& bounds() const noexcept { return floor_box_; }

  /// Disk of radius `clearance` lies inside the floor and touches no
  /// non-sittable footprint.
  bool is_free(Vec2 p, double clearance) const;

  /// Highest top_height among footprints containing `p`; 0 on bare floor.
  double height_at(Vec2 p) const;

  Stance derive_stance(Vec2 p) const;

  bool inside_floor(Vec2 p) const { return contains_point(floor_, p); }

  friend bool operator==(const Scene& a, const Scene& b) {
    return a.id_ == b.id_ && a.floor_ == b.floor_ && a.objects_ == b.objects_ &&
           a.walkable_clearance_ == b.walkable_clearance_;
  }

 private:
  std::string id_;
  Polygon floor_;
  std::vector<FurnitureObject> objects_;
  double walkable_clearance_;
  Box floor_box_;
  std::vector<Box> object_boxes_;
};

/// Builds an object with the attention point defaulting to the centroid.
FurnitureObject make_object(std::string id, ObjectCategory category, Polygon footprint, double top_height,
                            std::optional<Vec2> attention_point = std::nullopt);

/// Axis-aligned rectangle footprint centered at `center`, rotated by `rotation`.
Polygon rectangle(Vec2 center, double width, double depth, double rotation = 0.0);

/// Applies p -> R(rotation) p + translation to every coordinate of the scene.
Scene transform_scene(const Scene& scene, double rotation, Vec2 translation);
Placement transform_placement(const Placement& p, double rotation, Vec2 translation);

// ---- file format -------------------------------------------------------

Scene load_scene(std::string_view document);
Scene load_scene_file(const std::filesystem::path& path);
std::string serialize_scene(const Scene& scene);

// ---- procedural generation -----------------------------------------------

struct SceneSpec {
  double width = 6.0;  // x extent, meters
  double depth = 6.0;  // y extent, meters
  std::array<int, kCategoryCount> counts{};
};

/// Deterministic rejection-sampled layout on a rectangular floor. Throws
/// GenerationError when the objects cannot be placed within 10,000 attempts.
Scene generate_synthetic_scene(std::uint64_t seed, const SceneSpec& spec, std::string id = "synthetic");

/// A furnished-room recipe with per-category counts drawn from `seed`.
SceneSpec random_scene_spec(std::uint64_t seed);

}  // namespace retarget
