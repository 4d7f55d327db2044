#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace retarget {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Maps any angle into [0, 2pi).
double normalize_angle(double rad);

/// Signed difference a - b wrapped into (-pi, pi].
double wrapped_difference(double a, double b);

/// Unsigned angular distance between two headings, in [0, pi].
double angle_between(double a, double b);

/// Rotates `p` by `rad` counter-clockwise about the origin.
inline Vec2 rotate(Vec2 p, double rad) {
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

struct Box {
  Vec2 min{};
  Vec2 max{};
  bool contains(Vec2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
  bool overlaps(const Box& o) const {
    return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y;
  }
};

using Polygon = std::vector<Vec2>;

/// Signed area (positive for counter-clockwise vertex order).
double signed_area(std::span<const Vec2> poly);
Vec2 centroid(std::span<const Vec2> poly);
Box bounding_box(std::span<const Vec2> poly);

/// True when no two non-adjacent edges touch and no two adjacent edges fold back.
bool is_simple(std::span<const Vec2> poly);

/// Closed containment: points on the boundary count as inside.
bool contains_point(std::span<const Vec2> poly, Vec2 p);

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
double distance_to_boundary(std::span<const Vec2> poly, Vec2 p);

/// Closed segment intersection (touching counts).
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Interiors overlap or boundaries cross/touch.
bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b);

/// Slack for boundary contact in polygon_within, meters.
inline constexpr double kBoundaryTolerance = 1e-9;

/// `inner` lies inside `outer` (closed): every vertex of `inner` is contained
/// and no edge of `inner` properly crosses an edge of `outer`.
bool polygon_within(std::span<const Vec2> inner, std::span<const Vec2> outer);

}  // namespace retarget
