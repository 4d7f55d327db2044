#include "retarget/geometry.hpp"

#include <algorithm>
#include <limits>

namespace retarget {

double normalize_angle(double rad) {
  double r = std::fmod(rad, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double wrapped_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -kPi) d += kTwoPi;
  return d;
}

double angle_between(double a, double b) { return std::abs(wrapped_difference(a, b)); }

double signed_area(std::span<const Vec2> poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) acc += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * acc;
}

Vec2 centroid(std::span<const Vec2> poly) {
  const double area = signed_area(poly);
  const std::size_t n = poly.size();
  if (n == 0) return {};
  if (std::abs(area) < 1e-15) {
    Vec2 mean{};
    for (auto p : poly) mean = mean + p;
    return (1.0 / static_cast<double>(n)) * mean;
  }
  // shift to the first vertex for better conditioning
  const Vec2 o = poly[0];
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i] - o;
    const Vec2 b = poly[(i + 1) % n] - o;
    const double c = cross(a, b);
    cx += (a.x + b.x) * c;
    cy += (a.y + b.y) * c;
  }
  return {o.x + cx / (6.0 * area), o.y + cy / (6.0 * area)};
}

Box bounding_box(std::span<const Vec2> poly) {
  Box box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
          {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (auto p : poly) {
    box.min.x = std::min(box.min.x, p.x);
    box.min.y = std::min(box.min.y, p.y);
    box.max.x = std::max(box.max.x, p.x);
    box.max.y = std::max(box.max.y, p.y);
  }
  return box;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_cross_properly(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 c = poly[j];
      const Vec2 d = poly[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // adjacent edges share exactly one vertex; collinear overlap is a fold
        const Vec2 shared = (j == i + 1) ? b : a;
        const Vec2 p = (j == i + 1) ? a : b;
        const Vec2 q = (j == i + 1) ? d : c;
        if (orientation(p, shared, q) == 0 && dot(p - shared, q - shared) > 0.0) return false;
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

double distance_to_boundary(std::span<const Vec2> poly, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % n]));
  return best;
}

bool contains_point(std::span<const Vec2> poly, Vec2 p) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[j];
    const Vec2 b = poly[i];
    if (orientation(a, b, p) == 0 && on_segment(a, b, p)) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = (a.x - b.x) * (p.y - b.y) / (a.y - b.y) + b.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (!bounding_box(a).overlaps(bounding_box(b))) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
    }
  }
  return contains_point(a, b[0]) || contains_point(b, a[0]);
}

bool polygon_within(std::span<const Vec2> inner, std::span<const Vec2> outer) {
  // boundary contact within the tolerance is allowed so that rigidly
  // transformed scenes (wall-mounted windows) stay valid despite rounding
  auto inside = [&](Vec2 p) { return contains_point(outer, p) || distance_to_boundary(outer, p) <= kBoundaryTolerance; };
  for (auto p : inner) {
    if (!inside(p)) return false;
  }
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const Vec2 a = inner[i];
    const Vec2 b = inner[(i + 1) % inner.size()];
    if (!inside(0.5 * (a + b))) return false;
    for (std::size_t j = 0; j < outer.size(); ++j) {
      const Vec2 c = outer[j];
      const Vec2 d = outer[(j + 1) % outer.size()];
      if (!segments_cross_properly(a, b, c, d)) continue;
      const double gap = std::min({distance_to_segment(a, c, d), distance_to_segment(b, c, d),
                                   distance_to_segment(c, a, b), distance_to_segment(d, a, b)});
      if (gap > kBoundaryTolerance) return false;
    }
  }
  return true;
}

}  // namespace retarget
