#include "raresage/knowledge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "raresage/error.hpp"

namespace raresage::soz {

namespace {

// > 0 when c is left of the directed line a->b.
double is_left(Point a, Point b, Point c) {
  return (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
}

int orientation(Point a, Point b, Point c) {
  const double v = is_left(a, b, c);
  return (v > 0) - (v < 0);
}

bool on_segment(Point a, Point b, Point c) {
  return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
         c.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace

int winding_number(Point p, std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) throw ValidationError("polygon needs at least 3 vertices");
  int wn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = polygon[i];
    const Point b = polygon[(i + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && is_left(a, b, p) > 0) ++wn;  // upward crossing, p left of edge
    } else {
      if (b.y <= p.y && is_left(a, b, p) < 0) --wn;  // downward crossing, p right of edge
    }
  }
  return wn;
}

bool inside(Point p, std::span<const Point> polygon) { return winding_number(p, polygon) != 0; }

bool is_simple(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (polygon[i] == polygon[(i + 1) % n]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n])) {
        return false;
      }
    }
  }
  return true;
}

BoundingBox bounding_box(std::span<const Point> polygon) {
  BoundingBox b{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const auto& p : polygon) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

Polygon ellipse_polygon(Point center, double rx, double ry, std::size_t vertices, double phase) {
  Polygon poly;
  poly.reserve(vertices);
  for (std::size_t i = 0; i < vertices; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(vertices);
    poly.push_back({center.x + rx * std::cos(a), center.y + ry * std::sin(a)});
  }
  return poly;
}

}  // namespace raresage::soz
