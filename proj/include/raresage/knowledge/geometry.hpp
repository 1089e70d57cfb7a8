#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace raresage::soz {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Closed implicitly: the last vertex connects back to the first.
using Polygon = std::vector<Point>;

/// Signed winding count of `polygon` around `p` (counter-clockwise positive
/// in a y-up frame). Nonzero means inside for simple polygons. Behaviour for
/// points on an edge is unspecified. Throws ValidationError below 3 vertices.
int winding_number(Point p, std::span<const Point> polygon);

bool inside(Point p, std::span<const Point> polygon);

/// True when no two non-adjacent edges intersect and no edge is degenerate.
bool is_simple(std::span<const Point> polygon);

struct BoundingBox {
  double min_x, min_y, max_x, max_y;
  bool contains(Point p) const { return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y; }
};

BoundingBox bounding_box(std::span<const Point> polygon);

/// Regular n-gon approximation of an axis-aligned ellipse, counter-clockwise.
Polygon ellipse_polygon(Point center, double rx, double ry, std::size_t vertices, double phase = 0.0);

}  // namespace raresage::soz
