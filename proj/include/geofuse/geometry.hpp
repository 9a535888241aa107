#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "geofuse/errors.hpp"

namespace geofuse {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Ring = std::vector<Point>;  // closed: first vertex == last

struct LineString {
  std::vector<Point> points;  // >= 2 vertices
};

struct Polygon {
  std::vector<Ring> rings;  // rings[0] outer, rest holes; even-odd fill
};

using Geometry = std::variant<Point, LineString, Polygon>;

struct Feature {
  Geometry geometry;
  std::map<std::string, std::string> properties;
};

/// Parsed vector geodata in world units consistent with the target transform.
struct VectorLayer {
  std::vector<Feature> features;
};

inline double sq_dist(const Point& a, const Point& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Squared distance from p to segment [a, b].
inline double sq_dist_point_segment(const Point& p, const Point& a, const Point& b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return sq_dist(p, a);
  double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  Point proj{a.x + t * vx, a.y + t * vy};
  return sq_dist(p, proj);
}

/// Even-odd containment test over all rings (holes come out naturally).
/// Half-open crossing rule: an edge counts when its y-interval half-open
/// contains p.y and the intersection lies strictly right of p.
inline bool point_in_polygon(const Point& p, const Polygon& poly) {
  bool inside = false;
  for (const Ring& ring : poly.rings) {
    size_t n = ring.size();
    for (size_t i = 0; i + 1 < n; ++i) {
      const Point& a = ring[i];
      const Point& b = ring[i + 1];
      if ((a.y > p.y) != (b.y > p.y)) {
        double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
        if (p.x < x_cross) inside = !inside;
      }
    }
  }
  return inside;
}

inline double sq_dist_point_ring(const Point& p, const Ring& ring) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < ring.size(); ++i)
    best = std::min(best, sq_dist_point_segment(p, ring[i], ring[i + 1]));
  return best;
}

/// Squared distance from a point to a geometry; 0 inside a polygon.
inline double sq_dist_point_geometry(const Point& p, const Geometry& geom) {
  if (const Point* pt = std::get_if<Point>(&geom)) return sq_dist(p, *pt);
  if (const LineString* ls = std::get_if<LineString>(&geom)) {
    double best = std::numeric_limits<double>::infinity();
    const auto& pts = ls->points;
    if (pts.size() == 1) return sq_dist(p, pts[0]);
    for (size_t i = 0; i + 1 < pts.size(); ++i)
      best = std::min(best, sq_dist_point_segment(p, pts[i], pts[i + 1]));
    return best;
  }
  const Polygon& poly = std::get<Polygon>(geom);
  if (point_in_polygon(p, poly)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const Ring& ring : poly.rings) best = std::min(best, sq_dist_point_ring(p, ring));
  return best;
}

/// True when p lies within `radius` (inclusive) of the geometry.
inline bool within_radius(const Point& p, const Geometry& geom, double radius) {
  if (radius < 0.0) return false;
  return sq_dist_point_geometry(p, geom) <= radius * radius;
}

/// Axis-aligned bounds of a geometry, grown by pad on each side.
struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(const Point& p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  bool contains(const Point& p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

inline Bounds geometry_bounds(const Geometry& geom, double pad = 0.0) {
  Bounds b;
  if (const Point* pt = std::get_if<Point>(&geom)) {
    b.add(*pt);
  } else if (const LineString* ls = std::get_if<LineString>(&geom)) {
    for (const Point& p : ls->points) b.add(p);
  } else {
    for (const Ring& ring : std::get<Polygon>(geom).rings)
      for (const Point& p : ring) b.add(p);
  }
  b.min_x -= pad;
  b.min_y -= pad;
  b.max_x += pad;
  b.max_y += pad;
  return b;
}

inline void validate_feature(const Feature& f, size_t index) {
  auto err = [&](const std::string& what) {
    return parse_error("feature " + std::to_string(index) + ": " + what);
  };
  if (const LineString* ls = std::get_if<LineString>(&f.geometry)) {
    if (ls->points.empty()) throw err("linestring has no vertices");
  } else if (const Polygon* poly = std::get_if<Polygon>(&f.geometry)) {
    if (poly->rings.empty()) throw err("polygon has no rings");
    for (const Ring& ring : poly->rings) {
      if (ring.size() < 4) throw err("polygon ring has fewer than 4 positions");
      if (ring.front().x != ring.back().x || ring.front().y != ring.back().y)
        throw err("polygon ring is not closed");
    }
  }
}

}  // namespace geofuse
