#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace deixis {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

using Polyline = std::vector<Point2>;

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

namespace geom {

double point_segment_distance(Point2 p, Point2 a, Point2 b);

// Distance from p to the nearest edge of an open polyline (closed=false) or
// the boundary of a closed ring (closed=true).
double point_boundary_distance(Point2 p, std::span<const Point2> pts, bool closed);

// Ray casting; points on the boundary count as inside.
bool point_in_polygon(Point2 p, std::span<const Point2> ring);

double signed_area(std::span<const Point2> ring);
Point2 polygon_centroid(std::span<const Point2> ring);
Point2 polyline_centroid(std::span<const Point2> pts);
double polyline_length(std::span<const Point2> pts);

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

// True when no two non-adjacent edges of the ring touch.
bool is_simple_polygon(std::span<const Point2> ring);

std::vector<Point2> convex_hull(std::span<const Point2> pts);

// Sub-interval [lo, hi] of the parameter range [0, 1] on segment a->b where the
// distance to segment c->d is <= radius; returns false when empty. Distance
// along the segment is convex in the parameter, so the feasible set is an
// interval found by ternary search plus bisection on both sides.
bool segment_within_radius(Point2 a, Point2 b, Point2 c, Point2 d, double radius,
                           double& lo, double& hi);

// Net signed heading change along the polyline, after dropping steps shorter
// than min_step (noise on dwell portions would otherwise dominate).
double net_turning(std::span<const Point2> pts, double min_step);

}  // namespace geom
}  // namespace deixis
