#include "deixis/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace deixis::geom {

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double u = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * u);
}

double point_boundary_distance(Point2 p, std::span<const Point2> pts, bool closed) {
  if (pts.empty()) return INFINITY;
  if (pts.size() == 1) return distance(p, pts[0]);
  double best = INFINITY;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    best = std::min(best, point_segment_distance(p, pts[i], pts[i + 1]));
  }
  if (closed) best = std::min(best, point_segment_distance(p, pts.back(), pts.front()));
  return best;
}

bool point_in_polygon(Point2 p, std::span<const Point2> ring) {
  const size_t n = ring.size();
  if (n < 3) return false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    if (point_segment_distance(p, ring[j], ring[i]) <= 1e-12) return true;
  }
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = ring[i];
    const Point2 b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double signed_area(std::span<const Point2> ring) {
  double acc = 0.0;
  const size_t n = ring.size();
  for (size_t i = 0; i < n; ++i) acc += cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * acc;
}

Point2 polygon_centroid(std::span<const Point2> ring) {
  const double area = signed_area(ring);
  const size_t n = ring.size();
  if (n == 0) return {};
  if (std::abs(area) < 1e-15) {
    Point2 mean;
    for (const auto& p : ring) mean = mean + p;
    return mean * (1.0 / static_cast<double>(n));
  }
  double cx = 0.0, cy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i];
    const Point2 b = ring[(i + 1) % n];
    const double c = cross(a, b);
    cx += (a.x + b.x) * c;
    cy += (a.y + b.y) * c;
  }
  return {cx / (6.0 * area), cy / (6.0 * area)};
}

Point2 polyline_centroid(std::span<const Point2> pts) {
  if (pts.empty()) return {};
  double total = 0.0;
  Point2 acc;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = distance(pts[i], pts[i + 1]);
    acc = acc + (pts[i] + pts[i + 1]) * (0.5 * len);
    total += len;
  }
  if (total == 0.0) return pts.front();
  return acc * (1.0 / total);
}

double polyline_length(std::span<const Point2> pts) {
  double total = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) total += distance(pts[i], pts[i + 1]);
  return total;
}

namespace {

int orientation(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  if (std::abs(v) < 1e-15) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) - 1e-15 <= p.x && p.x <= std::max(a.x, b.x) + 1e-15 &&
         std::min(a.y, b.y) - 1e-15 <= p.y && p.y <= std::max(a.y, b.y) + 1e-15;
}

}  // namespace

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
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

bool is_simple_polygon(std::span<const Point2> ring) {
  const size_t n = ring.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i];
    const Point2 b = ring[(i + 1) % n];
    for (size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a, b, ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<Point2> convex_hull(std::span<const Point2> pts) {
  std::vector<Point2> p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<Point2> hull(2 * p.size());
  size_t k = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], p[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = p[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

bool segment_within_radius(Point2 a, Point2 b, Point2 c, Point2 d, double radius,
                           double& lo, double& hi) {
  const Point2 ab = b - a;
  auto f = [&](double u) { return point_segment_distance(a + ab * u, c, d); };

  double l = 0.0, r = 1.0;
  for (int it = 0; it < 100 && r - l > 1e-13; ++it) {
    const double m1 = l + (r - l) / 3.0;
    const double m2 = r - (r - l) / 3.0;
    if (f(m1) <= f(m2)) {
      r = m2;
    } else {
      l = m1;
    }
  }
  const double u_min = 0.5 * (l + r);
  if (f(u_min) > radius) return false;

  if (f(0.0) <= radius) {
    lo = 0.0;
  } else {
    double out = 0.0, in = u_min;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (out + in);
      (f(m) <= radius ? in : out) = m;
    }
    lo = in;
  }
  if (f(1.0) <= radius) {
    hi = 1.0;
  } else {
    double in = u_min, out = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (out + in);
      (f(m) <= radius ? in : out) = m;
    }
    hi = in;
  }
  return true;
}

double net_turning(std::span<const Point2> pts, double min_step) {
  std::vector<Point2> kept;
  for (const auto& p : pts) {
    if (kept.empty() || distance(p, kept.back()) >= min_step) kept.push_back(p);
  }
  double total = 0.0;
  for (size_t i = 2; i < kept.size(); ++i) {
    const Point2 u = kept[i - 1] - kept[i - 2];
    const Point2 v = kept[i] - kept[i - 1];
    total += std::atan2(cross(u, v), dot(u, v));
  }
  return total;
}

}  // namespace deixis::geom
