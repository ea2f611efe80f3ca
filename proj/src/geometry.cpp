#include "qcd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qcd {

double polygon_signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

namespace {

bool segments_properly_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
    double v = cross(q - p, r - p);
    return (v > 0.0) - (v < 0.0);
  };
  int o1 = orient(a, b, c), o2 = orient(a, b, d);
  int o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = norm2(ab);
  if (len2 == 0.0) return dist(p, a);
  double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + t * ab);
}

}  // namespace

bool polygon_is_simple(const std::vector<Vec2>& v) {
  std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = v[i], b = v[(i + 1) % n];
    if (dist(a, b) == 0.0) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip adjacent segments (they share a vertex).
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_properly_intersect(a, b, v[j], v[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool point_in_polygon(const std::vector<Vec2>& v, Vec2 p) {
  bool inside = false;
  std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      double t = (p.y - v[i].y) / (v[j].y - v[i].y);
      if (p.x < v[i].x + t * (v[j].x - v[i].x)) inside = !inside;
    }
  }
  return inside;
}

void validate_domain(const Domain& d) {
  if (const auto* disc = std::get_if<Disc>(&d.outer)) {
    if (!(disc->radius > 0.0))
      fail(ErrorCode::GeometryError, "outer disc radius must be positive");
  } else {
    const auto& v = std::get<PolygonShape>(d.outer).vertices;
    if (v.size() < 3)
      fail(ErrorCode::GeometryError, "polygon needs at least 3 vertices");
    if (!polygon_is_simple(v))
      fail(ErrorCode::GeometryError, "polygon is self-intersecting");
    if (!(polygon_signed_area(v) > 0.0))
      fail(ErrorCode::GeometryError, "polygon must be counterclockwise");
  }
  for (std::size_t i = 0; i < d.holes.size(); ++i) {
    const Disc& h = d.holes[i];
    if (!(h.radius > 0.0))
      fail(ErrorCode::GeometryError,
           "hole " + std::to_string(i) + " has non-positive radius");
    double clearance = distance_to_outer(d, h.center);
    if (!(clearance > h.radius))
      fail(ErrorCode::GeometryError,
           "hole " + std::to_string(i) + " touches or crosses the outer boundary");
    for (std::size_t j = i + 1; j < d.holes.size(); ++j) {
      if (!(dist(h.center, d.holes[j].center) > h.radius + d.holes[j].radius))
        fail(ErrorCode::GeometryError, "holes " + std::to_string(i) + " and " +
                                           std::to_string(j) + " overlap");
    }
  }
}

bool point_in_domain(const Domain& d, Vec2 p) {
  bool inside;
  if (const auto* disc = std::get_if<Disc>(&d.outer))
    inside = dist(p, disc->center) < disc->radius;
  else
    inside = point_in_polygon(std::get<PolygonShape>(d.outer).vertices, p);
  if (!inside) return false;
  for (const Disc& h : d.holes)
    if (dist(p, h.center) < h.radius) return false;
  return true;
}

double distance_to_outer(const Domain& d, Vec2 p) {
  if (const auto* disc = std::get_if<Disc>(&d.outer))
    return std::max(0.0, disc->radius - dist(p, disc->center));
  const auto& v = std::get<PolygonShape>(d.outer).vertices;
  if (!point_in_polygon(v, p)) return 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i)
    dmin = std::min(dmin, point_segment_distance(p, v[i], v[(i + 1) % v.size()]));
  return dmin;
}

double domain_outer_area(const Domain& d) {
  if (const auto* disc = std::get_if<Disc>(&d.outer))
    return M_PI * disc->radius * disc->radius;
  return polygon_signed_area(std::get<PolygonShape>(d.outer).vertices);
}

Vec2 domain_centroid(const Domain& d) {
  if (const auto* disc = std::get_if<Disc>(&d.outer)) return disc->center;
  const auto& v = std::get<PolygonShape>(d.outer).vertices;
  double a = 0.0;
  Vec2 c{0.0, 0.0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    Vec2 p = v[i], q = v[(i + 1) % v.size()];
    double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  return c / (3.0 * a);
}

double domain_scale(const Domain& d) {
  if (const auto* disc = std::get_if<Disc>(&d.outer)) return disc->radius;
  const auto& v = std::get<PolygonShape>(d.outer).vertices;
  Vec2 lo = v[0], hi = v[0];
  for (const Vec2& p : v) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  return 0.5 * dist(lo, hi);
}

}  // namespace qcd
