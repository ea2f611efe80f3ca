#pragma once

#include <variant>
#include <vector>

#include "qcd/errors.hpp"
#include "qcd/vec2.hpp"

namespace qcd {

struct Disc {
  Vec2 center;
  double radius = 1.0;
};

// Simple polygon, counterclockwise vertex order.
struct PolygonShape {
  std::vector<Vec2> vertices;
};

using OuterShape = std::variant<Disc, PolygonShape>;

// Planar region: disc or simple polygon, with optional circular core holes.
struct Domain {
  OuterShape outer;
  std::vector<Disc> holes;
};

double polygon_signed_area(const std::vector<Vec2>& v);
bool polygon_is_simple(const std::vector<Vec2>& v);
bool point_in_polygon(const std::vector<Vec2>& v, Vec2 p);

// Throws GeometryError when invariants fail: holes strictly inside the outer
// boundary, pairwise disjoint, positive radii; polygon simple and CCW.
void validate_domain(const Domain& d);

// Inside the outer shape and outside every hole.
bool point_in_domain(const Domain& d, Vec2 p);

// Distance from an interior point to the outer boundary (0 if outside).
double distance_to_outer(const Domain& d, Vec2 p);

double domain_outer_area(const Domain& d);
Vec2 domain_centroid(const Domain& d);

// Characteristic length: outer radius for a disc, half the bounding-box
// diagonal for a polygon.
double domain_scale(const Domain& d);

inline Domain disc_domain(Vec2 center, double radius) {
  return Domain{Disc{center, radius}, {}};
}

}  // namespace qcd
