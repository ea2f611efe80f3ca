#include "qcd/dislocation.hpp"

#include <algorithm>
#include <limits>

namespace qcd {

namespace {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = norm2(ab);
  if (len2 == 0.0) return dist(p, a);
  double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + t * ab);
}

void check_loop_clearance(const FieldPair& field, const Loop& loop) {
  double excl = field.exclusion_radius();
  for (const Dislocation& d : field.sources()) {
    double dmin;
    if (const auto* c = std::get_if<CircleLoop>(&loop)) {
      dmin = std::abs(dist(d.position, c->center) - c->radius);
    } else {
      const auto& v = std::get<PolylineLoop>(loop).vertices;
      if (v.size() < 3)
        fail(ErrorCode::GeometryError, "polyline loop needs >= 3 vertices");
      dmin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < v.size(); ++i)
        dmin = std::min(dmin, point_segment_distance(d.position, v[i],
                                                     v[(i + 1) % v.size()]));
    }
    if (dmin <= excl)
      fail(ErrorCode::LoopThroughCore,
           "loop passes within the exclusion radius of a dislocation core");
  }
}

Circulation integrate_loop(const FieldPair& field, const Loop& loop,
                           LineComponent comp, double tol) {
  check_loop_clearance(field, loop);
  auto field_u = [&](Vec2 p) { return field.u(p); };
  auto field_w = [&](Vec2 p) { return field.w(p); };

  Circulation out;
  if (const auto* c = std::get_if<CircleLoop>(&loop)) {
    auto point = [&](double t) -> Vec2 {
      double a = 2.0 * M_PI * t;
      return c->center + c->radius * Vec2{std::cos(a), std::sin(a)};
    };
    auto velocity = [&](double t) -> Vec2 {
      double a = 2.0 * M_PI * t;
      return 2.0 * M_PI * c->radius * Vec2{-std::sin(a), std::cos(a)};
    };
    out.gamma_u = adaptive_curve_integral(point, velocity, field_u, comp, tol);
    out.gamma_w = adaptive_curve_integral(point, velocity, field_w, comp, tol);
    return out;
  }

  const auto& v = std::get<PolylineLoop>(loop).vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Vec2 a = v[i], b = v[(i + 1) % v.size()];
    auto point = [&](double t) -> Vec2 { return a + t * (b - a); };
    auto velocity = [&](double) -> Vec2 { return b - a; };
    out.gamma_u += adaptive_curve_integral(point, velocity, field_u, comp, tol);
    out.gamma_w += adaptive_curve_integral(point, velocity, field_w, comp, tol);
  }
  return out;
}

}  // namespace

Circulation burgers_loop(const FieldPair& field, const Loop& loop,
                         const QuadratureSpec& q) {
  return integrate_loop(field, loop, LineComponent::Tangent, q.tol);
}

Circulation flux_loop(const FieldPair& field, const Loop& loop,
                      const QuadratureSpec& q) {
  // For a CCW loop, cross(f, velocity) dt = f . n ds with n outward.
  return integrate_loop(field, loop, LineComponent::Normal, q.tol);
}

}  // namespace qcd
