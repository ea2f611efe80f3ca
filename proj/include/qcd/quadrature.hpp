#pragma once

#include <functional>
#include <vector>

#include "qcd/vec2.hpp"

namespace qcd {

// Quadrature request: `order` is the polynomial exactness degree for element
// rules (or points per segment for line rules), `tol` the adaptivity target.
struct QuadratureSpec {
  int order = 10;
  double tol = 1e-10;
};

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre rule with n points, cached per n.
const GaussRule& gauss_legendre(int n);

// Quadrature points on the reference triangle (0,0), (1,0), (0,1);
// weights sum to 1/2 (the reference area). Conical product of
// Gauss-Legendre rules, exact for total degree <= `degree`.
struct TriangleRule {
  std::vector<double> a;  // first barycentric-style coordinate
  std::vector<double> b;  // second coordinate
  std::vector<double> w;
  std::size_t size() const { return w.size(); }
};

const TriangleRule& triangle_rule(int degree);

// Integral of f over the triangle (p0, p1, p2).
double integrate_triangle(Vec2 p0, Vec2 p1, Vec2 p2,
                          const std::function<double(Vec2)>& f,
                          const TriangleRule& rule);

// Integral of f over the segment [a, b] with an n-point Gauss rule.
double integrate_segment(Vec2 a, Vec2 b, const std::function<double(Vec2)>& f,
                         int n);

// Adaptive composite Gauss-Legendre along a parametric curve
// t in [0,1] -> (point, d point/dt). Integrates f(point) . direction where
// `direction` picks tangent or outward-ish normal from the velocity.
// Subdivisions double until successive estimates differ by < tol relative.
enum class LineComponent { Tangent, Normal };

double adaptive_curve_integral(
    const std::function<Vec2(double)>& point,
    const std::function<Vec2(double)>& velocity,
    const std::function<Vec2(Vec2)>& field, LineComponent comp, double tol);

// Integral of f over the disc B_radius(center) in polar coordinates:
// Gauss-Legendre radially, trapezoid in angle. The polar Jacobian tames a
// 1/s singularity of f at the center exactly.
double integrate_disc_polar(Vec2 center, double radius,
                            const std::function<double(Vec2)>& f, int n_radial,
                            int n_angular);

}  // namespace qcd
