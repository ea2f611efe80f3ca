#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "qcd/errors.hpp"
#include "qcd/quadrature.hpp"
#include "qcd/vec2.hpp"

namespace qcd {

// A screw dislocation: position and Burgers moduli for the phonon and
// phason fields.
struct Dislocation {
  Vec2 position;
  double bu = 0.0;  // phonon Burgers modulus
  double bw = 0.0;  // phason Burgers modulus
};

struct FieldSample {
  Vec2 u;
  Vec2 w;
};

// Closed-form singular fields of a single dislocation:
//   u = (bu / 2pi) * (-(y - y0), (x - x0)) / ((x - x0)^2 + (y - y0)^2)
// and the same shape for w with bw. Tangential to circles around the core,
// magnitude |b| / (2 pi dist).
inline FieldSample singular_field(const Dislocation& d, Vec2 p,
                                  double exclusion_radius = 0.0) {
  Vec2 r = p - d.position;
  double s2 = norm2(r);
  if (s2 <= exclusion_radius * exclusion_radius || s2 == 0.0)
    fail(ErrorCode::EvalAtCore,
         "field evaluated within exclusion radius of a dislocation core");
  Vec2 g = perp(r) / (2.0 * M_PI * s2);
  return {d.bu * g, d.bw * g};
}

inline FieldSample total_singular_field(const std::vector<Dislocation>& ds,
                                        Vec2 p,
                                        double exclusion_radius = 0.0) {
  FieldSample total;
  for (const Dislocation& d : ds) {
    FieldSample s = singular_field(d, p, exclusion_radius);
    total.u += s.u;
    total.w += s.w;
  }
  return total;
}

// Phonon/phason strain fields as (singular superposition) + (optional
// corrective gradients supplied by the caller as plain callables).
class FieldPair {
 public:
  using GradientFn = std::function<Vec2(Vec2)>;

  FieldPair(std::vector<Dislocation> sources, double exclusion_radius)
      : sources_(std::move(sources)), exclusion_(exclusion_radius) {}

  void set_corrective(GradientFn grad_u, GradientFn grad_w) {
    grad_u_ = std::move(grad_u);
    grad_w_ = std::move(grad_w);
  }

  Vec2 u(Vec2 p) const {
    Vec2 v = total_singular_field(sources_, p, exclusion_).u;
    if (grad_u_) v += grad_u_(p);
    return v;
  }
  Vec2 w(Vec2 p) const {
    Vec2 v = total_singular_field(sources_, p, exclusion_).w;
    if (grad_w_) v += grad_w_(p);
    return v;
  }

  const std::vector<Dislocation>& sources() const { return sources_; }
  double exclusion_radius() const { return exclusion_; }

 private:
  std::vector<Dislocation> sources_;
  double exclusion_ = 0.0;
  GradientFn grad_u_;
  GradientFn grad_w_;
};

struct CircleLoop {
  Vec2 center;
  double radius = 1.0;
};

// Closed polyline, vertices in order; the closing segment is implicit.
struct PolylineLoop {
  std::vector<Vec2> vertices;
};

using Loop = std::variant<CircleLoop, PolylineLoop>;

struct Circulation {
  double gamma_u = 0.0;
  double gamma_w = 0.0;
};

// Circulations (Burgers measurements) of both fields around a closed loop,
// by adaptive composite Gauss-Legendre per segment or arc. For a pure
// singular superposition this recovers the sum of enclosed Burgers moduli.
Circulation burgers_loop(const FieldPair& field, const Loop& loop,
                         const QuadratureSpec& q);

// Outward flux integrals over the same loops; zero for the divergence-free
// singular fields.
Circulation flux_loop(const FieldPair& field, const Loop& loop,
                      const QuadratureSpec& q);

}  // namespace qcd
