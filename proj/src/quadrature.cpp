#include "qcd/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "qcd/errors.hpp"

namespace qcd {

namespace {

// Legendre P_n and derivative at x.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

GaussRule make_gauss(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess, then Newton.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre(n, x);
    (void)p;
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

std::mutex g_rule_mutex;

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) n = 1;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss(n)).first;
  return it->second;
}

const TriangleRule& triangle_rule(int degree) {
  if (degree < 1) degree = 1;
  static std::map<int, TriangleRule> cache;
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;

  // Conical product on the collapsed square: x = u, y = v(1-u), Jacobian 1-u.
  // The Jacobian raises the u-degree by one, hence n = ceil((degree+2)/2).
  int n = (degree + 3) / 2;
  GaussRule g = make_gauss(n);
  TriangleRule rule;
  for (int i = 0; i < n; ++i) {
    double u = 0.5 * (g.nodes[i] + 1.0);
    double wu = 0.5 * g.weights[i];
    for (int j = 0; j < n; ++j) {
      double v = 0.5 * (g.nodes[j] + 1.0);
      double wv = 0.5 * g.weights[j];
      rule.a.push_back(u);
      rule.b.push_back(v * (1.0 - u));
      rule.w.push_back(wu * wv * (1.0 - u));
    }
  }
  return cache.emplace(degree, std::move(rule)).first->second;
}

double integrate_triangle(Vec2 p0, Vec2 p1, Vec2 p2,
                          const std::function<double(Vec2)>& f,
                          const TriangleRule& rule) {
  double two_area = cross(p1 - p0, p2 - p0);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    Vec2 p = p0 + rule.a[q] * (p1 - p0) + rule.b[q] * (p2 - p0);
    sum += rule.w[q] * f(p);
  }
  return sum * two_area;
}

double integrate_segment(Vec2 a, Vec2 b, const std::function<double(Vec2)>& f,
                         int n) {
  const GaussRule& g = gauss_legendre(n);
  double half_len = 0.5 * dist(a, b);
  Vec2 mid = 0.5 * (a + b);
  Vec2 half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec2 p = mid + g.nodes[i] * half;
    sum += g.weights[i] * f(p);
  }
  return sum * half_len;
}

double adaptive_curve_integral(const std::function<Vec2(double)>& point,
                               const std::function<Vec2(double)>& velocity,
                               const std::function<Vec2(Vec2)>& field,
                               LineComponent comp, double tol) {
  const GaussRule& g = gauss_legendre(8);
  auto estimate = [&](int subdivisions) {
    double sum = 0.0;
    for (int s = 0; s < subdivisions; ++s) {
      double t0 = double(s) / subdivisions;
      double t1 = double(s + 1) / subdivisions;
      double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        double t = mid + g.nodes[i] * half;
        Vec2 v = velocity(t);
        Vec2 f = field(point(t));
        // Tangential component picks up |v| from ds = |v| dt; for the normal
        // component, v rotated by -90 degrees has the same length, so the
        // arc-length factor is already included.
        double integrand =
            comp == LineComponent::Tangent ? dot(f, v) : cross(f, v);
        sum += g.weights[i] * half * integrand;
      }
    }
    return sum;
  };

  double prev = estimate(1);
  for (int sub = 2; sub <= 4096; sub *= 2) {
    double cur = estimate(sub);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur)))
      return cur;
    prev = cur;
  }
  return prev;
}

double integrate_disc_polar(Vec2 center, double radius,
                            const std::function<double(Vec2)>& f, int n_radial,
                            int n_angular) {
  const GaussRule& g = gauss_legendre(n_radial);
  double sum = 0.0;
  for (int k = 0; k < n_angular; ++k) {
    double phi = 2.0 * M_PI * (k + 0.5) / n_angular;
    Vec2 dir{std::cos(phi), std::sin(phi)};
    for (int i = 0; i < n_radial; ++i) {
      double s = 0.5 * radius * (g.nodes[i] + 1.0);
      double ws = 0.5 * radius * g.weights[i];
      sum += ws * s * f(center + s * dir);
    }
  }
  return sum * (2.0 * M_PI / n_angular);
}

}  // namespace qcd
