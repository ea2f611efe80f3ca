#include "qcd/forces.hpp"

#include <cmath>
#include <string>

#include "qcd/errors.hpp"

namespace qcd {

Mat2 eshelby(const MaterialConstants& m, Vec2 u0, Vec2 w0) {
  validate(m);
  double f = energy_density(m, u0, w0);
  Mat2 B = m.C * outer(u0, u0) + m.K * outer(w0, w0) + m.R * outer(u0, w0) +
           m.R * outer(w0, u0);
  return B - identity2(f);
}

namespace {

double contour_bound(const std::vector<Dislocation>& ds, const Domain& domain,
                     int k) {
  double bound = distance_to_outer(domain, ds[k].position);
  for (std::size_t j = 0; j < ds.size(); ++j)
    if (int(j) != k) bound = std::min(bound, dist(ds[k].position, ds[j].position));
  return bound;
}

}  // namespace

double default_contour_radius(const std::vector<Dislocation>& ds,
                              const Domain& domain, int k) {
  return 0.25 * contour_bound(ds, domain, k);
}

Vec2 pk_force(const MaterialConstants& m, const std::vector<Dislocation>& ds,
              const Domain& domain, const CorrectiveSolution& corrective,
              int k, double r, int n_points) {
  validate(m);
  if (k < 0 || k >= int(ds.size()))
    fail(ErrorCode::BadContour, "dislocation index out of range");
  double bound = contour_bound(ds, domain, k);
  if (!(r > 0.0) || !(r < 0.5 * bound))
    fail(ErrorCode::BadContour,
         "contour radius " + std::to_string(r) +
             " violates r < half of (boundary distance, neighbor distance) = " +
             std::to_string(0.5 * bound));

  Vec2 center = ds[k].position;
  Vec2 force{0.0, 0.0};
  double ds_arc = 2.0 * M_PI * r / n_points;
  for (int i = 0; i < n_points; ++i) {
    double a = 2.0 * M_PI * (i + 0.5) / n_points;
    Vec2 n{std::cos(a), std::sin(a)};
    Vec2 p = center + r * n;
    FieldSample s = total_singular_field(ds, p);
    Vec2 u = s.u + corrective.u0.recovered_gradient(p);
    Vec2 w = s.w + corrective.w0.recovered_gradient(p);
    // (f I - B) . n: minus the Eshelby tensor applied to the normal.
    Mat2 M = identity2(energy_density(m, u, w)) -
             (m.C * outer(u, u) + m.K * outer(w, w) + m.R * outer(u, w) +
              m.R * outer(w, u));
    force += ds_arc * (M * n);
  }
  return force;
}

Vec2 pk_force_fd(const MaterialConstants& m,
                 const std::vector<Dislocation>& ds, const Domain& domain,
                 int k, double h_fd, const PipelineOptions& opts) {
  if (k < 0 || k >= int(ds.size()))
    fail(ErrorCode::BadContour, "dislocation index out of range");
  if (!(h_fd > 0.0)) fail(ErrorCode::BadContour, "finite-difference step must be positive");

  auto total_F = [&](Vec2 displaced) -> double {
    std::vector<Dislocation> moved = ds;
    moved[k].position = displaced;
    for (std::size_t j = 0; j < moved.size(); ++j) {
      if (int(j) != k && dist(moved[j].position, displaced) <= 4.0 * h_fd)
        fail(ErrorCode::BadContour, "displaced position collides with another core");
    }
    if (!(distance_to_outer(domain, displaced) > 4.0 * h_fd))
      fail(ErrorCode::BadContour, "displaced position too close to the boundary");
    return renormalized_energy(m, moved, domain, opts).total();
  };

  Vec2 p = ds[k].position;
  double fxp = total_F(p + Vec2{h_fd, 0.0});
  double fxm = total_F(p - Vec2{h_fd, 0.0});
  double fyp = total_F(p + Vec2{0.0, h_fd});
  double fym = total_F(p - Vec2{0.0, h_fd});
  return {-(fxp - fxm) / (2.0 * h_fd), -(fyp - fym) / (2.0 * h_fd)};
}

ForceReport force_report(const MaterialConstants& m,
                         const std::vector<Dislocation>& ds,
                         const Domain& domain, const PipelineOptions& opts,
                         double contour_radius, bool fd_check, double fd_step) {
  Mesh mesh = triangulate(domain, opts.h, opts.grade, opts.mesh);
  CorrectiveSolution corr = corrective_fields_limit(ds, m, mesh, opts.solver_tol);

  ForceReport report;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    DislocationForce df;
    double r = contour_radius > 0.0 ? contour_radius
                                    : default_contour_radius(ds, domain, int(k));
    df.contour_radius = r;
    df.force = pk_force(m, ds, domain, corr, int(k), r);
    Vec2 half = pk_force(m, ds, domain, corr, int(k), 0.5 * r);
    df.r_independence_dev =
        norm(df.force - half) / std::max(norm(df.force), 1e-12);
    if (fd_check) {
      double h_fd = fd_step > 0.0 ? fd_step : 1e-3 * domain_scale(domain);
      df.fd_step = h_fd;
      df.fd_force = pk_force_fd(m, ds, domain, int(k), h_fd, opts);
      df.fd_dev = norm(df.force - *df.fd_force) /
                  std::max(norm(*df.fd_force), 1e-12);
    }
    report.forces.push_back(df);
  }
  return report;
}

}  // namespace qcd
