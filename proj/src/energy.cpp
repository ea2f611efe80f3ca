#include "qcd/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "qcd/errors.hpp"

namespace qcd {

double core_energy(const MaterialConstants& m,
                   const std::vector<Dislocation>& ds) {
  validate(m);
  double sum = 0.0;
  for (const Dislocation& d : ds) sum += burgers_form(m, d.bu, d.bw);
  return sum / (4.0 * M_PI);
}

double annulus_energy_exact(const MaterialConstants& m, double bu, double bw,
                            double r, double eps) {
  validate(m);
  if (!(eps > 0.0) || !(eps < r))
    fail(ErrorCode::BadRadii, "need 0 < eps < r (eps = " + std::to_string(eps) +
                                  ", r = " + std::to_string(r) + ")");
  return burgers_form(m, bu, bw) * std::log(r / eps) / (4.0 * M_PI);
}

double total_energy_eps(const MaterialConstants& m,
                        const std::vector<Dislocation>& ds, const Mesh& mesh,
                        const CorrectiveSolution& corrective,
                        const QuadratureSpec& q) {
  return integrate_domain_tri(
      mesh,
      [&](int t, Vec2 p) {
        FieldSample s = total_singular_field(ds, p);
        Vec2 u = s.u + corrective.u0.gradient(t);
        Vec2 w = s.w + corrective.w0.gradient(t);
        return energy_density(m, u, w);
      },
      q);
}

namespace {

double min_clearance(const Domain& domain) {
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < domain.holes.size(); ++i) {
    const Disc& hi = domain.holes[i];
    c = std::min(c, distance_to_outer(domain, hi.center) - hi.radius);
    for (std::size_t j = i + 1; j < domain.holes.size(); ++j)
      c = std::min(c, dist(hi.center, domain.holes[j].center) - hi.radius -
                          domain.holes[j].radius);
  }
  return c;
}

// Largest h satisfying the triangulation size precondition on this domain.
double admissible_h(const Domain& domain, double h) {
  double c = min_clearance(domain);
  if (!std::isfinite(c)) return h;
  return std::min(h, 0.24 * c);
}

}  // namespace

double default_fself_cutoff(const std::vector<Dislocation>& ds,
                            const Domain& domain) {
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    bound = std::min(bound, distance_to_outer(domain, ds[i].position));
    for (std::size_t j = i + 1; j < ds.size(); ++j)
      bound = std::min(bound, dist(ds[i].position, ds[j].position));
  }
  return 0.45 * bound;
}

double f_self(const MaterialConstants& m, const std::vector<Dislocation>& ds,
              const Domain& domain, double r, const PipelineOptions& opts) {
  validate(m);
  if (ds.empty()) return 0.0;
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    bound = std::min(bound, distance_to_outer(domain, ds[i].position));
    for (std::size_t j = i + 1; j < ds.size(); ++j)
      bound = std::min(bound, dist(ds[i].position, ds[j].position));
  }
  if (!(r > 0.0) || !(r < 0.5 * bound))
    fail(ErrorCode::BadCutoff,
         "cutoff r = " + std::to_string(r) +
             " violates r < half of (pairwise distance, boundary distance) = " +
             std::to_string(0.5 * bound));

  double total = 0.0;
  for (const Dislocation& d : ds) {
    Domain sub = domain;
    sub.holes = {Disc{d.position, r}};
    double h_eff = admissible_h(sub, opts.h);
    Mesh mesh = triangulate(sub, h_eff, opts.grade, opts.mesh);
    double quad = integrate_domain(
        mesh,
        [&](Vec2 p) {
          FieldSample s = singular_field(d, p);
          return energy_density(m, s.u, s.w);
        },
        opts.quad);
    double r_eff = mesh.hole_committed_radius[0];
    total += quad + burgers_form(m, d.bu, d.bw) * std::log(r_eff) / (4.0 * M_PI);
  }
  return total;
}

double f_int(const MaterialConstants& m, const std::vector<Dislocation>& ds,
             const Domain& domain, const PipelineOptions& opts) {
  validate(m);
  if (ds.size() < 2) return 0.0;

  double min_sep = std::numeric_limits<double>::infinity();
  double min_clear = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    min_clear = std::min(min_clear, distance_to_outer(domain, ds[i].position));
    for (std::size_t j = i + 1; j < ds.size(); ++j)
      min_sep = std::min(min_sep, dist(ds[i].position, ds[j].position));
  }
  double rho = std::min(opts.patch_fraction * min_sep, 0.25 * min_clear);

  Domain patched = domain;
  for (const Dislocation& d : ds) patched.holes.push_back({d.position, rho});
  double h_eff = admissible_h(patched, opts.h);
  Mesh mesh = triangulate(patched, h_eff, opts.grade, opts.mesh);

  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = i + 1; j < ds.size(); ++j) {
      auto density = [&](Vec2 p) {
        FieldSample si = singular_field(ds[i], p);
        FieldSample sj = singular_field(ds[j], p);
        return m.C * dot(si.u, sj.u) + m.K * dot(si.w, sj.w) +
               m.R * dot(si.u, sj.w) + m.R * dot(sj.u, si.w);
      };
      double pair = integrate_domain(mesh, density, opts.quad);
      // Patch discs: polar quadrature; the Jacobian cancels the 1/s factor of
      // the member fields, the rest is smooth.
      for (const Dislocation& d : ds)
        pair += integrate_disc_polar(d.position, rho, density, 24, 128);
      total += pair;
    }
  }
  return total;
}

double f_elastic(const MaterialConstants& m,
                 const std::vector<Dislocation>& ds, const Mesh& mesh,
                 const CorrectiveSolution& corrective,
                 const QuadratureSpec& q) {
  validate(m);
  StiffnessMatrix K = assemble_laplace(mesh);
  const auto& u = corrective.u0.nodal();
  const auto& w = corrective.w0.nodal();
  double J = 0.5 * (m.C * stiffness_product(K, u, u) +
                    m.K * stiffness_product(K, w, w) +
                    2.0 * m.R * stiffness_product(K, u, w));
  double boundary = integrate_boundary_n(
      mesh, kTagOuter,
      [&](Vec2 p, Vec2 n) {
        FieldSample s = total_singular_field(ds, p);
        StressPair sp = hooke(m, s.u, s.w);
        return corrective.u0.value(p) * dot(sp.sigma, n) +
               corrective.w0.value(p) * dot(sp.rho, n);
      },
      q);
  return J + boundary;
}

RenormalizedEnergy renormalized_energy(const MaterialConstants& m,
                                       const std::vector<Dislocation>& ds,
                                       const Domain& domain,
                                       const PipelineOptions& opts) {
  RenormalizedEnergy out;
  if (ds.empty()) return out;
  double r = opts.fself_cutoff > 0.0 ? opts.fself_cutoff
                                     : default_fself_cutoff(ds, domain);
  out.self = f_self(m, ds, domain, r, opts);
  out.interaction = f_int(m, ds, domain, opts);
  Mesh mesh = triangulate(domain, opts.h, opts.grade, opts.mesh);
  CorrectiveSolution corr = corrective_fields_limit(ds, m, mesh, opts.solver_tol);
  out.elastic = f_elastic(m, ds, mesh, corr, opts.quad);
  return out;
}

EpsMeasurement measure_total_energy(const MaterialConstants& m,
                                    const std::vector<Dislocation>& ds,
                                    const Domain& domain, double eps,
                                    const PipelineOptions& opts,
                                    Mesh* mesh_out) {
  Domain punctured = domain;
  for (const Dislocation& d : ds) punctured.holes.push_back({d.position, eps});
  validate_domain(punctured);
  double h_eff = admissible_h(punctured, opts.h);
  Mesh mesh = triangulate(punctured, h_eff, opts.grade, opts.mesh);
  CorrectiveSolution corr = corrective_fields_eps(ds, m, mesh, opts.solver_tol);
  EpsMeasurement out;
  out.eps_nominal = eps;
  // With several holes, commit the mean equivalent radius (they share eps).
  double sum = 0.0;
  std::size_t base = domain.holes.size();
  for (std::size_t k = base; k < mesh.hole_committed_radius.size(); ++k)
    sum += mesh.hole_committed_radius[k];
  out.eps_committed = sum / double(mesh.hole_committed_radius.size() - base);
  out.J = total_energy_eps(m, ds, mesh, corr, opts.quad);
  if (mesh_out) *mesh_out = std::move(mesh);
  return out;
}

AsymptoticFit asymptotic_fit(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3)
    fail(ErrorCode::DegenerateFit, "need at least 3 (eps, J) samples");
  std::set<double> distinct;
  for (auto& [eps, J] : samples) {
    if (!(eps > 0.0)) fail(ErrorCode::DegenerateFit, "eps must be positive");
    if (!distinct.insert(eps).second)
      fail(ErrorCode::DegenerateFit, "eps values must be distinct");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = double(samples.size());
  for (auto& [eps, J] : samples) {
    double x = std::log(1.0 / eps);
    sx += x;
    sy += J;
    sxx += x * x;
    sxy += x * J;
  }
  AsymptoticFit fit;
  double denom = n * sxx - sx * sx;
  fit.E0 = (n * sxy - sx * sy) / denom;
  fit.F = (sy - fit.E0 * sx) / n;
  fit.residual = 0.0;
  for (auto& [eps, J] : samples) {
    double x = std::log(1.0 / eps);
    fit.residual = std::max(fit.residual, std::abs(J - fit.E0 * x - fit.F));
  }
  return fit;
}

InteractionFit interaction_log_fit(const MaterialConstants& m,
                                   const Dislocation& proto1,
                                   const Dislocation& proto2,
                                   const Domain& domain,
                                   const std::vector<double>& separations,
                                   const PipelineOptions& opts) {
  validate(m);
  Vec2 c = domain_centroid(domain);
  double clearance = distance_to_outer(domain, c);
  InteractionFit fit;
  fit.coefficient_exact =
      (m.C * proto1.bu * proto2.bu + m.K * proto1.bw * proto2.bw +
       m.R * proto1.bu * proto2.bw + m.R * proto1.bw * proto2.bu) /
      (2.0 * M_PI);
  std::vector<std::pair<double, double>> pts;
  for (double delta : separations) {
    if (!(delta > 0.0) || delta > 0.25 * clearance)
      fail(ErrorCode::BadRadii,
           "separation " + std::to_string(delta) +
               " too large for the domain (need <= clearance/4)");
    std::vector<Dislocation> pair = {proto1, proto2};
    pair[0].position = c - Vec2{0.5 * delta, 0.0};
    pair[1].position = c + Vec2{0.5 * delta, 0.0};
    double v = f_int(m, pair, domain, opts);
    pts.push_back({std::log(1.0 / delta), v});
    fit.samples.push_back({delta, v});
  }
  if (pts.size() < 2)
    fail(ErrorCode::DegenerateFit, "need at least 2 separations");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = double(pts.size());
  for (auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.relative_deviation =
      std::abs(fit.slope - fit.coefficient_exact) /
      std::max(1e-300, std::abs(fit.coefficient_exact));
  return fit;
}

}  // namespace qcd
