#pragma once

#include <map>
#include <vector>

#include "qcd/dislocation.hpp"
#include "qcd/geometry.hpp"
#include "qcd/material.hpp"
#include "qcd/solver.hpp"
#include "qcd/triangulate.hpp"

namespace qcd {

// Shared knobs for the meshed-quadrature pipeline.
struct PipelineOptions {
  double h = 0.02;
  double grade = 0.25;
  double solver_tol = 1e-10;
  QuadratureSpec quad{10, 1e-10};
  double fself_cutoff = 0.0;    // auto: 0.45 * admissible bound when <= 0
  double patch_fraction = 0.05; // polar-patch radius as a fraction of the
                                // nearest-core separation
  MeshOptions mesh;
};

// Leading-order core energy: sum over dislocations of
// (C bu^2 + K bw^2 + 2 R bu bw) / (4 pi).
double core_energy(const MaterialConstants& m,
                   const std::vector<Dislocation>& ds);

// Closed-form minimum energy of a single centered dislocation in an annulus
// eps < s < r: (C bu^2 + K bw^2 + 2 R bu bw) ln(r/eps) / (4 pi).
double annulus_energy_exact(const MaterialConstants& m, double bu, double bw,
                            double r, double eps);

// Quadrature of the energy density of (singular + corrective gradient) over
// a punctured mesh.
double total_energy_eps(const MaterialConstants& m,
                        const std::vector<Dislocation>& ds, const Mesh& mesh,
                        const CorrectiveSolution& corrective,
                        const QuadratureSpec& q);

// Self energy: per dislocation, the density of its own field integrated over
// the domain minus an r-ball, plus the ln(r) counterterm; analytically
// independent of r. The committed radius of the meshed r-ball (polygon
// perimeter / 2 pi) is used in the counterterm.
double f_self(const MaterialConstants& m, const std::vector<Dislocation>& ds,
              const Domain& domain, double r, const PipelineOptions& opts);

// Pairwise cross-term energy over the full domain; graded mesh away from the
// cores plus polar-patch quadrature inside a small disc around each core.
double f_int(const MaterialConstants& m, const std::vector<Dislocation>& ds,
             const Domain& domain, const PipelineOptions& opts);

// Boundary-relaxation energy of the corrective fields:
// J[grad u0, grad w0] + outer-boundary coupling line integral.
double f_elastic(const MaterialConstants& m,
                 const std::vector<Dislocation>& ds, const Mesh& mesh,
                 const CorrectiveSolution& corrective,
                 const QuadratureSpec& q);

struct RenormalizedEnergy {
  double self = 0.0;
  double interaction = 0.0;
  double elastic = 0.0;
  double total() const { return self + interaction + elastic; }
};

// Full F = F_self + F_int + F_elastic pipeline: meshes the domain, solves the
// limit corrective problem, and runs the three quadratures.
RenormalizedEnergy renormalized_energy(const MaterialConstants& m,
                                       const std::vector<Dislocation>& ds,
                                       const Domain& domain,
                                       const PipelineOptions& opts);

struct EpsMeasurement {
  double eps_nominal = 0.0;
  double eps_committed = 0.0;  // polygonal hole equivalent radius
  double J = 0.0;
};

// Measured J_eps on the punctured domain with the full minimizer
// (singular + corrective-on-Omega_eps).
EpsMeasurement measure_total_energy(const MaterialConstants& m,
                                    const std::vector<Dislocation>& ds,
                                    const Domain& domain, double eps,
                                    const PipelineOptions& opts,
                                    Mesh* mesh_out = nullptr);

struct AsymptoticFit {
  double E0 = 0.0;       // slope against ln(1/eps)
  double F = 0.0;        // intercept
  double residual = 0.0; // max absolute deviation
};

// Unweighted least squares of J = E0 ln(1/eps) + F. Requires >= 3 samples
// with pairwise-distinct eps (DegenerateFit otherwise).
AsymptoticFit asymptotic_fit(const std::vector<std::pair<double, double>>& samples);

struct InteractionFit {
  double slope = 0.0;
  double coefficient_exact = 0.0;  // (C bu1 bu2 + K bw1 bw2 + R bu1 bw2 + R bw1 bu2) / 2 pi
  double relative_deviation = 0.0;
  std::vector<std::pair<double, double>> samples;  // (delta, F_int)
};

// Places the two prototype dislocations at centroid +- delta/2 along x for
// each separation and fits F_int against ln(1/delta).
InteractionFit interaction_log_fit(const MaterialConstants& m,
                                   const Dislocation& proto1,
                                   const Dislocation& proto2,
                                   const Domain& domain,
                                   const std::vector<double>& separations,
                                   const PipelineOptions& opts);

// Complete energy record for one configuration.
struct EnergyBreakdown {
  double E0 = 0.0;
  double F_self = 0.0;
  double F_int = 0.0;
  double F_elastic = 0.0;
  double F() const { return F_self + F_int + F_elastic; }
  std::vector<EpsMeasurement> J_eps;
  double E0_fit = 0.0;
  double F_fit = 0.0;
  double fit_residual = 0.0;
};

// Largest admissible f_self cutoff times 0.9: half the minimum of pairwise
// distances and distances to the outer boundary.
double default_fself_cutoff(const std::vector<Dislocation>& ds,
                            const Domain& domain);

}  // namespace qcd
