#pragma once

#include <optional>
#include <vector>

#include "qcd/energy.hpp"

namespace qcd {

// Eshelby stress tensor of the limit fields at a point:
// E = -(f[u0,w0] I - (C u0xu0 + K w0xw0 + R u0xw0 + R w0xu0)).
// Trace-free by the algebraic identity trace(B) = 2 f.
Mat2 eshelby(const MaterialConstants& m, Vec2 u0, Vec2 w0);

// Peach-Koehler force on dislocation k: the negative gradient of the
// renormalized energy, evaluated as the contour integral
//   force = + circle_integral (f I - B) . n ds  = - circle_integral E . n ds
// over a circle of radius r around d_k, using the limit fields
// (analytic singular part + recovered corrective gradient). 256-point
// trapezoid; spectrally accurate for the smooth periodic integrand.
Vec2 pk_force(const MaterialConstants& m, const std::vector<Dislocation>& ds,
              const Domain& domain, const CorrectiveSolution& corrective,
              int k, double r, int n_points = 256);

// Central finite difference of -grad_{d_k} F with the full pipeline
// (corrective fields re-solved per displaced configuration); the
// independent oracle for pk_force.
Vec2 pk_force_fd(const MaterialConstants& m,
                 const std::vector<Dislocation>& ds, const Domain& domain,
                 int k, double h_fd, const PipelineOptions& opts);

// Half the theorem bound: r = 1/4 min(dist to boundary, nearest neighbor).
double default_contour_radius(const std::vector<Dislocation>& ds,
                              const Domain& domain, int k);

struct DislocationForce {
  Vec2 force;
  double contour_radius = 0.0;
  double r_independence_dev = 0.0;  // |F(r) - F(r/2)| / max(|F(r)|, eps)
  std::optional<Vec2> fd_force;
  double fd_dev = 0.0;
  double fd_step = 0.0;
};

struct ForceReport {
  std::vector<DislocationForce> forces;
};

ForceReport force_report(const MaterialConstants& m,
                         const std::vector<Dislocation>& ds,
                         const Domain& domain, const PipelineOptions& opts,
                         double contour_radius = 0.0,  // auto when <= 0
                         bool fd_check = false, double fd_step = 0.0);

}  // namespace qcd
