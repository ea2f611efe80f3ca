#pragma once

#include <functional>
#include <vector>

#include "qcd/dislocation.hpp"
#include "qcd/material.hpp"
#include "qcd/mesh.hpp"

namespace qcd {

// Piecewise-linear scalar FE field on a mesh: nodal values, linear
// interpolation, piecewise-constant gradient per triangle.
class ScalarFieldFE {
 public:
  ScalarFieldFE() = default;
  ScalarFieldFE(const Mesh* mesh, std::vector<double> nodal);

  const Mesh& mesh() const { return *mesh_; }
  const std::vector<double>& nodal() const { return nodal_; }
  std::vector<double>& nodal() { return nodal_; }

  double value(Vec2 p) const;
  Vec2 gradient(int tri) const;
  // Area-weighted nodal gradient recovery, linearly interpolated; smoother
  // pointwise than the raw per-triangle gradient.
  Vec2 recovered_gradient(Vec2 p) const;

  // Mean over the ball (by the mesh quadrature restricted to the ball).
  double mean_over_ball(Vec2 center, double radius) const;
  void shift(double c);

 private:
  const Mesh* mesh_ = nullptr;
  std::vector<double> nodal_;
  mutable std::vector<Vec2> nodal_gradient_;  // lazy
  void build_nodal_gradients() const;
};

// Prescribed-flux Laplace problem on a mesh: solve -div(grad v) = 0 with
// dv/dn = g on the tagged boundary, v normalized to zero mean over a ball.
struct NeumannProblem {
  const Mesh* mesh = nullptr;
  // flux g at (point, tag, outward unit normal)
  std::function<double(Vec2, int, Vec2)> flux;
  Vec2 ball_center;
  double ball_radius = 0.0;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;       // relative linear-system residual
  double flux_defect = 0.0;    // |sum of boundary flux| before projection
};

ScalarFieldFE solve_neumann(const NeumannProblem& p, double tol,
                            SolveStats* stats = nullptr);

// Scalar Laplace stiffness action and energy forms (shared with the energy
// module, which evaluates J[grad u, grad w] exactly on FE fields).
struct StiffnessMatrix {
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;
  int n = 0;
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
};

StiffnessMatrix assemble_laplace(const Mesh& mesh);
double stiffness_product(const StiffnessMatrix& K, const std::vector<double>& a,
                         const std::vector<double>& b);

// 2x2 reduction certificate for the coupled constitutive matrix
// [[C, R], [R, K]]: its inverse and condition number. The inverse turns the
// coupled elliptic system into two decoupled Laplace problems.
struct DecoupleCertificate {
  Mat2 inverse;
  double condition = 1.0;
};

DecoupleCertificate decouple(const MaterialConstants& m);

// Corrective potentials (u0, w0); the physical corrective strains are their
// gradients added onto the singular superposition.
struct CorrectiveSolution {
  ScalarFieldFE u0;
  ScalarFieldFE w0;
  SolveStats stats_u;
  SolveStats stats_w;
};

// Limit problem on the unpunctured domain: dv/dn = -(sum_i field_i) . n on
// the outer boundary only. The mesh must have no holes.
CorrectiveSolution corrective_fields_limit(const std::vector<Dislocation>& ds,
                                           const MaterialConstants& m,
                                           const Mesh& mesh, double tol);

// Punctured problem: outer flux as above; on hole i the self-field is
// omitted, dv/dn = -(sum_{j != i} field_j) . n, normals outward to the
// meshed region.
CorrectiveSolution corrective_fields_eps(const std::vector<Dislocation>& ds,
                                         const MaterialConstants& m,
                                         const Mesh& mesh, double tol);

// Residual of (u0, w0) plugged back into the original coupled weak form,
// relative to the load norm; validates the decoupling reduction.
double coupled_residual(const MaterialConstants& m, const Mesh& mesh,
                        const CorrectiveSolution& sol,
                        const std::vector<Dislocation>& ds,
                        bool holes_omit_self);

}  // namespace qcd
