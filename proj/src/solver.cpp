#include "qcd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qcd/errors.hpp"

namespace qcd {

ScalarFieldFE::ScalarFieldFE(const Mesh* mesh, std::vector<double> nodal)
    : mesh_(mesh), nodal_(std::move(nodal)) {}

double ScalarFieldFE::value(Vec2 p) const {
  int t = mesh_->locate(p);
  if (t < 0) fail(ErrorCode::MeshError, "field evaluation outside the mesh");
  auto l = mesh_->barycentric(t, p);
  const auto& tr = mesh_->tris[t];
  return l[0] * nodal_[tr[0]] + l[1] * nodal_[tr[1]] + l[2] * nodal_[tr[2]];
}

Vec2 ScalarFieldFE::gradient(int t) const {
  const auto& tr = mesh_->tris[t];
  Vec2 a = mesh_->nodes[tr[0]], b = mesh_->nodes[tr[1]], c = mesh_->nodes[tr[2]];
  double two_area = cross(b - a, c - a);
  // grad of P1 basis: rotated opposite edges / (2A).
  Vec2 g = nodal_[tr[0]] * perp(c - b) + nodal_[tr[1]] * perp(a - c) +
           nodal_[tr[2]] * perp(b - a);
  return g / two_area;
}

void ScalarFieldFE::build_nodal_gradients() const {
  nodal_gradient_.assign(mesh_->nodes.size(), Vec2{0, 0});
  std::vector<double> weight(mesh_->nodes.size(), 0.0);
  for (std::size_t t = 0; t < mesh_->tris.size(); ++t) {
    double area = mesh_->signed_area(int(t));
    Vec2 g = gradient(int(t));
    for (int v : mesh_->tris[t]) {
      nodal_gradient_[v] += area * g;
      weight[v] += area;
    }
  }
  for (std::size_t i = 0; i < nodal_gradient_.size(); ++i)
    if (weight[i] > 0.0) nodal_gradient_[i] = nodal_gradient_[i] / weight[i];
}

Vec2 ScalarFieldFE::recovered_gradient(Vec2 p) const {
  if (nodal_gradient_.empty()) build_nodal_gradients();
  int t = mesh_->locate(p);
  if (t < 0) fail(ErrorCode::MeshError, "field evaluation outside the mesh");
  auto l = mesh_->barycentric(t, p);
  const auto& tr = mesh_->tris[t];
  return l[0] * nodal_gradient_[tr[0]] + l[1] * nodal_gradient_[tr[1]] +
         l[2] * nodal_gradient_[tr[2]];
}

double ScalarFieldFE::mean_over_ball(Vec2 center, double radius) const {
  const TriangleRule& rule = triangle_rule(4);
  double sum = 0.0, area = 0.0;
  for (std::size_t t = 0; t < mesh_->tris.size(); ++t) {
    const auto& tr = mesh_->tris[t];
    Vec2 p0 = mesh_->nodes[tr[0]], p1 = mesh_->nodes[tr[1]], p2 = mesh_->nodes[tr[2]];
    double two_area = cross(p1 - p0, p2 - p0);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      Vec2 p = p0 + rule.a[k] * (p1 - p0) + rule.b[k] * (p2 - p0);
      if (dist(p, center) > radius) continue;
      double v = rule.a[k] * nodal_[tr[1]] + rule.b[k] * nodal_[tr[2]] +
                 (1.0 - rule.a[k] - rule.b[k]) * nodal_[tr[0]];
      sum += rule.w[k] * two_area * v;
      area += rule.w[k] * two_area;
    }
  }
  if (area <= 0.0)
    fail(ErrorCode::MeshError, "normalization ball misses every quadrature point");
  return sum / area;
}

void ScalarFieldFE::shift(double c) {
  for (double& v : nodal_) v += c;
}

void StiffnessMatrix::multiply(const std::vector<double>& x,
                               std::vector<double>& y) const {
  y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

StiffnessMatrix assemble_laplace(const Mesh& mesh) {
  int n = int(mesh.nodes.size());
  // Triplets, then CSR compression.
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    const auto& tr = mesh.tris[t];
    Vec2 a = mesh.nodes[tr[0]], b = mesh.nodes[tr[1]], c = mesh.nodes[tr[2]];
    double two_area = cross(b - a, c - a);
    Vec2 g[3] = {perp(c - b) / two_area, perp(a - c) / two_area,
                 perp(b - a) / two_area};
    double area = 0.5 * two_area;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        rows[tr[i]].push_back({tr[j], area * dot(g[i], g[j])});
  }
  StiffnessMatrix K;
  K.n = n;
  K.row_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end(),
              [](auto& x, auto& y) { return x.first < y.first; });
    int unique = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (unique > 0 && K.col[K.row_ptr[i] + unique - 1] == r[k].first) {
        K.val[K.row_ptr[i] + unique - 1] += r[k].second;
      } else {
        K.col.push_back(r[k].first);
        K.val.push_back(r[k].second);
        ++unique;
      }
    }
    K.row_ptr[i + 1] = int(K.col.size());
  }
  return K;
}

double stiffness_product(const StiffnessMatrix& K, const std::vector<double>& a,
                         const std::vector<double>& b) {
  double s = 0.0;
  for (int i = 0; i < K.n; ++i)
    for (int k = K.row_ptr[i]; k < K.row_ptr[i + 1]; ++k)
      s += a[i] * K.val[k] * b[K.col[k]];
  return s;
}

namespace {

void project_constants(std::vector<double>& x) {
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
  for (double& v : x) v -= mean;
}

// Preconditioned CG on the singular (compatible) Neumann stiffness system,
// constants projected out every iteration.
std::vector<double> cg_solve(const StiffnessMatrix& K,
                             std::vector<double> rhs, double tol,
                             SolveStats* stats) {
  int n = K.n;
  std::vector<double> diag(n, 1.0);
  for (int i = 0; i < n; ++i)
    for (int k = K.row_ptr[i]; k < K.row_ptr[i + 1]; ++k)
      if (K.col[k] == i && K.val[k] > 0.0) diag[i] = K.val[k];

  project_constants(rhs);
  double bnorm = std::sqrt(std::inner_product(rhs.begin(), rhs.end(), rhs.begin(), 0.0));
  std::vector<double> x(n, 0.0);
  if (bnorm == 0.0) {
    if (stats) { stats->iterations = 0; stats->residual = 0.0; }
    return x;
  }

  std::vector<double> r = rhs, z(n), p(n), Ap(n);
  for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  project_constants(z);
  p = z;
  double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
  int max_iter = std::max(1000, 40 * int(std::sqrt(double(n))) + 200);
  for (int it = 0; it < max_iter; ++it) {
    K.multiply(p, Ap);
    double pAp = std::inner_product(p.begin(), p.end(), Ap.begin(), 0.0);
    if (pAp <= 0.0) break;
    double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    project_constants(r);
    double rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
    if (rnorm <= tol * bnorm) {
      if (stats) { stats->iterations = it + 1; stats->residual = rnorm / bnorm; }
      project_constants(x);
      return x;
    }
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    project_constants(z);
    double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  fail(ErrorCode::SolverDiverged,
       "conjugate gradients failed to reach tolerance " + std::to_string(tol));
}

}  // namespace

ScalarFieldFE solve_neumann(const NeumannProblem& prob, double tol,
                            SolveStats* stats) {
  const Mesh& mesh = *prob.mesh;
  int n = int(mesh.nodes.size());

  // Boundary load: b_i = integral of g * phi_i over tagged edges.
  const int edge_gauss = 4;
  const GaussRule& g = gauss_legendre(edge_gauss);
  std::vector<double> rhs(n, 0.0);
  double total_flux = 0.0, boundary_measure = 0.0, max_flux = 0.0;
  for (const BoundaryEdge& be : mesh.bedges) {
    Vec2 a = mesh.nodes[be.a], b = mesh.nodes[be.b];
    Vec2 t = b - a;
    Vec2 nrm = normalized(Vec2{t.y, -t.x});
    double half_len = 0.5 * norm(t);
    boundary_measure += 2.0 * half_len;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      double s = 0.5 * (g.nodes[k] + 1.0);  // in [0, 1] along the edge
      Vec2 p = a + s * t;
      double gv = prob.flux(p, be.tag, nrm);
      max_flux = std::max(max_flux, std::abs(gv));
      double w = 0.5 * g.weights[k] * 2.0 * half_len;
      rhs[be.a] += w * gv * (1.0 - s);
      rhs[be.b] += w * gv * s;
      total_flux += w * gv;
    }
  }

  if (std::abs(total_flux) > 1e-8 * std::max(1e-300, boundary_measure * max_flux))
    fail(ErrorCode::IncompatibleFlux,
         "net boundary flux " + std::to_string(total_flux) +
             " violates Neumann compatibility");
  if (stats) stats->flux_defect = std::abs(total_flux);

  StiffnessMatrix K = assemble_laplace(mesh);
  std::vector<double> x = cg_solve(K, std::move(rhs), tol, stats);

  ScalarFieldFE field(&mesh, std::move(x));
  if (prob.ball_radius > 0.0)
    field.shift(-field.mean_over_ball(prob.ball_center, prob.ball_radius));
  return field;
}

DecoupleCertificate decouple(const MaterialConstants& m) {
  validate(m);
  double det = m.C * m.K - m.R * m.R;
  DecoupleCertificate cert;
  cert.inverse = {m.K / det, -m.R / det, -m.R / det, m.C / det};
  // Symmetric 2x2: condition number from the eigenvalues.
  double tr = m.C + m.K;
  double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  double lmax = 0.5 * (tr + disc), lmin = 0.5 * (tr - disc);
  cert.condition = lmax / lmin;
  return cert;
}

namespace {

struct BallChoice {
  Vec2 center;
  double radius;
};

// Largest ball centered at the mesh centroid staying away from holes and the
// outer boundary; the normalization constant does not affect gradients, so a
// crude but deterministic choice is enough.
BallChoice normalization_ball(const Mesh& mesh,
                              const std::vector<Dislocation>& ds) {
  Vec2 c{0, 0};
  double area = 0.0;
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    double a = mesh.signed_area(int(t));
    c += a * mesh.centroid(int(t));
    area += a;
  }
  c = c / area;
  double r = std::numeric_limits<double>::infinity();
  for (const BoundaryEdge& be : mesh.bedges) {
    r = std::min(r, dist(c, mesh.nodes[be.a]));
    r = std::min(r, dist(c, mesh.nodes[be.b]));
  }
  for (const Dislocation& d : ds) r = std::min(r, dist(c, d.position));
  return {c, 0.8 * r};
}

}  // namespace

CorrectiveSolution corrective_fields_limit(const std::vector<Dislocation>& ds,
                                           const MaterialConstants& m,
                                           const Mesh& mesh, double tol) {
  decouple(m);  // admissibility gate; the decoupled data below relies on it
  for (const BoundaryEdge& be : mesh.bedges)
    if (be.tag != kTagOuter)
      fail(ErrorCode::MeshError,
           "limit corrective problem expects a mesh without holes");

  BallChoice ball = normalization_ball(mesh, ds);
  CorrectiveSolution sol;
  auto solve_component = [&](auto pick, SolveStats* stats) {
    NeumannProblem p;
    p.mesh = &mesh;
    p.ball_center = ball.center;
    p.ball_radius = ball.radius;
    p.flux = [&, pick](Vec2 x, int tag, Vec2 nrm) -> double {
      if (tag != kTagOuter) return 0.0;
      FieldSample s = total_singular_field(ds, x);
      return -dot(pick(s), nrm);
    };
    return solve_neumann(p, tol, stats);
  };
  sol.u0 = solve_component([](const FieldSample& s) { return s.u; }, &sol.stats_u);
  sol.w0 = solve_component([](const FieldSample& s) { return s.w; }, &sol.stats_w);
  return sol;
}

CorrectiveSolution corrective_fields_eps(const std::vector<Dislocation>& ds,
                                         const MaterialConstants& m,
                                         const Mesh& mesh, double tol) {
  decouple(m);
  BallChoice ball = normalization_ball(mesh, ds);
  CorrectiveSolution sol;
  auto solve_component = [&](auto pick, SolveStats* stats) {
    NeumannProblem p;
    p.mesh = &mesh;
    p.ball_center = ball.center;
    p.ball_radius = ball.radius;
    p.flux = [&, pick](Vec2 x, int tag, Vec2 nrm) -> double {
      Vec2 total{0, 0};
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (int(i) == tag) continue;  // hole data omits the self-field
        FieldSample s = singular_field(ds[i], x);
        total += pick(s);
      }
      return -dot(total, nrm);
    };
    return solve_neumann(p, tol, stats);
  };
  sol.u0 = solve_component([](const FieldSample& s) { return s.u; }, &sol.stats_u);
  sol.w0 = solve_component([](const FieldSample& s) { return s.w; }, &sol.stats_w);
  return sol;
}

double coupled_residual(const MaterialConstants& m, const Mesh& mesh,
                        const CorrectiveSolution& sol,
                        const std::vector<Dislocation>& ds,
                        bool holes_omit_self) {
  // Coupled weak form rows: C K u + R K w = b_cu, R K u + K K w = b_cw with
  // b_c* the coupled boundary loads.
  StiffnessMatrix K = assemble_laplace(mesh);
  int n = K.n;
  std::vector<double> Ku(n), Kw(n);
  K.multiply(sol.u0.nodal(), Ku);
  K.multiply(sol.w0.nodal(), Kw);

  const GaussRule& g = gauss_legendre(4);
  std::vector<double> bu(n, 0.0), bw(n, 0.0);
  for (const BoundaryEdge& be : mesh.bedges) {
    Vec2 a = mesh.nodes[be.a], b = mesh.nodes[be.b];
    Vec2 t = b - a;
    Vec2 nrm = normalized(Vec2{t.y, -t.x});
    double len = norm(t);
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      double s = 0.5 * (g.nodes[k] + 1.0);
      Vec2 p = a + s * t;
      Vec2 su{0, 0}, sw{0, 0};
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (holes_omit_self && int(i) == be.tag) continue;
        FieldSample f = singular_field(ds[i], p);
        su += f.u;
        sw += f.w;
      }
      StressPair sp = hooke(m, su, sw);
      double w = 0.5 * g.weights[k] * len;
      bu[be.a] += -w * dot(sp.sigma, nrm) * (1.0 - s);
      bu[be.b] += -w * dot(sp.sigma, nrm) * s;
      bw[be.a] += -w * dot(sp.rho, nrm) * (1.0 - s);
      bw[be.b] += -w * dot(sp.rho, nrm) * s;
    }
  }

  double res2 = 0.0, load2 = 0.0;
  double mean_ru = 0.0, mean_rw = 0.0;
  std::vector<double> ru(n), rw(n);
  for (int i = 0; i < n; ++i) {
    ru[i] = m.C * Ku[i] + m.R * Kw[i] - bu[i];
    rw[i] = m.R * Ku[i] + m.K * Kw[i] - bw[i];
    mean_ru += ru[i];
    mean_rw += rw[i];
  }
  mean_ru /= n;
  mean_rw /= n;
  for (int i = 0; i < n; ++i) {
    // Constant component is the (projected) nullspace, not a residual.
    res2 += (ru[i] - mean_ru) * (ru[i] - mean_ru) +
            (rw[i] - mean_rw) * (rw[i] - mean_rw);
    load2 += bu[i] * bu[i] + bw[i] * bw[i];
  }
  return std::sqrt(res2) / std::max(1e-300, std::sqrt(load2));
}

}  // namespace qcd
