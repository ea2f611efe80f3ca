#include "qcd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "qcd/errors.hpp"

namespace qcd {

void Mesh::audit() const {
  for (std::size_t t = 0; t < tris.size(); ++t) {
    if (!(signed_area(int(t)) > 0.0))
      fail(ErrorCode::MeshError,
           "triangle " + std::to_string(t) + " has non-positive signed area");
    for (int v : tris[t])
      if (v < 0 || v >= int(nodes.size()))
        fail(ErrorCode::MeshError, "triangle references invalid node");
  }

  // Edge -> incident triangle count.
  std::map<std::pair<int, int>, int> edge_count;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (const auto& tr : tris)
    for (int e = 0; e < 3; ++e) edge_count[key(tr[e], tr[(e + 1) % 3])]++;

  std::set<std::pair<int, int>> tagged;
  std::vector<int> hole_edge_count;
  for (const BoundaryEdge& be : bedges) {
    auto it = edge_count.find(key(be.a, be.b));
    if (it == edge_count.end() || it->second != 1)
      fail(ErrorCode::MeshError, "tagged boundary edge not owned by exactly one triangle");
    if (!tagged.insert(key(be.a, be.b)).second)
      fail(ErrorCode::MeshError, "boundary edge tagged twice");
    if (be.tag >= 0) {
      if (be.tag >= int(hole_edge_count.size())) hole_edge_count.resize(be.tag + 1, 0);
      hole_edge_count[be.tag]++;
    }
  }
  // Tags must cover the whole topological boundary.
  for (const auto& [e, cnt] : edge_count) {
    if (cnt == 1 && !tagged.count(e))
      fail(ErrorCode::MeshError, "boundary edge without a tag");
    if (cnt > 2) fail(ErrorCode::MeshError, "edge shared by more than two triangles");
  }
  for (std::size_t h = 0; h < hole_edge_count.size(); ++h)
    if (hole_edge_count[h] < 16)
      fail(ErrorCode::MeshError,
           "hole " + std::to_string(h) + " resolved with fewer than 16 edges");
}

Vec2 Mesh::outward_normal(const BoundaryEdge& e) const {
  return outward_normal(e.a, e.b);
}

Vec2 Mesh::outward_normal(int node_a, int node_b) const {
  for (const BoundaryEdge& be : bedges) {
    if ((be.a == node_a && be.b == node_b) || (be.a == node_b && be.b == node_a)) {
      // Edges are stored with the domain on the left, so the outward
      // direction is the tangent rotated by -90 degrees.
      Vec2 t = nodes[be.b] - nodes[be.a];
      return normalized(Vec2{t.y, -t.x});
    }
  }
  fail(ErrorCode::NotBoundary, "edge is not a tagged boundary edge");
}

double Mesh::boundary_length(int tag) const {
  double len = 0.0;
  for (const BoundaryEdge& be : bedges)
    if (be.tag == tag) len += dist(nodes[be.a], nodes[be.b]);
  return len;
}

std::array<double, 3> Mesh::barycentric(int t, Vec2 p) const {
  const auto& tr = tris[t];
  Vec2 a = nodes[tr[0]], b = nodes[tr[1]], c = nodes[tr[2]];
  double det = cross(b - a, c - a);
  double l1 = cross(p - a, c - a) / det;
  double l2 = cross(b - a, p - a) / det;
  return {1.0 - l1 - l2, l1, l2};
}

struct Mesh::Locator {
  Vec2 lo, hi;
  int nx = 1, ny = 1;
  double cell = 1.0;
  std::vector<std::vector<int>> bins;

  int cell_index(int ix, int iy) const { return iy * nx + ix; }
};

void Mesh::build_locator() const {
  auto loc = std::make_shared<Locator>();
  Vec2 lo = nodes.empty() ? Vec2{0, 0} : nodes[0];
  Vec2 hi = lo;
  for (const Vec2& p : nodes) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  double extent = std::max(hi.x - lo.x, hi.y - lo.y);
  int target = std::max(1, int(std::sqrt(double(tris.size()) / 2.0)));
  loc->cell = extent > 0.0 ? extent / target : 1.0;
  loc->lo = lo;
  loc->hi = hi;
  loc->nx = std::max(1, int((hi.x - lo.x) / loc->cell) + 1);
  loc->ny = std::max(1, int((hi.y - lo.y) / loc->cell) + 1);
  loc->bins.resize(std::size_t(loc->nx) * loc->ny);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tr = tris[t];
    Vec2 tlo = nodes[tr[0]], thi = tlo;
    for (int k = 1; k < 3; ++k) {
      tlo.x = std::min(tlo.x, nodes[tr[k]].x);
      tlo.y = std::min(tlo.y, nodes[tr[k]].y);
      thi.x = std::max(thi.x, nodes[tr[k]].x);
      thi.y = std::max(thi.y, nodes[tr[k]].y);
    }
    int ix0 = std::clamp(int((tlo.x - lo.x) / loc->cell), 0, loc->nx - 1);
    int ix1 = std::clamp(int((thi.x - lo.x) / loc->cell), 0, loc->nx - 1);
    int iy0 = std::clamp(int((tlo.y - lo.y) / loc->cell), 0, loc->ny - 1);
    int iy1 = std::clamp(int((thi.y - lo.y) / loc->cell), 0, loc->ny - 1);
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix)
        loc->bins[loc->cell_index(ix, iy)].push_back(int(t));
  }
  locator_ = std::move(loc);
}

int Mesh::locate(Vec2 p) const {
  if (!locator_) build_locator();
  const Locator& loc = *locator_;
  if (p.x < loc.lo.x || p.y < loc.lo.y || p.x > loc.hi.x || p.y > loc.hi.y)
    return -1;
  int ix = std::clamp(int((p.x - loc.lo.x) / loc.cell), 0, loc.nx - 1);
  int iy = std::clamp(int((p.y - loc.lo.y) / loc.cell), 0, loc.ny - 1);
  const double eps = -1e-12;
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t : loc.bins[loc.cell_index(ix, iy)]) {
    auto l = barycentric(t, p);
    double m = std::min({l[0], l[1], l[2]});
    if (m >= eps) return t;
    if (m > best_min) {
      best_min = m;
      best = t;
    }
  }
  // Tolerate slightly-outside queries near the patch (quadrature jitter).
  if (best >= 0 && best_min > -1e-6) return best;
  return -1;
}

double integrate_domain_tri(const Mesh& mesh,
                            const std::function<double(int, Vec2)>& f,
                            const QuadratureSpec& q) {
  const TriangleRule& rule = triangle_rule(q.order);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    const auto& tr = mesh.tris[t];
    Vec2 p0 = mesh.nodes[tr[0]], p1 = mesh.nodes[tr[1]], p2 = mesh.nodes[tr[2]];
    double two_area = cross(p1 - p0, p2 - p0);
    double local = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      Vec2 p = p0 + rule.a[k] * (p1 - p0) + rule.b[k] * (p2 - p0);
      double v = f(int(t), p);
      if (!std::isfinite(v))
        fail(ErrorCode::NonFiniteIntegrand,
             "integrand not finite at (" + std::to_string(p.x) + ", " +
                 std::to_string(p.y) + ")");
      local += rule.w[k] * v;
    }
    sum += local * two_area;
  }
  return sum;
}

double integrate_domain(const Mesh& mesh, const std::function<double(Vec2)>& f,
                        const QuadratureSpec& q) {
  return integrate_domain_tri(
      mesh, [&](int, Vec2 p) { return f(p); }, q);
}

double integrate_boundary_n(const Mesh& mesh, int tag,
                            const std::function<double(Vec2, Vec2)>& f,
                            const QuadratureSpec& q) {
  const GaussRule& g = gauss_legendre(std::max(2, q.order));
  double sum = 0.0;
  for (const BoundaryEdge& be : mesh.bedges) {
    if (be.tag != tag) continue;
    Vec2 a = mesh.nodes[be.a], b = mesh.nodes[be.b];
    Vec2 t = b - a;
    Vec2 n = normalized(Vec2{t.y, -t.x});
    double half_len = 0.5 * norm(t);
    Vec2 mid = 0.5 * (a + b), half = 0.5 * t;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      Vec2 p = mid + g.nodes[i] * half;
      double v = f(p, n);
      if (!std::isfinite(v))
        fail(ErrorCode::NonFiniteIntegrand,
             "integrand not finite at (" + std::to_string(p.x) + ", " +
                 std::to_string(p.y) + ")");
      sum += g.weights[i] * half_len * v;
    }
  }
  return sum;
}

double integrate_boundary(const Mesh& mesh, int tag,
                          const std::function<double(Vec2)>& f,
                          const QuadratureSpec& q) {
  return integrate_boundary_n(
      mesh, tag, [&](Vec2 p, Vec2) { return f(p); }, q);
}

namespace {

std::string tag_to_string(int tag) {
  if (tag == kTagOuter) return "OUTER";
  return "HOLE:" + std::to_string(tag);
}

int tag_from_string(const std::string& s) {
  if (s == "OUTER") return kTagOuter;
  if (s.rfind("HOLE:", 0) == 0) return std::stoi(s.substr(5));
  fail(ErrorCode::IoError, "unknown boundary tag '" + s + "'");
}

}  // namespace

void write_mesh(std::ostream& os, const Mesh& mesh,
                const std::vector<double>* field) {
  char buf[64];
  os << "qcmesh 1\n";
  os << "nodes " << mesh.nodes.size() << "\n";
  for (const Vec2& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    os << buf;
  }
  os << "tris " << mesh.tris.size() << "\n";
  for (const auto& t : mesh.tris)
    os << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "bedges " << mesh.bedges.size() << "\n";
  for (const BoundaryEdge& e : mesh.bedges)
    os << e.a << " " << e.b << " " << tag_to_string(e.tag) << "\n";
  if (field) {
    os << "field " << field->size() << "\n";
    for (double v : *field) {
      std::snprintf(buf, sizeof buf, "%.17g\n", v);
      os << buf;
    }
  }
}

void write_mesh_file(const std::string& path, const Mesh& mesh,
                     const std::vector<double>* field) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  write_mesh(os, mesh, field);
}

Mesh read_mesh(std::istream& is, std::vector<double>* field) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "qcmesh")
    fail(ErrorCode::IoError, "not a qcmesh file");
  if (version != 1)
    fail(ErrorCode::IoError, "unsupported qcmesh version " + std::to_string(version));

  Mesh mesh;
  std::string section;
  while (is >> section) {
    std::size_t n = 0;
    if (!(is >> n)) fail(ErrorCode::IoError, "truncated section header");
    if (section == "nodes") {
      mesh.nodes.resize(n);
      for (auto& p : mesh.nodes)
        if (!(is >> p.x >> p.y)) fail(ErrorCode::IoError, "truncated nodes");
    } else if (section == "tris") {
      mesh.tris.resize(n);
      for (auto& t : mesh.tris)
        if (!(is >> t[0] >> t[1] >> t[2])) fail(ErrorCode::IoError, "truncated tris");
    } else if (section == "bedges") {
      mesh.bedges.resize(n);
      for (auto& e : mesh.bedges) {
        std::string tag;
        if (!(is >> e.a >> e.b >> tag)) fail(ErrorCode::IoError, "truncated bedges");
        e.tag = tag_from_string(tag);
      }
    } else if (section == "field") {
      std::vector<double> values(n);
      for (auto& v : values)
        if (!(is >> v)) fail(ErrorCode::IoError, "truncated field");
      if (field) *field = std::move(values);
    } else {
      fail(ErrorCode::IoError, "unknown section '" + section + "'");
    }
  }
  // Recover boundary-edge owning triangles.
  std::map<std::pair<int, int>, int> owner;
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    const auto& tr = mesh.tris[t];
    for (int e = 0; e < 3; ++e) {
      int a = tr[e], b = tr[(e + 1) % 3];
      owner[{std::min(a, b), std::max(a, b)}] = int(t);
    }
  }
  for (auto& e : mesh.bedges) {
    auto it = owner.find({std::min(e.a, e.b), std::max(e.a, e.b)});
    if (it != owner.end()) e.tri = it->second;
  }
  // Committed hole radii from boundary polygon perimeters.
  int max_tag = -1;
  for (const auto& e : mesh.bedges) max_tag = std::max(max_tag, e.tag);
  mesh.hole_committed_radius.assign(max_tag + 1, 0.0);
  for (int h = 0; h <= max_tag; ++h)
    mesh.hole_committed_radius[h] = mesh.boundary_length(h) / (2.0 * M_PI);
  return mesh;
}

Mesh read_mesh_file(const std::string& path, std::vector<double>* field) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_mesh(is, field);
}

}  // namespace qcd
