#include "qcd/triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qcd/errors.hpp"

namespace qcd {

namespace {

constexpr int kFeatureInterior = -2;
constexpr int kFeatureOuter = -1;  // hole features use their index >= 0

// Incremental Delaunay triangulation (Lawson flips) with constrained edges.
// Super-triangle vertices are indices 0..2 and are never flipped across.
class Delaunay {
 public:
  struct Tri {
    int v[3];
    int n[3];  // neighbor across the edge opposite v[i]
    bool alive = true;
    int8_t inside = -1;   // -1 unknown, 0 outside domain, 1 inside
    bool hopeless = false;
  };

  std::vector<Vec2> pts;
  std::vector<int> feature;  // per point
  std::vector<Tri> tris;
  std::vector<int> vert_tri;
  std::set<std::pair<int, int>> constrained;

  double scale = 1.0;

  explicit Delaunay(Vec2 lo, Vec2 hi) {
    scale = std::max({hi.x - lo.x, hi.y - lo.y, 1e-30});
    Vec2 c = 0.5 * (lo + hi);
    double s = 64.0 * scale;
    add_point({c.x - 2.0 * s, c.y - s}, kFeatureInterior);
    add_point({c.x + 2.0 * s, c.y - s}, kFeatureInterior);
    add_point({c.x, c.y + 2.0 * s}, kFeatureInterior);
    Tri t;
    t.v[0] = 0; t.v[1] = 1; t.v[2] = 2;
    t.n[0] = t.n[1] = t.n[2] = -1;
    tris.push_back(t);
    vert_tri.assign(3, 0);
  }

  static std::pair<int, int> edge_key(int a, int b) {
    return {std::min(a, b), std::max(a, b)};
  }
  bool is_constrained(int a, int b) const {
    return constrained.count(edge_key(a, b)) != 0;
  }
  bool is_super(int v) const { return v < 3; }

  int orient(Vec2 a, Vec2 b, Vec2 c) const {
    long double v = (long double)(b.x - a.x) * (long double)(c.y - a.y) -
                    (long double)(b.y - a.y) * (long double)(c.x - a.x);
    long double mag = std::abs((long double)(b.x - a.x) * (long double)(c.y - a.y)) +
                      std::abs((long double)(b.y - a.y) * (long double)(c.x - a.x));
    if (std::abs(v) <= mag * 1e-18L) return 0;
    return v > 0 ? 1 : -1;
  }

  // d strictly inside circumcircle of CCW (a, b, c)?
  bool in_circle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) const {
    long double adx = a.x - d.x, ady = a.y - d.y;
    long double bdx = b.x - d.x, bdy = b.y - d.y;
    long double cdx = c.x - d.x, cdy = c.y - d.y;
    long double ad = adx * adx + ady * ady;
    long double bd = bdx * bdx + bdy * bdy;
    long double cd = cdx * cdx + cdy * cdy;
    long double det = adx * (bdy * cd - cdy * bd) - ady * (bdx * cd - cdx * bd) +
                      ad * (bdx * cdy - cdx * bdy);
    long double mag = std::abs(adx * bdy * cd) + std::abs(adx * cdy * bd) +
                      std::abs(ady * bdx * cd) + std::abs(ady * cdx * bd) +
                      std::abs(ad * bdx * cdy) + std::abs(ad * cdx * bdy);
    if (std::abs(det) <= mag * 1e-16L) return false;
    return det > 0;
  }

  int add_point(Vec2 p, int feat) {
    pts.push_back(p);
    feature.push_back(feat);
    vert_tri.push_back(-1);
    return int(pts.size()) - 1;
  }

  int index_of(const Tri& t, int v) const {
    for (int i = 0; i < 3; ++i)
      if (t.v[i] == v) return i;
    return -1;
  }

  void set_neighbor(int t, int other_old, int other_new) {
    if (t < 0) return;
    for (int i = 0; i < 3; ++i)
      if (tris[t].n[i] == other_old) {
        tris[t].n[i] = other_new;
        return;
      }
  }

  int new_tri(int a, int b, int c, int na, int nb, int nc) {
    Tri t;
    t.v[0] = a; t.v[1] = b; t.v[2] = c;
    t.n[0] = na; t.n[1] = nb; t.n[2] = nc;
    tris.push_back(t);
    int id = int(tris.size()) - 1;
    vert_tri[a] = vert_tri[b] = vert_tri[c] = id;
    return id;
  }

  // Walks from `hint` to the triangle containing p. Returns (tri, edge) where
  // edge >= 0 when p lies on that edge, -1 when strictly inside.
  std::pair<int, int> locate(Vec2 p, int hint) const {
    int t = -1;
    if (hint >= 0 && hint < int(tris.size()) && tris[hint].alive) t = hint;
    if (t < 0) {
      for (int i = int(tris.size()) - 1; i >= 0; --i)
        if (tris[i].alive) { t = i; break; }
    }
    std::uint64_t rng = 0x9e3779b97f4a7c15ull;
    for (std::size_t step = 0; step < tris.size() + 64; ++step) {
      const Tri& tr = tris[t];
      int zero_edge = -1;
      bool moved = false;
      rng = rng * 6364136223846793005ull + 1442695040888963407ull;
      int start = int(rng >> 60) % 3;
      for (int k = 0; k < 3; ++k) {
        int i = (start + k) % 3;
        Vec2 a = pts[tr.v[(i + 1) % 3]], b = pts[tr.v[(i + 2) % 3]];
        int o = orient(a, b, p);
        if (o < 0) {
          int nb = tr.n[i];
          if (nb < 0) return {t, -1};
          t = nb;
          moved = true;
          break;
        }
        if (o == 0) zero_edge = i;
      }
      if (!moved) return {t, zero_edge};
    }
    // Walk cycled (degenerate orientation ties); fall back to a full scan.
    for (std::size_t i = 0; i < tris.size(); ++i) {
      if (!tris[i].alive) continue;
      const Tri& tr = tris[i];
      int zero_edge = -1;
      bool outside = false;
      for (int e = 0; e < 3; ++e) {
        int o = orient(pts[tr.v[(e + 1) % 3]], pts[tr.v[(e + 2) % 3]], p);
        if (o < 0) { outside = true; break; }
        if (o == 0) zero_edge = e;
      }
      if (!outside) return {int(i), zero_edge};
    }
    fail(ErrorCode::MeshError, "point location failed");
  }

  void legalize(int t, int e) {
    struct Item { int t, e; };
    std::vector<Item> stack{{t, e}};
    while (!stack.empty()) {
      auto [ti, ei] = stack.back();
      stack.pop_back();
      if (ti < 0 || !tris[ti].alive) continue;
      Tri& tr = tris[ti];
      int u = tr.n[ei];
      if (u < 0 || !tris[u].alive) continue;
      int p = tr.v[ei];
      int a = tr.v[(ei + 1) % 3];
      int b = tr.v[(ei + 2) % 3];
      if (is_constrained(a, b)) continue;
      const Tri& tu = tris[u];
      int q = -1;
      for (int i = 0; i < 3; ++i)
        if (tu.v[i] != a && tu.v[i] != b) q = tu.v[i];
      if (q < 0) continue;
      if (is_super(p) || is_super(a) || is_super(b) || is_super(q)) continue;
      if (!in_circle(pts[p], pts[a], pts[b], pts[q])) continue;
      auto [t1, t2] = flip(ti, ei);
      if (t1 >= 0)
        for (int i = 0; i < 3; ++i) stack.push_back({t1, i});
      if (t2 >= 0)
        for (int i = 0; i < 3; ++i) stack.push_back({t2, i});
    }
  }

  // Flip the edge opposite vertex e of triangle t; returns the two new
  // triangle ids.
  std::pair<int, int> flip(int ti, int ei) {
    Tri tr = tris[ti];
    int u = tr.n[ei];
    Tri tu = tris[u];
    int p = tr.v[ei];
    int a = tr.v[(ei + 1) % 3];
    int b = tr.v[(ei + 2) % 3];
    int qi = -1;
    for (int i = 0; i < 3; ++i)
      if (tu.v[i] != a && tu.v[i] != b) qi = i;
    int q = tu.v[qi];

    // Quad p-a-q-b; require strict convexity for a valid flip.
    if (orient(pts[p], pts[a], pts[q]) <= 0) return {-1, -1};
    if (orient(pts[q], pts[b], pts[p]) <= 0) return {-1, -1};

    // Neighbors: tr has (pa) opposite b and (pb) opposite a;
    // tu has (qa) and (qb).
    int n_pa = tr.n[(ei + 2) % 3];  // opposite b
    int n_pb = tr.n[(ei + 1) % 3];  // opposite a
    int ia = index_of(tu, a), ib = index_of(tu, b);
    int n_qa = tu.n[ib];  // edge (q,a) is opposite b in u
    int n_qb = tu.n[ia];

    tris[ti].alive = false;
    tris[u].alive = false;
    int t1 = new_tri(p, a, q, n_qa, -1, n_pa);
    int t2 = new_tri(p, q, b, n_qb, n_pb, -1);
    tris[t1].n[1] = t2;
    tris[t2].n[2] = t1;
    set_neighbor(n_pa, ti, t1);
    set_neighbor(n_qa, u, t1);
    set_neighbor(n_pb, ti, t2);
    set_neighbor(n_qb, u, t2);
    return {t1, t2};
  }

  // Inserts p; returns its index. If p coincides with an existing vertex of
  // the containing triangle, returns that vertex. `constrain_to` optionally
  // names two vertices (a, b): edges (a,p) and (p,b) are marked constrained
  // before legalization.
  int insert(Vec2 p, int hint, std::pair<int, int> constrain_to = {-1, -1}) {
    auto [t, on_edge] = locate(p, hint);
    const double dup_tol = 1e-13 * scale;
    for (int i = 0; i < 3; ++i) {
      int v = tris[t].v[i];
      if (dist(pts[v], p) < dup_tol) return v;
    }
    int idx = add_point(p, kFeatureInterior);

    if (on_edge < 0) {
      split_1_to_3(t, idx);
    } else {
      split_2_to_4(t, on_edge, idx);
    }
    if (constrain_to.first >= 0) {
      constrained.insert(edge_key(constrain_to.first, idx));
      constrained.insert(edge_key(idx, constrain_to.second));
    }
    // Legalize all edges of the triangles around the new vertex.
    std::vector<int> around = triangles_around(idx);
    for (int ti2 : around) {
      int i = index_of(tris[ti2], idx);
      if (i >= 0) legalize(ti2, i);
    }
    return idx;
  }

  void split_1_to_3(int t, int pidx) {
    Tri tr = tris[t];
    int A = tr.v[0], B = tr.v[1], C = tr.v[2];
    int nBC = tr.n[0], nCA = tr.n[1], nAB = tr.n[2];
    tris[t].alive = false;
    int t0 = new_tri(pidx, A, B, nAB, -1, -1);
    int t1 = new_tri(pidx, B, C, nBC, -1, -1);
    int t2 = new_tri(pidx, C, A, nCA, -1, -1);
    tris[t0].n[1] = t1;  // edge (B,p) shared with t1
    tris[t0].n[2] = t2;  // edge (p,A) shared with t2
    tris[t1].n[1] = t2;
    tris[t1].n[2] = t0;
    tris[t2].n[1] = t0;
    tris[t2].n[2] = t1;
    set_neighbor(nAB, t, t0);
    set_neighbor(nBC, t, t1);
    set_neighbor(nCA, t, t2);
  }

  void split_2_to_4(int t, int e, int pidx) {
    Tri tr = tris[t];
    int u = tr.n[e];
    int P = tr.v[e];
    int A = tr.v[(e + 1) % 3];
    int B = tr.v[(e + 2) % 3];
    // p lies on edge (A, B); snap it onto the segment so split areas stay
    // non-negative.
    {
      Vec2 a = pts[A], ab = pts[B] - pts[A];
      double s = std::clamp(dot(pts[pidx] - a, ab) / norm2(ab), 0.0, 1.0);
      pts[pidx] = a + s * ab;
    }
    int n_pa = tr.n[(e + 2) % 3];  // across (P, A)
    int n_pb = tr.n[(e + 1) % 3];  // across (P, B)
    if (is_constrained(A, B)) {
      constrained.erase(edge_key(A, B));
      constrained.insert(edge_key(A, pidx));
      constrained.insert(edge_key(pidx, B));
    }
    tris[t].alive = false;
    if (u < 0) {
      // (P, A, p) and (P, p, B), both CCW.
      int t0 = new_tri(P, A, pidx, -1, -1, n_pa);
      int t1 = new_tri(P, pidx, B, -1, n_pb, -1);
      tris[t0].n[1] = t1;  // edge (p, P)
      tris[t1].n[2] = t0;
      set_neighbor(n_pa, t, t0);
      set_neighbor(n_pb, t, t1);
      return;
    }
    Tri tu = tris[u];
    int qi = -1;
    for (int i = 0; i < 3; ++i)
      if (tu.v[i] != A && tu.v[i] != B) qi = i;
    int Q = tu.v[qi];
    int iA = index_of(tu, A), iB = index_of(tu, B);
    int n_qa = tu.n[iB];  // across (Q, A)
    int n_qb = tu.n[iA];  // across (Q, B)
    tris[u].alive = false;
    // Four CCW triangles around p: (P,A,p), (P,p,B), (Q,B,p), (Q,p,A).
    int t0 = new_tri(P, A, pidx, -1, -1, n_pa);
    int t1 = new_tri(P, pidx, B, -1, n_pb, -1);
    int t2 = new_tri(Q, B, pidx, -1, -1, n_qb);
    int t3 = new_tri(Q, pidx, A, -1, n_qa, -1);
    tris[t0].n[0] = t3;  // edge (A, p)
    tris[t0].n[1] = t1;  // edge (p, P)
    tris[t1].n[0] = t2;  // edge (p, B)
    tris[t1].n[2] = t0;
    tris[t2].n[0] = t1;  // edge (B, p)
    tris[t2].n[1] = t3;  // edge (p, Q)
    tris[t3].n[0] = t0;  // edge (p, A)
    tris[t3].n[2] = t2;
    set_neighbor(n_pa, t, t0);
    set_neighbor(n_pb, t, t1);
    set_neighbor(n_qb, u, t2);
    set_neighbor(n_qa, u, t3);
  }

  std::vector<int> triangles_around(int v) const {
    std::vector<int> out;
    int start = vert_tri[v];
    if (start < 0 || !tris[start].alive) {
      for (std::size_t i = 0; i < tris.size(); ++i)
        if (tris[i].alive && index_of(tris[i], v) >= 0) { start = int(i); break; }
    }
    if (start < 0) return out;
    int t = start;
    for (std::size_t guard = 0; guard < tris.size() + 8; ++guard) {
      out.push_back(t);
      const Tri& tr = tris[t];
      int i = index_of(tr, v);
      int next = tr.n[(i + 1) % 3];  // across edge containing v
      if (next < 0) break;           // hit hull (should not happen pre-extraction)
      if (next == start) return out;
      t = next;
    }
    return out;
  }

  bool edge_exists(int a, int b) const {
    for (int t : triangles_around(a))
      if (index_of(tris[t], b) >= 0) return true;
    return false;
  }

  // Force edge (a, b) into the triangulation by flipping crossing edges.
  void ensure_edge(int a, int b) {
    for (int iter = 0; iter < 512; ++iter) {
      if (edge_exists(a, b)) return;
      // Find any edge crossing segment (a,b) and try to flip it.
      bool flipped = false;
      for (std::size_t t = 0; t < tris.size() && !flipped; ++t) {
        if (!tris[t].alive) continue;
        for (int e = 0; e < 3 && !flipped; ++e) {
          int u = tris[t].v[(e + 1) % 3], v = tris[t].v[(e + 2) % 3];
          if (u == a || u == b || v == a || v == b) continue;
          if (!segments_cross(pts[a], pts[b], pts[u], pts[v])) continue;
          if (is_constrained(u, v)) continue;
          auto [t1, t2] = flip(int(t), e);
          flipped = t1 >= 0;
        }
      }
      if (!flipped) break;
    }
    if (!edge_exists(a, b))
      fail(ErrorCode::MeshError, "failed to recover a boundary edge");
  }

  bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) const {
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 * o2 < 0 && o3 * o4 < 0;
  }

  bool circumcircle(int t, Vec2* center, double* radius) const {
    const Tri& tr = tris[t];
    Vec2 A = pts[tr.v[0]], B = pts[tr.v[1]], C = pts[tr.v[2]];
    double d = 2.0 * (A.x * (B.y - C.y) + B.x * (C.y - A.y) + C.x * (A.y - B.y));
    if (std::abs(d) < 1e-300) return false;
    double a2 = norm2(A), b2 = norm2(B), c2 = norm2(C);
    center->x = (a2 * (B.y - C.y) + b2 * (C.y - A.y) + c2 * (A.y - B.y)) / d;
    center->y = (a2 * (C.x - B.x) + b2 * (A.x - C.x) + c2 * (B.x - A.x)) / d;
    *radius = dist(*center, A);
    return true;
  }
};

// One boundary feature: the outer shape or a circular hole.
struct Feature {
  bool circular = false;
  Vec2 center;
  double radius = 0.0;
  int id = kFeatureOuter;
  std::vector<std::pair<int, int>> segments;  // live segments (vertex pairs)
  double max_half_len = 0.0;

  void rebuild_max(const std::vector<Vec2>& pts) {
    max_half_len = 0.0;
    for (auto& [a, b] : segments)
      max_half_len = std::max(max_half_len, 0.5 * dist(pts[a], pts[b]));
  }
};

struct Sizer {
  double h = 0.1;
  double grade = 1.0;
  double hole_band = 3.0;
  double growth = 0.6;
  struct HoleInfo {
    Vec2 center;
    double radius;
    double ring_spacing;
  };
  std::vector<HoleInfo> holes;

  double operator()(Vec2 x) const {
    double t = h;
    for (const auto& hk : holes) {
      double dc = dist(x, hk.center);
      if (dc <= hole_band * hk.radius) t = std::min(t, h * grade);
      double dring = std::abs(dc - hk.radius);
      t = std::min(t, hk.ring_spacing + growth * dring);
    }
    return t;
  }
};

}  // namespace

Mesh triangulate(const Domain& domain, double h, double grade,
                 const MeshOptions& opt) {
  validate_domain(domain);
  if (!(h > 0.0) || !(grade > 0.0) || grade > 1.0)
    fail(ErrorCode::MeshError, "need h > 0 and grade in (0, 1]");

  // Size precondition: h < min(hole gap, hole-to-outer clearance) / 4.
  double min_clear = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < domain.holes.size(); ++i) {
    const Disc& hi = domain.holes[i];
    min_clear = std::min(min_clear, distance_to_outer(domain, hi.center) - hi.radius);
    for (std::size_t j = i + 1; j < domain.holes.size(); ++j)
      min_clear = std::min(min_clear, dist(hi.center, domain.holes[j].center) -
                                          hi.radius - domain.holes[j].radius);
  }
  if (h >= min_clear / 4.0)
    fail(ErrorCode::MeshError,
         "target size h too coarse for hole spacing (need h < " +
             std::to_string(min_clear / 4.0) + ")");

  // Bounding box.
  Vec2 lo, hi_;
  if (const auto* disc = std::get_if<Disc>(&domain.outer)) {
    lo = disc->center - Vec2{disc->radius, disc->radius};
    hi_ = disc->center + Vec2{disc->radius, disc->radius};
  } else {
    const auto& v = std::get<PolygonShape>(domain.outer).vertices;
    lo = hi_ = v[0];
    for (const Vec2& p : v) {
      lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
      hi_.x = std::max(hi_.x, p.x); hi_.y = std::max(hi_.y, p.y);
    }
  }

  Delaunay dt(lo, hi_);
  std::vector<Feature> features;
  Sizer sizer;
  sizer.h = h;
  sizer.grade = grade;
  sizer.hole_band = opt.hole_band;
  sizer.growth = opt.growth;

  double scale = domain_scale(domain);

  // --- boundary sampling ---
  auto sample_circle = [&](Vec2 center, double radius, int n, int feat) {
    Feature f;
    f.circular = true;
    f.center = center;
    f.radius = radius;
    f.id = feat;
    std::vector<int> ring(n);
    for (int i = 0; i < n; ++i) {
      double a = 2.0 * M_PI * (i + 0.5) / n;
      Vec2 p = center + radius * Vec2{std::cos(a), std::sin(a)};
      ring[i] = dt.insert(p, -1);
      dt.feature[ring[i]] = feat;
    }
    for (int i = 0; i < n; ++i) {
      int a = ring[i], b = ring[(i + 1) % n];
      dt.ensure_edge(a, b);
      dt.constrained.insert(Delaunay::edge_key(a, b));
      f.segments.push_back({a, b});
    }
    f.rebuild_max(dt.pts);
    features.push_back(std::move(f));
  };

  if (const auto* disc = std::get_if<Disc>(&domain.outer)) {
    int n = std::max(24, int(std::ceil(2.0 * M_PI * disc->radius / h)));
    sample_circle(disc->center, disc->radius, n, kFeatureOuter);
  } else {
    const auto& v = std::get<PolygonShape>(domain.outer).vertices;
    Feature f;
    f.id = kFeatureOuter;
    std::vector<int> chain;
    for (std::size_t i = 0; i < v.size(); ++i) {
      Vec2 a = v[i], b = v[(i + 1) % v.size()];
      int pieces = std::max(1, int(std::ceil(dist(a, b) / h)));
      for (int k = 0; k < pieces; ++k) {
        Vec2 p = a + (double(k) / pieces) * (b - a);
        int idx = dt.insert(p, -1);
        dt.feature[idx] = kFeatureOuter;
        if (chain.empty() || chain.back() != idx) chain.push_back(idx);
      }
    }
    for (std::size_t i = 0; i < chain.size(); ++i) {
      int a = chain[i], b = chain[(i + 1) % chain.size()];
      if (a == b) continue;
      dt.ensure_edge(a, b);
      dt.constrained.insert(Delaunay::edge_key(a, b));
      f.segments.push_back({a, b});
    }
    f.rebuild_max(dt.pts);
    features.push_back(std::move(f));
  }

  for (std::size_t k = 0; k < domain.holes.size(); ++k) {
    const Disc& hole = domain.holes[k];
    // Ring spacing shrinks like eps^(3/2) below the reference size so the
    // polygonal-hole bias decreases along an eps ladder.
    double s0 = 0.1 * scale;
    double spacing = h * grade * std::min(1.0, std::pow(hole.radius / s0, 1.5));
    int n = std::max(opt.min_hole_edges,
                     int(std::ceil(2.0 * M_PI * hole.radius / spacing)));
    n = std::min(n, opt.max_hole_edges);
    sample_circle(hole.center, hole.radius, n, int(k));
    sizer.holes.push_back({hole.center, hole.radius,
                           2.0 * M_PI * hole.radius / n});
  }

  // --- refinement ---
  const double quality_bound = 1.0 / (2.0 * std::sin(opt.min_angle_deg * M_PI / 180.0));

  auto tri_inside = [&](int t) -> bool {
    Delaunay::Tri& tr = dt.tris[t];
    if (tr.inside < 0) {
      bool super = dt.is_super(tr.v[0]) || dt.is_super(tr.v[1]) || dt.is_super(tr.v[2]);
      Vec2 c = (dt.pts[tr.v[0]] + dt.pts[tr.v[1]] + dt.pts[tr.v[2]]) / 3.0;
      tr.inside = (!super && point_in_domain(domain, c)) ? 1 : 0;
    }
    return tr.inside == 1;
  };

  auto find_encroached = [&](Vec2 c) -> std::pair<int, int> {
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
      Feature& f = features[fi];
      double d_curve;
      if (f.circular)
        d_curve = std::abs(dist(c, f.center) - f.radius);
      else
        d_curve = 0.0;  // polygon: always scan (few segments)
      if (d_curve > 2.0 * f.max_half_len) continue;
      for (std::size_t si = 0; si < f.segments.size(); ++si) {
        auto [a, b] = f.segments[si];
        Vec2 mid = 0.5 * (dt.pts[a] + dt.pts[b]);
        double half = 0.5 * dist(dt.pts[a], dt.pts[b]);
        if (dist(c, mid) < half * (1.0 - 1e-12)) return {int(fi), int(si)};
      }
    }
    return {-1, -1};
  };

  auto split_segment = [&](int fi, int si) -> bool {
    Feature& f = features[fi];
    auto [a, b] = f.segments[si];
    Vec2 mid = 0.5 * (dt.pts[a] + dt.pts[b]);
    if (f.circular) mid = f.center + f.radius * normalized(mid - f.center);
    dt.constrained.erase(Delaunay::edge_key(a, b));
    int idx = dt.insert(mid, dt.vert_tri[a], {a, b});
    if (idx == a || idx == b) {
      // Midpoint collapsed onto an endpoint; segment is as fine as it gets.
      dt.constrained.insert(Delaunay::edge_key(a, b));
      return false;
    }
    dt.feature[idx] = f.id;
    f.segments[si] = {a, idx};
    f.segments.push_back({idx, b});
    if (!dt.edge_exists(a, idx)) dt.ensure_edge(a, idx);
    if (!dt.edge_exists(idx, b)) dt.ensure_edge(idx, b);
    f.rebuild_max(dt.pts);
    return true;
  };

  bool changed = true;
  int pass = 0;
  while (changed) {
    changed = false;
    if (++pass > 64) fail(ErrorCode::MeshError, "refinement did not settle");
    for (std::size_t t = 0; t < dt.tris.size(); ++t) {
      if (!dt.tris[t].alive || dt.tris[t].hopeless) continue;
      if (!tri_inside(int(t))) continue;
      if (dt.pts.size() > opt.max_points)
        fail(ErrorCode::MeshError, "refinement exceeded the point budget");

      const auto& tr = dt.tris[t];
      Vec2 A = dt.pts[tr.v[0]], B = dt.pts[tr.v[1]], C = dt.pts[tr.v[2]];
      double lab = dist(A, B), lbc = dist(B, C), lca = dist(C, A);
      double lmax = std::max({lab, lbc, lca});
      double lmin = std::min({lab, lbc, lca});
      Vec2 cc;
      double rc;
      if (!dt.circumcircle(int(t), &cc, &rc)) continue;
      Vec2 centroid = (A + B + C) / 3.0;
      double target = sizer(centroid);

      bool size_bad = lmax > target;
      bool angle_bad = rc / lmin > quality_bound && rc > 0.35 * target;
      if (!size_bad && !angle_bad) continue;

      auto [fi, si] = find_encroached(cc);
      if (fi >= 0) {
        if (split_segment(fi, si))
          changed = true;
        else
          dt.tris[t].hopeless = true;
        continue;
      }
      if (!point_in_domain(domain, cc)) {
        dt.tris[t].hopeless = true;
        continue;
      }
      int before = int(dt.pts.size());
      int idx = dt.insert(cc, int(t));
      if (idx >= before) {
        changed = true;
      } else {
        dt.tris[t].hopeless = true;  // duplicate; give up on this triangle
      }
    }
  }

  // --- extraction ---
  Mesh mesh;
  mesh.target_h = h;
  mesh.grade = grade;
  std::vector<int> remap(dt.pts.size(), -1);
  std::vector<int> tri_remap(dt.tris.size(), -1);
  for (std::size_t t = 0; t < dt.tris.size(); ++t) {
    if (!dt.tris[t].alive) continue;
    if (!tri_inside(int(t))) continue;
    const auto& tr = dt.tris[t];
    std::array<int, 3> nodes;
    for (int i = 0; i < 3; ++i) {
      int v = tr.v[i];
      if (remap[v] < 0) {
        remap[v] = int(mesh.nodes.size());
        mesh.nodes.push_back(dt.pts[v]);
      }
      nodes[i] = remap[v];
    }
    tri_remap[t] = int(mesh.tris.size());
    mesh.tris.push_back(nodes);
  }
  if (mesh.tris.empty()) fail(ErrorCode::MeshError, "empty triangulation");

  for (std::size_t t = 0; t < dt.tris.size(); ++t) {
    if (tri_remap[t] < 0) continue;
    const auto& tr = dt.tris[t];
    for (int e = 0; e < 3; ++e) {
      int nb = tr.n[e];
      bool nb_kept = nb >= 0 && dt.tris[nb].alive && tri_remap[nb] >= 0;
      if (nb_kept) continue;
      int a = tr.v[(e + 1) % 3], b = tr.v[(e + 2) % 3];
      int fa = dt.feature[a], fb = dt.feature[b];
      if (fa == kFeatureInterior || fb == kFeatureInterior || fa != fb)
        fail(ErrorCode::MeshError, "boundary edge endpoints disagree on feature");
      BoundaryEdge be;
      be.a = remap[a];
      be.b = remap[b];
      be.tag = fa;
      be.tri = tri_remap[t];
      mesh.bedges.push_back(be);
    }
  }

  mesh.hole_committed_radius.assign(domain.holes.size(), 0.0);
  for (std::size_t k = 0; k < domain.holes.size(); ++k)
    mesh.hole_committed_radius[k] = mesh.boundary_length(int(k)) / (2.0 * M_PI);

  mesh.audit();
  return mesh;
}

}  // namespace qcd
