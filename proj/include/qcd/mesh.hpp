#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qcd/quadrature.hpp"
#include "qcd/vec2.hpp"

namespace qcd {

// Boundary tag: outer boundary or hole index.
constexpr int kTagOuter = -1;

struct BoundaryEdge {
  int a = -1;
  int b = -1;        // oriented a -> b, domain on the left
  int tag = kTagOuter;
  int tri = -1;      // owning triangle
};

// Conforming triangulation with tagged boundary. Triangles are CCW.
class Mesh {
 public:
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> tris;
  std::vector<BoundaryEdge> bedges;
  double target_h = 0.0;
  double grade = 1.0;
  // Committed hole radii (boundary polygon perimeter / 2pi), indexed by tag.
  std::vector<double> hole_committed_radius;

  double signed_area(int t) const {
    const auto& tr = tris[t];
    return 0.5 * cross(nodes[tr[1]] - nodes[tr[0]], nodes[tr[2]] - nodes[tr[0]]);
  }
  Vec2 centroid(int t) const {
    const auto& tr = tris[t];
    return (nodes[tr[0]] + nodes[tr[1]] + nodes[tr[2]]) / 3.0;
  }

  // Structural audit: positive areas, each boundary edge owned by exactly one
  // triangle, tags partition the boundary, holes resolved with >= 16 edges.
  // Throws MeshError on violation.
  void audit() const;

  // Unit normal pointing out of the meshed region (into the hole for hole
  // tags). Throws NotBoundary for edges not in the boundary list.
  Vec2 outward_normal(const BoundaryEdge& e) const;
  Vec2 outward_normal(int node_a, int node_b) const;

  double boundary_length(int tag) const;

  // Point location (triangle index, or -1 outside); grid-accelerated.
  int locate(Vec2 p) const;

  // Linear interpolation helpers for nodal data.
  std::array<double, 3> barycentric(int tri, Vec2 p) const;

 private:
  struct Locator;
  mutable std::shared_ptr<Locator> locator_;
  void build_locator() const;
};

// Composite element-wise quadrature of the given order; deterministic for a
// fixed mesh and spec. Throws NonFiniteIntegrand naming the offending point.
double integrate_domain(const Mesh& mesh, const std::function<double(Vec2)>& f,
                        const QuadratureSpec& q);

// Variant passing the triangle index (for piecewise data).
double integrate_domain_tri(const Mesh& mesh,
                            const std::function<double(int, Vec2)>& f,
                            const QuadratureSpec& q);

// Line quadrature over all boundary edges with the given tag.
double integrate_boundary(const Mesh& mesh, int tag,
                          const std::function<double(Vec2)>& f,
                          const QuadratureSpec& q);

// Variant receiving point and outward unit normal.
double integrate_boundary_n(const Mesh& mesh, int tag,
                            const std::function<double(Vec2, Vec2)>& f,
                            const QuadratureSpec& q);

// Plain-text mesh format ("qcmesh 1"): nodes/tris/bedges sections, optional
// nodal field section. Readers reject unknown versions.
void write_mesh(std::ostream& os, const Mesh& mesh,
                const std::vector<double>* field = nullptr);
void write_mesh_file(const std::string& path, const Mesh& mesh,
                     const std::vector<double>* field = nullptr);
Mesh read_mesh(std::istream& is, std::vector<double>* field = nullptr);
Mesh read_mesh_file(const std::string& path,
                    std::vector<double>* field = nullptr);

}  // namespace qcd
