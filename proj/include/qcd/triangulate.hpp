#pragma once

#include <cstddef>

#include "qcd/geometry.hpp"
#include "qcd/mesh.hpp"

namespace qcd {

struct MeshOptions {
  int min_hole_edges = 32;     // floor on hole boundary resolution
  int max_hole_edges = 4096;
  double min_angle_deg = 25.0; // radius-edge quality target
  double hole_band = 3.0;      // grade*h applies within band*eps of a hole
  double growth = 0.6;         // sizing growth rate away from hole rings
  std::size_t max_points = 2000000;
};

// Conforming triangulation of the domain: constrained Delaunay over
// boundary-sampled points with Ruppert-style circumcenter refinement.
// Max edge length <= h away from holes and <= h*grade within
// hole_band*eps of each hole; hole rings are graded finer for small eps so
// the polygonal-hole bias shrinks along an eps ladder.
// Throws GeometryError for invalid domains and MeshError when the size
// precondition h < min(hole gap, hole-to-boundary clearance)/4 fails or
// refinement cannot complete.
Mesh triangulate(const Domain& domain, double h, double grade,
                 const MeshOptions& options = {});

}  // namespace qcd
