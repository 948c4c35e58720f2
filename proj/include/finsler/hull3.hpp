#pragma once

#include "finsler/core.hpp"

#include <array>
#include <vector>

namespace finsler {

/// Closed triangulated surface of a 3D convex hull; faces are counter-clockwise seen from outside.
struct HullMesh {
  std::vector<Eigen::Vector3d> points;
  std::vector<std::array<int, 3>> faces;
};

/// Incremental hull with per-face outside sets. Points within a relative distance of 1e-12
/// of the current hull are treated as inside, so coplanar input never creates sliver faces.
/// Throws InputError when the input is (numerically) flat.
HullMesh convex_hull_3d(const std::vector<Eigen::Vector3d>& points);

/// Steiner data of a convex polyhedron.
struct PolyhedronMeasures {
  double volume = 0.0;
  double area = 0.0;
  /// sum over edges of length * exterior dihedral angle
  double edge_curvature = 0.0;
};

PolyhedronMeasures polyhedron_measures(const HullMesh& mesh);

}  // namespace finsler
