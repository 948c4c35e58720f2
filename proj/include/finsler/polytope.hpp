#pragma once

#include "finsler/core.hpp"

#include <vector>

namespace finsler {

/// Gauge (Minkowski functional) of a convex polytope containing the origin in its interior.
///
/// The hull is computed once at construction. In the plane the hull vertices are kept in
/// angular order and evaluation locates the edge hit by the ray through xi with a binary
/// search. In higher dimension every facet is stored as a covector a with the facet lying
/// in {a . x = 1}; the gauge is the maximum of a . xi over facets.
class PolytopeGauge {
 public:
  /// Throws InputError when the vertices do not span R^n or the origin is not interior.
  explicit PolytopeGauge(std::vector<Vec> vertices);

  int dimension() const { return dim_; }
  double eval(const Vec& xi) const;
  /// Exact support function max_v theta . v over hull vertices.
  double support(const Vec& theta) const;

  /// Input vertices as given.
  const std::vector<Vec>& input_vertices() const { return input_; }
  /// Extreme points of the hull (angular order in 2D).
  const std::vector<Vec>& hull_vertices() const { return hull_; }
  /// Facet covectors a_f with facet = hull ∩ {a_f . x = 1}.
  const std::vector<Vec>& facet_covectors() const { return facets_; }

 private:
  void build_planar();
  void build_general();

  int dim_ = 0;
  std::vector<Vec> input_;
  std::vector<Vec> hull_;
  std::vector<Vec> facets_;
  std::vector<double> angles_;  // 2D only: polar angle of hull_[k], strictly increasing
};

/// Convenience wrapper: min{t > 0 : xi / t in hull(vertices)}.
double gauge_of_polytope(const std::vector<Vec>& vertices, const Vec& xi);

}  // namespace finsler
