#pragma once

#include "finsler/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace finsler {

class MinkowskiNorm;

enum class QuadratureScheme { CircleTrapezoid, CirclePanels, ProductGauss, MonteCarlo };

std::string to_string(QuadratureScheme scheme);

/// Nodes and weights on S^{n-1}; the weights sum to the sphere measure.
struct SphericalQuadrature {
  int dimension = 0;
  std::vector<Vec> nodes;
  std::vector<double> weights;
  QuadratureScheme scheme = QuadratureScheme::CircleTrapezoid;
  int level = 0;

  std::size_t size() const { return nodes.size(); }
  bool deterministic() const { return scheme != QuadratureScheme::MonteCarlo; }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

/// Uniform trapezoid rule on the circle with `count` nodes.
SphericalQuadrature circle_trapezoid(std::size_t count);

/// Composite Gauss rule on the circle split at `breakpoints` (angles). Each arc is cut into
/// ceil(density * length / (pi/2)) subpanels carrying `order` Gauss points. With no breakpoints
/// the whole circle is one arc starting at angle 0.
SphericalQuadrature circle_panels(std::vector<double> breakpoints, int density, int order);

/// Gauss-Legendre in cos(polar angle) times trapezoid in azimuth on S^2.
SphericalQuadrature sphere_product_gauss(int n_polar, int n_azimuth);

/// Uniform random directions on S^{n-1} with equal weights.
SphericalQuadrature monte_carlo_sphere(int n, std::size_t count, std::uint64_t seed);

/// Scheme selection by dimension and norm structure at refinement `level`:
///   n = 2 smooth:       trapezoid with 256 * 2^level nodes
///   n = 2 with kinks:   panels split at kink angles, density 2^level, 16 Gauss points per subpanel
///   n = 3:              product Gauss with (8 * 2^level) x (16 * 2^level) nodes
///   n >= 4:             Monte Carlo with 125000 * 2^level samples
SphericalQuadrature quadrature_for(const MinkowskiNorm& norm, int level, std::uint64_t seed = 0);

/// Angles of the norm's kink directions in the plane, sorted and de-duplicated.
std::vector<double> kink_angles(const std::vector<Vec>& directions);

}  // namespace finsler
