#pragma once

#include "finsler/core.hpp"
#include "finsler/minkowski.hpp"
#include "finsler/quadrature.hpp"

#include <cstdint>
#include <optional>

namespace finsler {

/// Symmetric positive definite n x n matrix in chart coordinates.
class MetricTensor {
 public:
  /// Symmetrizes `m` and throws NumericalError unless every eigenvalue is positive.
  explicit MetricTensor(const Mat& m);

  const Mat& matrix() const { return m_; }
  int dimension() const { return static_cast<int>(m_.rows()); }
  double operator()(const Vec& a, const Vec& b) const { return a.dot(m_ * b); }
  Mat inverse() const;
  double determinant() const { return m_.determinant(); }
  double condition() const;
  double min_eigenvalue() const;

 private:
  Mat m_;
};

/// {xi : xi^T Q xi <= s^2}.
struct Ellipsoid {
  MetricTensor shape;
  double scale = 1.0;

  bool contains(const Vec& xi) const { return shape(xi, xi) <= scale * scale; }
  double volume() const;
};

/// Raw quadrature output for one norm.
struct BallMoments {
  Mat dual;       // M*_ij, matrix of g*_F in the coordinate dual basis
  double volume;  // lambda(Omega)
};

class DefinitenessError : public InputError {
 public:
  using InputError::InputError;
};

/// Second moments of the unit ball by the radial reduction
///   M*_ij = [sum_k w_k u_i u_j F(u_k)^{-(n+2)}] / lambda,  lambda = (1/n) sum_k w_k F(u_k)^{-n}.
BallMoments ball_moments(const MinkowskiNorm& norm, const SphericalQuadrature& quad);

/// Matrix of g*_F; fails rather than clamping when the symmetrized result is not PD.
MetricTensor dual_scalar_matrix(const MinkowskiNorm& norm, const SphericalQuadrature& quad);

/// g_F = (M*)^{-1}. Throws NumericalError when cond(M*) > 1e12.
MetricTensor bl_metric(const MinkowskiNorm& norm, const SphericalQuadrature& quad);

double unit_ball_volume(const MinkowskiNorm& norm, const SphericalQuadrature& quad);

/// Unit ball of g*_F in the dual space: shape M*, scale 1.
Ellipsoid binet_ellipsoid(const MinkowskiNorm& norm, const SphericalQuadrature& quad);

/// Unit ball of g_F scaled by (lambda(Omega) / lambda(B))^{1/(n+2)}.
Ellipsoid legendre_ellipsoid(const MinkowskiNorm& norm, const SphericalQuadrature& quad);

/// Refinement control for the metric computation.
struct QuadratureOptions {
  int level = 3;
  int max_level = 7;
  double tolerance = 1e-8;         // relative Frobenius change between consecutive levels
  std::uint64_t seed = 0;          // Monte Carlo only
  double mc_relative_error = 1e-3; // target relative standard error of M* (n >= 4)
  std::size_t mc_max_samples = 16000000;
  bool converge = true;            // false: evaluate at `level` only
};

struct BLResult {
  MetricTensor metric;
  MetricTensor dual;
  double volume = 0.0;
  double condition_metric = 0.0;
  int level = 0;
  std::size_t nodes = 0;
  QuadratureScheme scheme = QuadratureScheme::CircleTrapezoid;
  double achieved_tolerance = 0.0;  // relative change at the last refinement (or MC standard error)
  bool converged = true;
};

/// bl_metric with automatic scheme selection and level-doubling convergence control.
BLResult compute_bl(const MinkowskiNorm& norm, const QuadratureOptions& options = {});

/// Deterministic radial moment of inertia  int_Omega theta(xi)^2 dxi.
double moment_of_inertia(const MinkowskiNorm& norm, const Vec& theta, const SphericalQuadrature& quad);

/// Closed form  s^{n+2} Vol(B^n) / ((n+2) sqrt(det Q)) * theta^T Q^{-1} theta.
double moment_of_inertia(const Ellipsoid& body, const Vec& theta);

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo moment of inertia by uniform sampling of the exact bounding box.
MonteCarloEstimate moment_of_inertia_mc(const MinkowskiNorm& norm, const Vec& theta, std::size_t samples,
                                        std::uint64_t seed);
MonteCarloEstimate moment_of_inertia_mc(const Ellipsoid& body, const Vec& theta, std::size_t samples,
                                        std::uint64_t seed);

}  // namespace finsler
