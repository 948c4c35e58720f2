#pragma once

#include "finsler/binet_legendre.hpp"
#include "finsler/core.hpp"
#include "finsler/structure.hpp"

#include <functional>
#include <string>
#include <vector>

namespace finsler {

/// Regular lattice including the faces of a chart box; axis 0 varies fastest in flat indices.
class Lattice {
 public:
  /// counts[d] >= 4 nodes along every axis.
  Lattice(ChartBox box, std::vector<int> counts);
  static Lattice uniform(const ChartBox& box, int per_axis);

  const ChartBox& box() const { return box_; }
  int dimension() const { return box_.dimension(); }
  const std::vector<int>& counts() const { return counts_; }
  std::size_t size() const { return size_; }
  double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  double min_spacing() const;

  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(const std::vector<int>& idx) const;
  Vec node(std::size_t flat) const;

  bool same_as(const Lattice& other) const;

 private:
  ChartBox box_;
  std::vector<int> counts_;
  std::vector<double> h_;
  std::size_t size_ = 0;
};

/// Metric tensors on a lattice with tensor-product Catmull-Rom interpolation (cubic Hermite with
/// central-difference slopes, one-sided at the faces). The interpolant is C^1, so the Christoffel symbols
/// below are continuous and exactly metric-compatible with it.
class MetricField {
 public:
  /// Throws NumericalError when a tensor is not symmetric positive definite.
  MetricField(Lattice lattice, std::vector<Mat> values);
  static MetricField from_function(const Lattice& lattice, const std::function<Mat(const Vec&)>& fn);

  const Lattice& lattice() const { return lattice_; }
  const std::vector<Mat>& values() const { return values_; }
  int dimension() const { return lattice_.dimension(); }

  /// Interpolated tensor; x must lie in the chart box.
  Mat operator()(const Vec& x) const;
  /// Interpolated tensor and its partial derivatives d_a G, a = 0..n-1.
  void evaluate(const Vec& x, Mat& g, std::vector<Mat>& dg) const;

 private:
  Lattice lattice_;
  std::vector<Mat> values_;
};

/// Binet-Legendre metric at every lattice node. Node failures abort with the offending node.
MetricField bl_field(const FinslerStructure& structure, const Lattice& lattice, const QuadratureOptions& options = {});

struct ConformalFactorResult {
  std::vector<double> lambda;  // per lattice node
  double residual = 0.0;       // max ||G_A - lambda^2 G_B|| / ||G_A||
  bool conformal = false;      // residual < 1e-4
};

/// lambda = (det G_A / det G_B)^{1/(2n)} node by node.
ConformalFactorResult conformal_factor(const MetricField& a, const MetricField& b);

/// gamma[k](i, j) = Gamma^k_ij.
using Christoffel = std::vector<Mat>;

/// Levi-Civita symbols of the interpolated metric. x must be at least two lattice spacings from the faces.
Christoffel christoffel(const MetricField& field, const Vec& x);

/// Raised when transport fails its metric-preservation check.
class AccuracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct TransportOptions {
  double step_tolerance = 1e-11;  // max entry change of the propagator when the step count doubles
  int max_doublings = 14;
  double gram_bound = 1e-6;       // allowed relative drift of the g-Gram matrix
};

struct TransportResult {
  std::vector<Vec> path;
  Mat initial_frame;
  Mat transported_frame;
  std::vector<Mat> propagators;  // P from the start to every path vertex
  std::size_t steps = 0;
  double gram_residual = 0.0;    // max over vertices of the relative Gram drift of the frame
};

/// Solves d xi / dt = -Gamma(gamma', xi) with RK4 along each polyline segment, splitting segments at
/// lattice cell faces and doubling the step count until the propagator settles. Throws AccuracyError
/// when the Gram drift exceeds options.gram_bound.
TransportResult parallel_transport(const MetricField& field, const std::vector<Vec>& path, const Mat& frame,
                                   const TransportOptions& options = {});

/// Axis-aligned rectangles around the chart center at 0.25, 0.5 and 0.75 of the half-widths (kept two
/// spacings inside the box), in every coordinate plane, with `subdivisions` segments per side.
std::vector<std::vector<Vec>> default_loops(const Lattice& lattice, int subdivisions = 16);

/// 16 unit directions in 2D; axes plus Fibonacci directions otherwise.
std::vector<Vec> default_probes(int n);

struct BerwaldOptions {
  int grid = 0;  // nodes per axis; 0 selects 33 in 2D and 13 in 3D
  QuadratureOptions quad = {3, 7, 1e-8, 0, 1e-3, 16000000, false};
  TransportOptions transport;
  std::vector<std::vector<Vec>> loops;  // empty selects default_loops
  std::vector<Vec> probes;              // empty selects default_probes
  double defect_tolerance = 1e-4;
  double flat_tolerance = 1e-4;
  bool richardson = true;  // extrapolated curvature in flat_residual
};

Lattice berwald_lattice(const FinslerStructure& structure, const BerwaldOptions& options);

struct BerwaldResult {
  double defect = 0.0;
  double max_gram_residual = 0.0;
  std::size_t transports = 0;
  std::size_t ode_steps = 0;
};

/// max |F(y, P xi) - F(x0, xi)| / F(x0, xi) over loops, probes and every vertex y of each loop, where P is
/// Levi-Civita transport of the field from the loop's base point x0.
BerwaldResult berwald_defect(const FinslerStructure& structure, const MetricField& field,
                             const std::vector<std::vector<Vec>>& loops, const std::vector<Vec>& probes,
                             const TransportOptions& options = {});
BerwaldResult berwald_defect(const FinslerStructure& structure, const BerwaldOptions& options = {});

/// Max over interior lattice nodes of the Frobenius norm of R^a_bcd, from central differences of nodal
/// Christoffel symbols. With `richardson` the one- and two-spacing estimates are combined, which cancels the
/// O(h^2) term (nodes [4, N-5]); otherwise nodes [2, N-3] with one spacing.
double flat_residual(const MetricField& field, bool richardson = true);

struct LocalMinkowskiResult {
  double flat_residual = 0.0;
  double berwald_defect = 0.0;
  double max_gram_residual = 0.0;
  bool locally_minkowski = false;
  std::string verdict;
};

LocalMinkowskiResult is_locally_minkowski(const FinslerStructure& structure, const BerwaldOptions& options = {});

}  // namespace finsler
