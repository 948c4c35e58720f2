#pragma once

#include "finsler/binet_legendre.hpp"
#include "finsler/core.hpp"
#include "finsler/minkowski.hpp"

#include <string>
#include <vector>

namespace finsler {

/// Coefficients of the Steiner polynomial Vol(Omega + tB) = sum_j C(n,j) W_j t^j, computed in
/// coordinates where the Binet-Legendre metric is the identity.
struct Quermassintegrals {
  int dimension = 0;
  std::vector<double> values;  // W_0 .. W_n
};

/// (W_0, ..., W_{n-1}, mu, M).
using Fingerprint = Vec;

/// The norm in coordinates where G is the identity: xi' -> F(G^{-1/2} xi').
MinkowskiNorm orthonormalize(const MinkowskiNorm& norm, const MetricTensor& g);

/// n = 2: W_0 by radial quadrature, W_1 as half the perimeter, W_2 = pi.
/// n = 3: exact functionals of the inscribed polytope through boundary points, W_3 = 4 pi / 3.
/// Other dimensions throw NotImplementedError.
Quermassintegrals quermassintegrals(const MinkowskiNorm& norm, const MetricTensor& g,
                                    const QuadratureOptions& options = {});

struct Roundness {
  double mu = 0.0;
  double big_m = 0.0;
};

/// Min and max of F(xi) / sqrt(xi^T G xi).
Roundness roundness(const MinkowskiNorm& norm, const MetricTensor& g);

/// M / mu - 1 against the norm's own Binet-Legendre metric.
double isotropy_defect(const MinkowskiNorm& norm, const QuadratureOptions& options = {});

/// Quermassintegrals (without W_n) and roundness against the norm's own Binet-Legendre metric.
Fingerprint fingerprint_point(const MinkowskiNorm& norm, const QuadratureOptions& options = {});

struct FingerprintComparison {
  double hausdorff = 0.0;
  double quantile95 = 0.0;
  Vec scale;  // per-coordinate normalization
  bool distinguishable = false;
  std::string verdict;
};

inline constexpr const char* kVerdictSame = "cannot distinguish";
inline constexpr const char* kVerdictDifferent = "not conformally equivalent";

/// Symmetric Hausdorff distance between two fingerprint clouds after dividing every coordinate by
/// the pooled interquartile range (or 1 + |median| when that range vanishes).
FingerprintComparison compare_fingerprints(const std::vector<Fingerprint>& a, const std::vector<Fingerprint>& b,
                                           double tol = 1e-3);

}  // namespace finsler
