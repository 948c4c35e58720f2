#include "finsler/invariants.hpp"

#include "finsler/hull3.hpp"
#include "finsler/optimize.hpp"
#include "finsler/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace finsler {

namespace {

// Boundary node counts for the inscribed polygon/polytope. The coarse and fine results are
// combined by Richardson extrapolation (inscribed error ~ N^-2 in 2D, ~ N^-1 in 3D point count).
constexpr std::size_t kPolygonNodes = 4096;
constexpr std::size_t kPolytopeNodes = 12000;

constexpr std::size_t kRoundnessSamples2 = 4096;
constexpr std::size_t kRoundnessSamples3 = 20000;

double polygon_perimeter(const MinkowskiNorm& norm, std::size_t total) {
  std::vector<double> breaks = kink_angles(norm.kink_directions());
  if (breaks.empty()) breaks.push_back(0.0);
  std::vector<double> angles;
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = k + 1 < breaks.size() ? breaks[k + 1] : breaks.front() + 2.0 * kPi;
    const auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(total) * (b - a) / (2.0 * kPi)));
    const std::size_t segments = std::max<std::size_t>(m, 1);
    for (std::size_t j = 0; j < segments; ++j) {
      angles.push_back(a + (b - a) * static_cast<double>(j) / static_cast<double>(segments));
    }
  }
  std::vector<Vec> pts;
  pts.reserve(angles.size());
  for (double phi : angles) {
    const Vec u = circle_point(phi);
    pts.push_back(u / norm.eval_unchecked(u));
  }
  CompensatedSum per;
  for (std::size_t k = 0; k < pts.size(); ++k) per.add((pts[(k + 1) % pts.size()] - pts[k]).norm());
  return per.value();
}

PolyhedronMeasures inscribed_polytope(const MinkowskiNorm& norm, std::size_t count) {
  std::vector<Eigen::Vector3d> pts;
  auto push = [&](const Vec& u) {
    const double f = norm.eval_unchecked(u);
    if (!(f > 0.0) || !std::isfinite(f)) throw NumericalError("quermassintegrals: norm not positive on the sphere");
    pts.emplace_back(u[0] / f, u[1] / f, u[2] / f);
  };
  for (const auto& k : norm.kink_directions()) push(k);
  for (const auto& u : sphere_directions(3, count)) push(u);
  return polyhedron_measures(convex_hull_3d(pts));
}

// Candidate directions where F / |.| may attain extrema on the unit sphere.
std::vector<Vec> roundness_candidates(const MinkowskiNorm& norm) {
  const int n = norm.dimension();
  std::vector<Vec> c = sphere_directions(n, n == 2 ? kRoundnessSamples2 : kRoundnessSamples3);
  for (const auto& k : norm.kink_directions()) c.push_back(k);
  for (const auto& k : norm.dual_kink_directions()) c.push_back(k);
  return c;
}

// Largest value of sign * F on the unit circle.
double circle_extremum(const MinkowskiNorm& norm, double sign) {
  std::vector<double> angles;
  for (const auto& u : roundness_candidates(norm)) {
    double a = std::atan2(u[1], u[0]);
    if (a < 0.0) a += 2.0 * kPi;
    angles.push_back(a);
  }
  std::sort(angles.begin(), angles.end());
  const std::size_t m = angles.size();
  auto g = [&](double phi) { return sign * norm.eval_unchecked(circle_point(phi)); };
  std::vector<double> values(m);
  for (std::size_t k = 0; k < m; ++k) values[k] = g(angles[k]);
  double best = *std::max_element(values.begin(), values.end());
  // Refine around every sampled local maximum that is close to the best sample.
  const double spread = best - *std::min_element(values.begin(), values.end());
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t prev = (k + m - 1) % m;
    const std::size_t next = (k + 1) % m;
    if (values[k] < values[prev] || values[k] < values[next]) continue;
    if (values[k] < best - 0.05 * spread - 1e-15) continue;
    double lo = angles[prev];
    double hi = angles[next];
    if (lo > angles[k]) lo -= 2.0 * kPi;
    if (hi < angles[k]) hi += 2.0 * kPi;
    const auto [arg, val] = opt::golden_maximize(g, lo, hi, 1e-13);
    (void)arg;
    best = std::max(best, val);
  }
  return sign * best;
}

double sphere_extremum(const MinkowskiNorm& norm, double sign) {
  const std::vector<Vec> cand = roundness_candidates(norm);
  auto g = [&](const Vec& u) { return sign * norm.eval_unchecked(u); };
  std::vector<double> values(cand.size());
  for (std::size_t k = 0; k < cand.size(); ++k) values[k] = g(cand[k]);
  std::vector<std::size_t> order(cand.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  double best = values[order.front()];
  // Refine the best few well-separated candidates.
  std::vector<Vec> seeds;
  for (std::size_t idx : order) {
    if (seeds.size() >= 8) break;
    const Vec& u = cand[idx];
    bool separated = true;
    for (const auto& s : seeds) separated = separated && (u - s).norm() > 0.1;
    if (separated) seeds.push_back(u);
  }
  for (const auto& s : seeds) {
    const auto [arg, val] = opt::sphere_local_maximize(g, s, 0.02, 1e-15);
    (void)arg;
    best = std::max(best, val);
  }
  return sign * best;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - t) + v[hi] * t;
}

}  // namespace

MinkowskiNorm orthonormalize(const MinkowskiNorm& norm, const MetricTensor& g) {
  if (g.dimension() != norm.dimension()) throw InputError("orthonormalize: metric dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> es(g.matrix());
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("orthonormalize: metric factorization failed");
  }
  const Mat inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                       es.eigenvectors().transpose();
  return linear_image(norm, inv_sqrt);
}

Quermassintegrals quermassintegrals(const MinkowskiNorm& norm, const MetricTensor& g,
                                    const QuadratureOptions& options) {
  const int n = norm.dimension();
  if (n != 2 && n != 3) {
    throw NotImplementedError("quermassintegrals: only dimensions 2 and 3 are supported, got " + std::to_string(n));
  }
  const MinkowskiNorm f = orthonormalize(norm, g);
  Quermassintegrals q;
  q.dimension = n;
  if (n == 2) {
    const double area = unit_ball_volume(f, quadrature_for(f, options.level, options.seed));
    const double coarse = polygon_perimeter(f, kPolygonNodes);
    const double fine = polygon_perimeter(f, 2 * kPolygonNodes);
    const double perimeter = (4.0 * fine - coarse) / 3.0;
    q.values = {area, 0.5 * perimeter, kPi};
  } else {
    const PolyhedronMeasures coarse = inscribed_polytope(f, kPolytopeNodes);
    const PolyhedronMeasures fine = inscribed_polytope(f, 4 * kPolytopeNodes);
    auto extrapolate = [](double c, double fi) { return (4.0 * fi - c) / 3.0; };
    const double volume = extrapolate(coarse.volume, fine.volume);
    const double area = extrapolate(coarse.area, fine.area);
    const double curvature = extrapolate(coarse.edge_curvature, fine.edge_curvature);
    q.values = {volume, area / 3.0, curvature / 6.0, 4.0 * kPi / 3.0};
  }
  for (double w : q.values) {
    if (!(w > 0.0) || !std::isfinite(w)) throw NumericalError("quermassintegrals: non-positive functional");
  }
  return q;
}

Roundness roundness(const MinkowskiNorm& norm, const MetricTensor& g) {
  const MinkowskiNorm f = orthonormalize(norm, g);
  Roundness r;
  if (f.dimension() == 2) {
    r.mu = circle_extremum(f, -1.0);
    r.big_m = circle_extremum(f, 1.0);
  } else {
    r.mu = sphere_extremum(f, -1.0);
    r.big_m = sphere_extremum(f, 1.0);
  }
  return r;
}

double isotropy_defect(const MinkowskiNorm& norm, const QuadratureOptions& options) {
  const BLResult bl = compute_bl(norm, options);
  const Roundness r = roundness(norm, bl.metric);
  return std::max(0.0, r.big_m / r.mu - 1.0);
}

Fingerprint fingerprint_point(const MinkowskiNorm& norm, const QuadratureOptions& options) {
  const int n = norm.dimension();
  if (n != 2 && n != 3) {
    throw NotImplementedError("fingerprint_point: only dimensions 2 and 3 are supported, got " + std::to_string(n));
  }
  const BLResult bl = compute_bl(norm, options);
  const Quermassintegrals q = quermassintegrals(norm, bl.metric, options);
  const Roundness r = roundness(norm, bl.metric);
  Fingerprint fp(n + 2);
  for (int j = 0; j < n; ++j) fp[j] = q.values[static_cast<std::size_t>(j)];
  fp[n] = r.mu;
  fp[n + 1] = r.big_m;
  return fp;
}

FingerprintComparison compare_fingerprints(const std::vector<Fingerprint>& a, const std::vector<Fingerprint>& b,
                                           double tol) {
  if (a.empty() || b.empty()) throw InputError("compare_fingerprints: empty cloud");
  if (!(tol >= 0.0)) throw InputError("compare_fingerprints: tolerance must be non-negative");
  const auto d = a.front().size();
  for (const auto* cloud : {&a, &b}) {
    for (const auto& p : *cloud) {
      if (p.size() != d) throw InputError("compare_fingerprints: fingerprints of different dimensions");
      if (!p.allFinite()) throw InputError("compare_fingerprints: non-finite fingerprint entry");
    }
  }
  FingerprintComparison out;
  out.scale.resize(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    std::vector<double> col;
    for (const auto& p : a) col.push_back(p[c]);
    for (const auto& p : b) col.push_back(p[c]);
    const double median = quantile(col, 0.5);
    const double iqr = quantile(col, 0.75) - quantile(col, 0.25);
    const double floor = 1e-6 * (1.0 + std::abs(median));
    out.scale[c] = iqr > floor ? iqr : 1.0 + std::abs(median);
  }
  auto directed = [&](const std::vector<Fingerprint>& from, const std::vector<Fingerprint>& to) {
    std::vector<double> dist;
    dist.reserve(from.size());
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).cwiseQuotient(out.scale).norm());
      dist.push_back(best);
    }
    return dist;
  };
  std::vector<double> ab = directed(a, b);
  const std::vector<double> ba = directed(b, a);
  out.hausdorff = std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end()));
  ab.insert(ab.end(), ba.begin(), ba.end());
  out.quantile95 = quantile(ab, 0.95);
  out.distinguishable = out.hausdorff > tol;
  out.verdict = out.distinguishable ? kVerdictDifferent : kVerdictSame;
  return out;
}

}  // namespace finsler
