#include "finsler/binet_legendre.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace finsler {

MetricTensor::MetricTensor(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw InputError("metric tensor: matrix must be square");
  if (!m.allFinite()) throw NumericalError("metric tensor: non-finite entries");
  m_ = 0.5 * (m + m.transpose());
  const double lo = min_eigenvalue();
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os << "metric tensor: not positive definite (min eigenvalue " << lo << ")";
    throw NumericalError(os.str());
  }
}

Mat MetricTensor::inverse() const { return m_.llt().solve(Mat::Identity(m_.rows(), m_.cols())); }

double MetricTensor::condition() const { return condition_number(m_); }

double MetricTensor::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double Ellipsoid::volume() const {
  const int n = shape.dimension();
  return std::pow(scale, n) * unit_ball_volume_euclidean(n) / std::sqrt(shape.determinant());
}

BallMoments ball_moments(const MinkowskiNorm& norm, const SphericalQuadrature& quad) {
  const int n = norm.dimension();
  if (quad.dimension != n) throw InputError("ball_moments: quadrature dimension does not match the norm");
  if (quad.nodes.empty()) throw InputError("ball_moments: empty quadrature");
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(n * (n + 1) / 2));
  CompensatedSum vol;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const Vec& u = quad.nodes[k];
    const double f = norm.eval_unchecked(u);
    if (!(f > 0.0) || !std::isfinite(f)) {
      std::ostringstream os;
      os << "norm is not definite: F(u) = " << f << " at u = [" << u.transpose() << "]";
      throw DefinitenessError(os.str());
    }
    const double w = quad.weights[k];
    const double fn = std::pow(f, -n);
    vol.add(w * fn);
    const double radial = w * fn / (f * f);
    std::size_t slot = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) acc[slot++].add(radial * u[i] * u[j]);
    }
  }
  BallMoments out;
  out.volume = vol.value() / n;
  out.dual = Mat(n, n);
  std::size_t slot = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      out.dual(i, j) = out.dual(j, i) = acc[slot++].value() / out.volume;
    }
  }
  return out;
}

MetricTensor dual_scalar_matrix(const MinkowskiNorm& norm, const SphericalQuadrature& quad) {
  const BallMoments moments = ball_moments(norm, quad);
  try {
    return MetricTensor(moments.dual);
  } catch (const NumericalError& e) {
    std::ostringstream os;
    os << "quadrature failure: dual scalar matrix is not positive definite (" << e.what()
       << "; condition " << condition_number(moments.dual) << ", " << quad.size() << " nodes, scheme "
       << to_string(quad.scheme) << ")";
    throw NumericalError(os.str());
  }
}

namespace {

MetricTensor invert_dual(const MetricTensor& dual) {
  const double cond = dual.condition();
  if (cond > 1e12) {
    std::ostringstream os;
    os << "bl_metric: dual scalar matrix is ill-conditioned (condition " << cond << ")";
    throw NumericalError(os.str());
  }
  return MetricTensor(dual.inverse());
}

}  // namespace

MetricTensor bl_metric(const MinkowskiNorm& norm, const SphericalQuadrature& quad) {
  return invert_dual(dual_scalar_matrix(norm, quad));
}

double unit_ball_volume(const MinkowskiNorm& norm, const SphericalQuadrature& quad) {
  return ball_moments(norm, quad).volume;
}

Ellipsoid binet_ellipsoid(const MinkowskiNorm& norm, const SphericalQuadrature& quad) {
  return Ellipsoid{dual_scalar_matrix(norm, quad), 1.0};
}

Ellipsoid legendre_ellipsoid(const MinkowskiNorm& norm, const SphericalQuadrature& quad) {
  const BallMoments moments = ball_moments(norm, quad);
  const MetricTensor g = invert_dual(MetricTensor(moments.dual));
  const int n = norm.dimension();
  const double ball_volume = unit_ball_volume_euclidean(n) / std::sqrt(g.determinant());
  return Ellipsoid{g, std::pow(moments.volume / ball_volume, 1.0 / (n + 2))};
}

BLResult compute_bl(const MinkowskiNorm& norm, const QuadratureOptions& options) {
  const int n = norm.dimension();
  if (options.level < 0 || options.max_level < options.level) throw InputError("compute_bl: invalid levels");

  if (n >= 4) {
    // Monte Carlo: batch means give a standard error; grow the sample until it is small enough.
    constexpr int kBatches = 16;
    std::size_t samples = std::min(options.mc_max_samples, static_cast<std::size_t>(125000) << options.level);
    std::uint64_t seed = options.seed;
    for (;;) {
      const SphericalQuadrature quad = monte_carlo_sphere(n, samples, seed);
      const BallMoments full = ball_moments(norm, quad);
      std::vector<Mat> batch;
      const std::size_t per = samples / kBatches;
      for (int b = 0; b < kBatches && per > 0; ++b) {
        SphericalQuadrature part;
        part.dimension = n;
        part.scheme = QuadratureScheme::MonteCarlo;
        part.nodes.assign(quad.nodes.begin() + static_cast<std::ptrdiff_t>(b * per),
                          quad.nodes.begin() + static_cast<std::ptrdiff_t>((b + 1) * per));
        part.weights.assign(per, sphere_area(n) / static_cast<double>(per));
        batch.push_back(ball_moments(norm, part).dual);
      }
      Mat mean = Mat::Zero(n, n);
      for (const auto& m : batch) mean += m;
      mean /= static_cast<double>(batch.size());
      double var = 0.0;
      for (const auto& m : batch) var += (m - mean).squaredNorm();
      var /= static_cast<double>(batch.size() - 1);
      const double rel_se = std::sqrt(var / static_cast<double>(batch.size())) / full.dual.norm();
      const bool ok = rel_se < options.mc_relative_error;
      if (ok || samples >= options.mc_max_samples || !options.converge) {
        MetricTensor dual(full.dual);
        if (dual.min_eigenvalue() <= 0.0) throw NumericalError("compute_bl: Monte Carlo dual matrix not PD");
        MetricTensor metric = invert_dual(dual);
        return BLResult{metric,      dual,     full.volume, metric.condition(), options.level,
                        quad.size(), quad.scheme, rel_se,  ok};
      }
      samples = std::min(options.mc_max_samples, samples * 2);
      seed = seed * 6364136223846793005ULL + 1442695040888963407ULL;
    }
  }

  auto at_level = [&](int level) {
    const SphericalQuadrature quad = quadrature_for(norm, level, options.seed);
    return std::make_pair(ball_moments(norm, quad), quad.size());
  };
  int level = options.level;
  auto [current, nodes] = at_level(level);
  double change = 0.0;
  bool converged = !options.converge;
  QuadratureScheme scheme = quadrature_for(norm, 0).scheme;
  while (options.converge && level < options.max_level) {
    auto [next, next_nodes] = at_level(level + 1);
    change = relative_frobenius(current.dual, next.dual);
    current = std::move(next);
    nodes = next_nodes;
    ++level;
    if (change < options.tolerance) {
      converged = true;
      break;
    }
  }
  MetricTensor dual = [&] {
    try {
      return MetricTensor(current.dual);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("quadrature failure: ") + e.what());
    }
  }();
  MetricTensor metric = invert_dual(dual);
  return BLResult{metric, dual, current.volume, metric.condition(), level, nodes, scheme, change, converged};
}

double moment_of_inertia(const MinkowskiNorm& norm, const Vec& theta, const SphericalQuadrature& quad) {
  const int n = norm.dimension();
  if (theta.size() != n || quad.dimension != n) throw InputError("moment_of_inertia: dimension mismatch");
  CompensatedSum acc;
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const Vec& u = quad.nodes[k];
    const double f = norm.eval_unchecked(u);
    if (!(f > 0.0)) throw DefinitenessError("moment_of_inertia: norm is not definite");
    const double t = theta.dot(u);
    acc.add(quad.weights[k] * t * t * std::pow(f, -(n + 2)));
  }
  return acc.value() / (n + 2);
}

double moment_of_inertia(const Ellipsoid& body, const Vec& theta) {
  const int n = body.shape.dimension();
  if (theta.size() != n) throw InputError("moment_of_inertia: dimension mismatch");
  return std::pow(body.scale, n + 2) * unit_ball_volume_euclidean(n) /
         ((n + 2) * std::sqrt(body.shape.determinant())) * theta.dot(body.shape.inverse() * theta);
}

namespace {

template <class Inside>
MonteCarloEstimate box_moment(const Vec& lo, const Vec& hi, const Vec& theta, std::size_t samples,
                              std::uint64_t seed, Inside inside) {
  if (samples < 2) throw InputError("moment_of_inertia_mc: need at least 2 samples");
  const auto n = lo.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double box = (hi - lo).prod();
  CompensatedSum sum;
  CompensatedSum sum_sq;
  Vec p(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) p[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
    if (inside(p)) {
      const double t = theta.dot(p);
      sum.add(t * t);
      sum_sq.add(t * t * t * t);
    }
  }
  const double count = static_cast<double>(samples);
  const double mean = sum.value() / count;
  const double var = std::max(0.0, sum_sq.value() / count - mean * mean);
  return MonteCarloEstimate{box * mean, box * std::sqrt(var / count), samples};
}

}  // namespace

MonteCarloEstimate moment_of_inertia_mc(const MinkowskiNorm& norm, const Vec& theta, std::size_t samples,
                                        std::uint64_t seed) {
  const int n = norm.dimension();
  if (theta.size() != n) throw InputError("moment_of_inertia_mc: dimension mismatch");
  Vec lo(n);
  Vec hi(n);
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    hi[i] = support(norm, e);
    lo[i] = -support(norm, -e);
  }
  return box_moment(lo, hi, theta, samples, seed, [&](const Vec& p) { return norm.eval_unchecked(p) < 1.0; });
}

MonteCarloEstimate moment_of_inertia_mc(const Ellipsoid& body, const Vec& theta, std::size_t samples,
                                        std::uint64_t seed) {
  const int n = body.shape.dimension();
  if (theta.size() != n) throw InputError("moment_of_inertia_mc: dimension mismatch");
  const Mat inv = body.shape.inverse();
  Vec half(n);
  for (int i = 0; i < n; ++i) half[i] = body.scale * std::sqrt(inv(i, i));
  return box_moment(-half, half, theta, samples, seed, [&](const Vec& p) { return body.contains(p); });
}

}  // namespace finsler
