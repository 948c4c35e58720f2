#include "finsler/quadrature.hpp"

#include "finsler/minkowski.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

namespace finsler {

std::string to_string(QuadratureScheme scheme) {
  switch (scheme) {
    case QuadratureScheme::CircleTrapezoid: return "circle-trapezoid";
    case QuadratureScheme::CirclePanels: return "circle-panels";
    case QuadratureScheme::ProductGauss: return "product-gauss";
    case QuadratureScheme::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw InputError("gauss_legendre: order must be positive");
  static std::mutex cache_mutex;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (auto it = cache.find(order); it != cache.end()) {
      nodes = it->second.first;
      weights = it->second.second;
      return;
    }
  }
  nodes.assign(static_cast<std::size_t>(order), 0.0);
  weights.assign(static_cast<std::size_t>(order), 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_order from the Chebyshev-like initial guess.
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(order - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(order - 1 - i)] = w;
  }
  if (order % 2 == 1) nodes[static_cast<std::size_t>(order / 2)] = 0.0;
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(order, std::make_pair(nodes, weights));
}

SphericalQuadrature circle_trapezoid(std::size_t count) {
  if (count < 3) throw InputError("circle_trapezoid: need at least 3 nodes");
  SphericalQuadrature q;
  q.dimension = 2;
  q.scheme = QuadratureScheme::CircleTrapezoid;
  const double w = 2.0 * kPi / static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) {
    q.nodes.push_back(circle_point(w * static_cast<double>(k)));
    q.weights.push_back(w);
  }
  return q;
}

std::vector<double> kink_angles(const std::vector<Vec>& directions) {
  std::vector<double> angles;
  for (const auto& d : directions) {
    double a = std::atan2(d[1], d[0]);
    if (a < 0.0) a += 2.0 * kPi;
    angles.push_back(a);
  }
  std::sort(angles.begin(), angles.end());
  std::vector<double> unique;
  for (double a : angles) {
    if (unique.empty() || a - unique.back() > 1e-12) unique.push_back(a);
  }
  if (unique.size() > 1 && unique.front() + 2.0 * kPi - unique.back() <= 1e-12) unique.pop_back();
  return unique;
}

SphericalQuadrature circle_panels(std::vector<double> breakpoints, int density, int order) {
  if (density < 1 || order < 1) throw InputError("circle_panels: density and order must be positive");
  std::sort(breakpoints.begin(), breakpoints.end());
  if (breakpoints.empty()) breakpoints.push_back(0.0);
  std::vector<double> gx;
  std::vector<double> gw;
  gauss_legendre(order, gx, gw);
  SphericalQuadrature q;
  q.dimension = 2;
  q.scheme = QuadratureScheme::CirclePanels;
  const std::size_t m = breakpoints.size();
  for (std::size_t k = 0; k < m; ++k) {
    const double a = breakpoints[k];
    const double b = k + 1 < m ? breakpoints[k + 1] : breakpoints[0] + 2.0 * kPi;
    const double len = b - a;
    const int sub = std::max(1, static_cast<int>(std::ceil(density * len / (0.5 * kPi) - 1e-9)));
    const double h = len / sub;
    for (int s = 0; s < sub; ++s) {
      const double lo = a + s * h;
      for (std::size_t g = 0; g < gx.size(); ++g) {
        q.nodes.push_back(circle_point(lo + 0.5 * h * (gx[g] + 1.0)));
        q.weights.push_back(0.5 * h * gw[g]);
      }
    }
  }
  return q;
}

SphericalQuadrature sphere_product_gauss(int n_polar, int n_azimuth) {
  if (n_polar < 2 || n_azimuth < 3) throw InputError("sphere_product_gauss: too few nodes");
  std::vector<double> zx;
  std::vector<double> zw;
  gauss_legendre(n_polar, zx, zw);
  SphericalQuadrature q;
  q.dimension = 3;
  q.scheme = QuadratureScheme::ProductGauss;
  const double dphi = 2.0 * kPi / n_azimuth;
  for (int i = 0; i < n_polar; ++i) {
    const double z = zx[static_cast<std::size_t>(i)];
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < n_azimuth; ++j) {
      // Half-step azimuth offset keeps nodes off the coordinate planes where kinks often sit.
      const double phi = dphi * (j + 0.5);
      Vec u(3);
      u << r * std::cos(phi), r * std::sin(phi), z;
      q.nodes.push_back(u);
      q.weights.push_back(zw[static_cast<std::size_t>(i)] * dphi);
    }
  }
  return q;
}

SphericalQuadrature monte_carlo_sphere(int n, std::size_t count, std::uint64_t seed) {
  if (n < 2 || count < 1) throw InputError("monte_carlo_sphere: need n >= 2 and at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  SphericalQuadrature q;
  q.dimension = n;
  q.scheme = QuadratureScheme::MonteCarlo;
  const double w = sphere_area(n) / static_cast<double>(count);
  q.nodes.reserve(count);
  while (q.nodes.size() < count) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = gauss(rng);
    const double len = u.norm();
    if (len < 1e-12) continue;
    q.nodes.push_back(u / len);
  }
  q.weights.assign(count, w);
  return q;
}

SphericalQuadrature quadrature_for(const MinkowskiNorm& norm, int level, std::uint64_t seed) {
  if (level < 0) throw InputError("quadrature level must be nonnegative");
  if (level > 12) throw InputError("quadrature level above 12 is not supported");
  const int n = norm.dimension();
  SphericalQuadrature q;
  if (n == 2) {
    const auto kinks = norm.kink_directions();
    if (kinks.empty()) {
      q = circle_trapezoid(static_cast<std::size_t>(256) << level);
    } else {
      q = circle_panels(kink_angles(kinks), 1 << level, 16);
    }
  } else if (n == 3) {
    q = sphere_product_gauss(8 << level, 16 << level);
  } else if (n >= 4) {
    q = monte_carlo_sphere(n, static_cast<std::size_t>(125000) << level, seed);
  } else {
    throw InputError("quadrature: dimension must be at least 2");
  }
  q.level = level;
  return q;
}

}  // namespace finsler
