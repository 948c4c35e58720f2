#include "finsler/core.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

namespace finsler {

double unit_ball_volume_euclidean(int n) {
  return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double sphere_area(int n) { return n * unit_ball_volume_euclidean(n); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          bool expected = false;
          if (failed.compare_exchange_strong(expected, true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<Vec> sphere_directions(int n, std::size_t count) {
  std::vector<Vec> out;
  out.reserve(count);
  if (n == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      out.push_back(circle_point(2.0 * kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(count)));
    }
    return out;
  }
  if (n == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(k);
      Vec u(3);
      u << r * std::cos(phi), r * std::sin(phi), z;
      out.push_back(u);
    }
    return out;
  }
  std::mt19937_64 rng(0x5eed5eedULL + static_cast<unsigned>(n));
  std::normal_distribution<double> gauss;
  while (out.size() < count) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = gauss(rng);
    const double len = u.norm();
    if (len > 1e-12) out.push_back(u / len);
  }
  return out;
}

Mat rotation2(double phi) {
  Mat r(2, 2);
  r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return r;
}

Mat rotation3(const Vec& axis, double phi) {
  const Eigen::Vector3d a = Eigen::Vector3d(axis[0], axis[1], axis[2]).normalized();
  return Eigen::AngleAxisd(phi, a).toRotationMatrix();
}

bool is_symmetric(const Mat& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

double condition_number(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lo = ev.cwiseAbs().minCoeff();
  const double hi = ev.cwiseAbs().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

double relative_frobenius(const Mat& a, const Mat& b) {
  const double denom = b.norm();
  return denom > 0.0 ? (a - b).norm() / denom : (a - b).norm();
}

}  // namespace finsler
