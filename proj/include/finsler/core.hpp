#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace finsler {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy. The CLI maps these onto exit codes 2 (input) and 3 (numerical).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotImplementedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr double kPi = 3.14159265358979323846;

// Below this euclidean length a vector counts as zero for definiteness checks.
inline constexpr double kZeroVectorThreshold = 1e-30;

/// Volume of the euclidean unit ball in R^n.
double unit_ball_volume_euclidean(int n);

/// Surface measure of S^{n-1}.
double sphere_area(int n);

/// Neumaier-compensated accumulator; result does not depend on summand magnitudes ordering noise.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Runs body(i) for i in [0, count) on a small pool of std::threads.
/// Each index is processed exactly once; callers write to disjoint slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Quasi-uniform points on S^{n-1}: Fibonacci spiral for n = 3, uniform angles for n = 2,
/// deterministic normalized Gaussians otherwise.
std::vector<Vec> sphere_directions(int n, std::size_t count);

/// Unit vector at angle phi in the plane.
inline Vec circle_point(double phi) {
  Vec u(2);
  u << std::cos(phi), std::sin(phi);
  return u;
}

/// Rotation of R^2 by angle phi.
Mat rotation2(double phi);

/// Rotation of R^3 by angle phi about a (not necessarily unit) axis.
Mat rotation3(const Vec& axis, double phi);

/// Symmetric positive definite check with a relative symmetry tolerance.
bool is_symmetric(const Mat& m, double rel_tol = 1e-12);

/// 2-norm condition number of a symmetric matrix.
double condition_number(const Mat& m);

/// Relative Frobenius distance ||a - b|| / ||b||.
double relative_frobenius(const Mat& a, const Mat& b);

}  // namespace finsler
