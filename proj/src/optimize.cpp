#include "finsler/optimize.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace finsler::opt {

std::pair<double, double> golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                                          double x_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > x_tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = f(xm);
  if (fm >= fc && fm >= fd) return {xm, fm};
  return fc > fd ? std::pair{c, fc} : std::pair{d, fd};
}

std::pair<Vec, double> nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start, double step,
                                   double f_tol, int max_iter) {
  const auto d = static_cast<std::size_t>(start.size());
  std::vector<Vec> simplex(d + 1, start);
  for (std::size_t i = 0; i < d; ++i) simplex[i + 1][static_cast<Eigen::Index>(i)] += step;
  std::vector<double> values(d + 1);
  for (std::size_t i = 0; i <= d; ++i) values[i] = f(simplex[i]);
  std::vector<std::size_t> order(d + 1);

  for (int iter = 0; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const double best = values[order.front()];
    const double worst = values[order.back()];
    if (worst - best <= f_tol * (std::abs(best) + 1e-300) + 1e-300) break;

    Vec centroid = Vec::Zero(start.size());
    for (std::size_t i = 0; i < d; ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(d);
    const std::size_t hi = order.back();
    const Vec reflected = centroid + (centroid - simplex[hi]);
    const double fr = f(reflected);
    if (fr < best) {
      const Vec expanded = centroid + 2.0 * (centroid - simplex[hi]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[hi] = expanded;
        values[hi] = fe;
      } else {
        simplex[hi] = reflected;
        values[hi] = fr;
      }
      continue;
    }
    if (fr < values[order[d - 1]]) {
      simplex[hi] = reflected;
      values[hi] = fr;
      continue;
    }
    const Vec contracted = centroid + 0.5 * (simplex[hi] - centroid);
    const double fc = f(contracted);
    if (fc < worst) {
      simplex[hi] = contracted;
      values[hi] = fc;
      continue;
    }
    const Vec& anchor = simplex[order.front()];
    for (std::size_t i = 1; i <= d; ++i) {
      const std::size_t k = order[i];
      simplex[k] = anchor + 0.5 * (simplex[k] - anchor);
      values[k] = f(simplex[k]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best]};
}

std::pair<Vec, double> sphere_local_maximize(const std::function<double(const Vec&)>& g, const Vec& start,
                                             double step, double f_tol) {
  const Eigen::Index n = start.size();
  const Vec u0 = start.normalized();
  // Orthonormal basis of the tangent plane at u0.
  Mat basis = Mat::Identity(n, n);
  basis.col(0) = u0;
  Eigen::HouseholderQR<Mat> qr(basis);
  const Mat q = qr.householderQ();
  const Mat tangent = q.rightCols(n - 1);
  auto chart = [&](const Vec& a) -> Vec { return (u0 + tangent * a).normalized(); };
  auto objective = [&](const Vec& a) { return -g(chart(a)); };
  const auto [arg, value] = nelder_mead(objective, Vec::Zero(n - 1), step, f_tol);
  return {chart(arg), -value};
}

}  // namespace finsler::opt
