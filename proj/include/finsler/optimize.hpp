#pragma once

#include "finsler/core.hpp"

#include <functional>
#include <utility>

namespace finsler::opt {

/// Golden-section search for a maximum of a unimodal f on [lo, hi]. Returns (argmax, max).
std::pair<double, double> golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                                          double x_tol = 1e-12);

/// Nelder-Mead minimization in R^d. Stops when the simplex function spread falls below f_tol
/// relative to |f| (plus an absolute floor) or after max_iter iterations.
std::pair<Vec, double> nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start, double step,
                                   double f_tol = 1e-13, int max_iter = 2000);

/// Maximizes g over S^{n-1} near `start` using Nelder-Mead in the tangent-plane chart
/// u(a) = normalize(start + E a). Returns (unit argmax, max).
std::pair<Vec, double> sphere_local_maximize(const std::function<double(const Vec&)>& g, const Vec& start,
                                             double step, double f_tol = 1e-13);

}  // namespace finsler::opt
