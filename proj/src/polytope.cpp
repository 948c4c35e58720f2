#include "finsler/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace finsler {

namespace {

double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

// Andrew's monotone chain; returns hull in counter-clockwise order without collinear points.
std::vector<Vec> planar_hull(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  if (pts.size() < 3) return pts;
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-14 * scale * scale;
  std::vector<Vec> hull(2 * pts.size());
  std::size_t k = 0;
  auto turn = [](const Vec& o, const Vec& a, const Vec& b) { return cross2(a - o, b - o); };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], pts[i]) <= eps) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && turn(hull[k - 2], hull[k - 1], pts[i - 1]) <= eps) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

PolytopeGauge::PolytopeGauge(std::vector<Vec> vertices) : input_(std::move(vertices)) {
  if (input_.empty()) throw InputError("polytope gauge: no vertices");
  dim_ = static_cast<int>(input_.front().size());
  if (dim_ < 2) throw InputError("polytope gauge: dimension must be at least 2");
  for (const auto& v : input_) {
    if (v.size() != dim_) throw InputError("polytope gauge: vertices of mixed dimension");
    if (!v.allFinite()) throw InputError("polytope gauge: non-finite vertex");
  }
  if (static_cast<int>(input_.size()) < dim_ + 1) {
    throw InputError("polytope gauge: need at least n+1 vertices for a full-dimensional hull");
  }
  if (dim_ == 2) {
    build_planar();
  } else {
    build_general();
  }
}

void PolytopeGauge::build_planar() {
  hull_ = planar_hull(input_);
  if (hull_.size() < 3) throw InputError("polytope gauge: vertices are collinear");
  double scale = 0.0;
  for (const auto& v : hull_) scale = std::max(scale, v.norm());
  const std::size_t m = hull_.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Vec& a = hull_[k];
    const Vec& b = hull_[(k + 1) % m];
    // Origin strictly left of every counter-clockwise edge <=> origin interior.
    if (cross2(a, b) <= 1e-12 * scale * scale) {
      throw InputError("polytope gauge: origin is not in the interior of the hull");
    }
  }
  // Rotate so the vertex of smallest polar angle comes first; angles then increase.
  std::vector<double> raw(m);
  for (std::size_t k = 0; k < m; ++k) raw[k] = std::atan2(hull_[k][1], hull_[k][0]);
  const auto first = static_cast<std::size_t>(std::min_element(raw.begin(), raw.end()) - raw.begin());
  std::rotate(hull_.begin(), hull_.begin() + static_cast<std::ptrdiff_t>(first), hull_.end());
  std::rotate(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(first), raw.end());
  angles_.resize(m);
  angles_[0] = raw[0];
  for (std::size_t k = 1; k < m; ++k) {
    double a = raw[k];
    while (a <= angles_[k - 1]) a += 2.0 * kPi;
    angles_[k] = a;
  }
  facets_.clear();
  for (std::size_t k = 0; k < m; ++k) {
    const Vec& a = hull_[k];
    const Vec& b = hull_[(k + 1) % m];
    Eigen::Matrix2d sys;
    sys << a[0], a[1], b[0], b[1];
    const Eigen::Vector2d cov = sys.inverse() * Eigen::Vector2d::Ones();
    Vec c(2);
    c << cov[0], cov[1];
    facets_.push_back(c);
  }
}

void PolytopeGauge::build_general() {
  const std::size_t m = input_.size();
  const int n = dim_;
  {
    Mat diffs(static_cast<Eigen::Index>(m - 1), n);
    for (std::size_t j = 1; j < m; ++j) diffs.row(static_cast<Eigen::Index>(j - 1)) = (input_[j] - input_[0]).transpose();
    Eigen::FullPivLU<Mat> lu(diffs);
    lu.setThreshold(1e-12);
    if (lu.rank() < n) throw InputError("polytope gauge: vertices do not span a full-dimensional hull");
  }
  double scale = 0.0;
  for (const auto& v : input_) scale = std::max(scale, v.norm());

  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  bool origin_interior = true;
  for (;;) {
    Mat d(n - 1, n);
    for (int r = 1; r < n; ++r) d.row(r - 1) = (input_[idx[static_cast<std::size_t>(r)]] - input_[idx[0]]).transpose();
    Eigen::FullPivLU<Mat> lu(d);
    lu.setThreshold(1e-12);
    if (lu.rank() == n - 1) {
      Vec normal = lu.kernel().col(0);
      normal.normalize();
      double offset = normal.dot(input_[idx[0]]);
      const double tol = 1e-10 * std::max(scale, 1e-300);
      bool all_below = true;
      bool all_above = true;
      for (const auto& v : input_) {
        const double s = normal.dot(v) - offset;
        if (s > tol) all_below = false;
        if (s < -tol) all_above = false;
      }
      if (all_above && !all_below) {
        normal = -normal;
        offset = -offset;
        all_below = true;
      }
      if (all_below) {
        if (offset <= tol) {
          origin_interior = false;
        } else {
          Vec cov = normal / offset;
          const bool seen = std::any_of(facets_.begin(), facets_.end(), [&](const Vec& f) {
            return (f - cov).norm() <= 1e-9 * cov.norm();
          });
          if (!seen) facets_.push_back(cov);
        }
      }
    }
    // Next n-combination of [0, m).
    int pos = n - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - static_cast<std::size_t>(n - pos)) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int r = pos + 1; r < n; ++r) idx[static_cast<std::size_t>(r)] = idx[static_cast<std::size_t>(r - 1)] + 1;
  }
  if (!origin_interior || facets_.empty()) {
    throw InputError("polytope gauge: origin is not in the interior of the hull");
  }
  for (const auto& v : input_) {
    int touching = 0;
    for (const auto& f : facets_) {
      if (std::abs(f.dot(v) - 1.0) <= 1e-9) ++touching;
    }
    if (touching >= n) hull_.push_back(v);
  }
}

double PolytopeGauge::eval(const Vec& xi) const {
  if (xi.norm() < kZeroVectorThreshold) return 0.0;
  if (dim_ == 2) {
    double phi = std::atan2(xi[1], xi[0]);
    if (phi < angles_[0]) phi += 2.0 * kPi;
    const auto it = std::upper_bound(angles_.begin(), angles_.end(), phi);
    const std::size_t m = facets_.size();
    const std::size_t k = it == angles_.begin() ? m - 1 : static_cast<std::size_t>(it - angles_.begin()) - 1;
    // The located edge carries the maximum; its neighbours guard against rounding at vertex rays.
    double best = facets_[k].dot(xi);
    best = std::max(best, facets_[(k + 1) % m].dot(xi));
    best = std::max(best, facets_[(k + m - 1) % m].dot(xi));
    return best;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& f : facets_) best = std::max(best, f.dot(xi));
  return best;
}

double PolytopeGauge::support(const Vec& theta) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : hull_) best = std::max(best, theta.dot(v));
  return best;
}

double gauge_of_polytope(const std::vector<Vec>& vertices, const Vec& xi) {
  const PolytopeGauge gauge(vertices);
  if (xi.size() != gauge.dimension()) throw InputError("gauge_of_polytope: dimension mismatch");
  return gauge.eval(xi);
}

}  // namespace finsler
