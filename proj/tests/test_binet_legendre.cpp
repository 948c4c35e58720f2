#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "finsler/binet_legendre.hpp"

#include <cmath>
#include <random>

using namespace finsler;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

MinkowskiNorm square_norm() {
  return MinkowskiNorm::polytope_gauge({v2(1, 1), v2(-1, 1), v2(-1, -1), v2(1, -1)});
}
MinkowskiNorm diamond_norm() { return MinkowskiNorm::lp(2, 1.0); }

Mat random_pd(std::mt19937_64& rng, int n, double spread) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Mat> qr(a);
  const Mat q = qr.householderQ();
  std::uniform_real_distribution<double> ev(1.0, spread);
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = ev(rng);
  return q * d.asDiagonal() * q.transpose();
}

Mat random_invertible(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  do {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng) + (i == j ? 1.5 : 0.0);
  } while (std::abs(a.determinant()) < 0.3);
  return a;
}

// Test-only Monte Carlo oracle for int_body x_i x_j dx over a box, independent of the library.
template <class Inside>
Mat box_second_moments(int n, double half, Inside inside, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half, half);
  Mat acc = Mat::Zero(n, n);
  Vec p(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) p[i] = u(rng);
    if (inside(p)) acc += p * p.transpose();
  }
  return acc * std::pow(2.0 * half, n) / static_cast<double>(samples);
}

double max_generalized_eigen_deviation(const Mat& g1, const Mat& g2, double& lo, double& hi) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(g2, g1);
  lo = es.eigenvalues().minCoeff();
  hi = es.eigenvalues().maxCoeff();
  return std::max(std::abs(lo - 1.0), std::abs(hi - 1.0));
}

}  // namespace

TEST_CASE("quadrature weights and second moments") {
  std::vector<SphericalQuadrature> rules = {
      circle_trapezoid(64),
      circle_panels({0.1, 1.0, 2.5, 4.0}, 2, 16),
      circle_panels({}, 1, 16),
      sphere_product_gauss(16, 32),
  };
  for (const auto& q : rules) {
    CAPTURE(to_string(q.scheme));
    const int n = q.dimension;
    double sum = 0.0;
    Mat mom = Mat::Zero(n, n);
    for (std::size_t k = 0; k < q.size(); ++k) {
      sum += q.weights[k];
      mom += q.weights[k] * q.nodes[k] * q.nodes[k].transpose();
      CHECK(q.nodes[k].norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(std::abs(sum - sphere_area(n)) <= 1e-12 * sphere_area(n));
    CHECK((mom - sphere_area(n) / n * Mat::Identity(n, n)).norm() <= 1e-12);
  }
  const auto mc = monte_carlo_sphere(4, 200000, 3);
  double sum = 0.0;
  Mat mom = Mat::Zero(4, 4);
  for (std::size_t k = 0; k < mc.size(); ++k) {
    sum += mc.weights[k];
    mom += mc.weights[k] * mc.nodes[k] * mc.nodes[k].transpose();
  }
  CHECK(std::abs(sum - sphere_area(4)) <= 1e-10 * sphere_area(4));
  CHECK((mom - sphere_area(4) / 4 * Mat::Identity(4, 4)).norm() <= 0.02 * sphere_area(4));
}

TEST_CASE("gauss_legendre integrates polynomials exactly") {
  std::vector<double> x;
  std::vector<double> w;
  for (int order : {1, 2, 5, 16, 33}) {
    gauss_legendre(order, x, w);
    for (int deg = 0; deg <= 2 * order - 1; ++deg) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("dual_scalar_matrix closed forms") {
  // Oracle: int_square x^2 = 4/3 with area 4 and int_diamond x^2 = 1/3 with area 2, so
  // M* = (n+2)/lambda * int x x^T = (4/3) I and (2/3) I. The Monte Carlo pass below
  // cross-checks the two integrals without going through the radial reduction.
  const Mat sq_mc = box_second_moments(2, 1.0, [](const Vec&) { return true; }, 400000, 1);
  const Mat di_mc = box_second_moments(2, 1.0, [](const Vec& p) { return p.cwiseAbs().sum() <= 1.0; }, 400000, 2);
  CHECK(sq_mc(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(5e-3));
  CHECK(sq_mc(1, 1) == doctest::Approx(4.0 / 3.0).epsilon(5e-3));
  CHECK(di_mc(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(5e-3));
  CHECK(std::abs(di_mc(0, 1)) < 5e-3);

  const auto quad_sq = quadrature_for(square_norm(), 3);
  const auto quad_di = quadrature_for(diamond_norm(), 3);
  CHECK((dual_scalar_matrix(square_norm(), quad_sq).matrix() - 4.0 / 3.0 * Mat::Identity(2, 2)).norm() < 1e-12);
  CHECK((dual_scalar_matrix(diamond_norm(), quad_di).matrix() - 2.0 / 3.0 * Mat::Identity(2, 2)).norm() < 1e-12);
  for (int n : {2, 3}) {
    const auto e = MinkowskiNorm::euclidean(n);
    CHECK((dual_scalar_matrix(e, quadrature_for(e, 3)).matrix() - Mat::Identity(n, n)).norm() < 1e-12);
  }
}

TEST_CASE("bl_metric closed forms") {
  CHECK((bl_metric(square_norm(), quadrature_for(square_norm(), 3)).matrix() - 0.75 * Mat::Identity(2, 2)).norm() < 1e-12);
  CHECK((bl_metric(diamond_norm(), quadrature_for(diamond_norm(), 3)).matrix() - 1.5 * Mat::Identity(2, 2)).norm() < 1e-12);
  std::mt19937_64 rng(21);
  for (int n : {2, 3}) {
    const Mat g0 = random_pd(rng, n, 4.0);
    const auto e = MinkowskiNorm::euclidean(g0);
    CHECK(relative_frobenius(bl_metric(e, quadrature_for(e, 3)).matrix(), g0) < 1e-10);
  }
}

TEST_CASE("unit_ball_volume") {
  const auto e2 = MinkowskiNorm::euclidean(2);
  const auto e3 = MinkowskiNorm::euclidean(3);
  CHECK(unit_ball_volume(e2, quadrature_for(e2, 3)) == doctest::Approx(kPi).epsilon(1e-13));
  CHECK(unit_ball_volume(square_norm(), quadrature_for(square_norm(), 3)) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(unit_ball_volume(e3, quadrature_for(e3, 3)) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-13));
}

TEST_CASE("definiteness and quadrature failures") {
  const auto degenerate = MinkowskiNorm::custom(2, [](const Vec& x) { return std::max(0.0, x[0]); }, "degenerate");
  CHECK_THROWS_AS(dual_scalar_matrix(degenerate, circle_trapezoid(64)), DefinitenessError);
  CHECK_THROWS_AS(dual_scalar_matrix(MinkowskiNorm::euclidean(3), circle_trapezoid(64)), InputError);
  // A needle-shaped ball has a dual matrix conditioned beyond the 1e12 limit.
  Mat a(2, 2);
  a << 1e7, 0, 0, 1;
  const auto needle = linear_image(MinkowskiNorm::euclidean(2), a);
  CHECK_THROWS_AS(bl_metric(needle, quadrature_for(needle, 2)), NumericalError);
}

TEST_CASE("binet ellipsoid") {
  const auto e = MinkowskiNorm::euclidean(2);
  const auto be = binet_ellipsoid(e, quadrature_for(e, 3));
  CHECK((be.shape.matrix() - Mat::Identity(2, 2)).norm() < 1e-12);
  CHECK(be.scale == 1.0);

  const auto sq = binet_ellipsoid(square_norm(), quadrature_for(square_norm(), 3));
  // Isotropic with radius 1/sqrt(4/3).
  CHECK(sq.contains(v2(std::sqrt(3.0) / 2 - 1e-9, 0)));
  CHECK_FALSE(sq.contains(v2(std::sqrt(3.0) / 2 + 1e-9, 0)));

  std::mt19937_64 rng(4);
  const Mat a = random_invertible(rng, 2);
  const auto image = linear_image(square_norm(), a);
  const Mat recomputed = binet_ellipsoid(image, quadrature_for(image, 3)).shape.matrix();
  const Mat contravariant = a.inverse() * sq.shape.matrix() * a.inverse().transpose();
  CHECK(relative_frobenius(recomputed, contravariant) < 1e-10);
}

TEST_CASE("legendre ellipsoid") {
  const auto e = MinkowskiNorm::euclidean(3);
  const auto le = legendre_ellipsoid(e, quadrature_for(e, 3));
  CHECK(le.scale == doctest::Approx(1.0).epsilon(1e-12));

  for (const auto& body : {square_norm(), diamond_norm()}) {
    const auto quad = quadrature_for(body, 3);
    const auto leg = legendre_ellipsoid(body, quad);
    for (const Vec& theta : {v2(1, 0), v2(0, 1), v2(1, 1)}) {
      const double on_body = moment_of_inertia(body, theta, quad);
      const double on_ellipsoid = moment_of_inertia(leg, theta);
      CHECK(on_ellipsoid == doctest::Approx(on_body).epsilon(1e-10));
      const auto mc = moment_of_inertia_mc(body, theta, 400000, 77);
      CHECK(std::abs(mc.value - on_body) < 4.0 * mc.standard_error);
      const auto mc_l = moment_of_inertia_mc(leg, theta, 400000, 78);
      CHECK(std::abs(mc_l.value - on_ellipsoid) < 4.0 * mc_l.standard_error);
    }
    // kappa F has unit ball Omega / kappa, so the Legendre ellipsoid shrinks by 1/kappa.
    const double kappa = 2.7;
    const auto sc = scaled(body, kappa);
    const auto leg_k = legendre_ellipsoid(sc, quadrature_for(sc, 3));
    const Vec probe = v2(0.3, -0.8);
    const double radius = leg.scale / std::sqrt(leg.shape(probe, probe));
    const double radius_k = leg_k.scale / std::sqrt(leg_k.shape(probe, probe));
    CHECK(radius_k == doctest::Approx(radius / kappa).epsilon(1e-12));
  }
}

TEST_CASE("moment_of_inertia examples") {
  const auto disk = MinkowskiNorm::euclidean(2);
  CHECK(moment_of_inertia(disk, v2(1, 0), quadrature_for(disk, 3)) == doctest::Approx(kPi / 4).epsilon(1e-13));
  CHECK(moment_of_inertia(square_norm(), v2(1, 0), quadrature_for(square_norm(), 3)) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  const Ellipsoid unit_disk{MetricTensor(Mat::Identity(2, 2)), 1.0};
  CHECK(moment_of_inertia(unit_disk, v2(1, 0)) == doctest::Approx(kPi / 4).epsilon(1e-14));
}

TEST_CASE("GL equivariance, scaling and euclidean recovery") {
  std::mt19937_64 rng(99);
  std::vector<MinkowskiNorm> norms2 = {square_norm(), diamond_norm(), MinkowskiNorm::lp(2, 3.0),
                                       MinkowskiNorm::quartic_killing(2),
                                       MinkowskiNorm::weighted_sum(0.4, diamond_norm(), 0.6, MinkowskiNorm::euclidean(2))};
  std::vector<MinkowskiNorm> norms3 = {MinkowskiNorm::lp(3, 4.0), MinkowskiNorm::quartic_killing(3)};
  QuadratureOptions opts;
  for (const auto* set : {&norms2, &norms3}) {
    for (const auto& f : *set) {
      const int n = f.dimension();
      const Mat g = compute_bl(f, opts).metric.matrix();
      const Mat a = random_invertible(rng, n);
      const Mat ga = compute_bl(linear_image(f, a), opts).metric.matrix();
      CHECK(relative_frobenius(ga, a.transpose() * g * a) < 1e-6);
      const double kappa = 0.37;
      const Mat gk = compute_bl(scaled(f, kappa), opts).metric.matrix();
      CHECK(relative_frobenius(gk, kappa * kappa * g) < 1e-8);
    }
  }
}

TEST_CASE("bilipschitz sandwich and C0 stability") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<Vec> base = {v2(1, 0.2), v2(0.1, 1.3), v2(-0.8, 0.4), v2(-0.5, -0.9), v2(0.7, -0.6)};
  const auto f1 = MinkowskiNorm::polytope_gauge(base);
  const Mat g1 = compute_bl(f1).metric.matrix();
  for (int trial = 0; trial < 10; ++trial) {
    // Rescaling each vertex by r in [1/c, c] gives Omega_1 / c inside Omega_2 inside c Omega_1.
    const double c = 1.0 + 0.5 * unit(rng);
    std::vector<Vec> moved;
    for (const auto& v : base) moved.push_back(v * std::pow(c, 2.0 * unit(rng) - 1.0));
    const Mat g2 = compute_bl(MinkowskiNorm::polytope_gauge(moved)).metric.matrix();
    double lo = 0.0;
    double hi = 0.0;
    max_generalized_eigen_deviation(g1, g2, lo, hi);
    CHECK(lo >= std::pow(c, -4.0) * (1 - 1e-12));
    CHECK(hi <= std::pow(c, 4.0) * (1 + 1e-12));
  }
  for (double eps : {0.01, 0.05, 0.2}) {
    const double phase = unit(rng);
    const auto perturbed = MinkowskiNorm::custom(
        2,
        [f1, eps, phase](const Vec& x) {
          return f1.eval_unchecked(x) * (1.0 + eps * std::sin(5.0 * std::atan2(x[1], x[0]) + phase));
        },
        "perturbed");
    const auto quad = quadrature_for(f1, 4);
    const Mat ga = bl_metric(f1, quad).matrix();
    const Mat gb = bl_metric(perturbed, quad).matrix();
    double lo = 0.0;
    double hi = 0.0;
    const double distance = max_generalized_eigen_deviation(ga, gb, lo, hi);
    CHECK(distance <= std::pow((1 + eps) / (1 - eps), 4.0) - 1.0);
  }
}

TEST_CASE("convergence control") {
  const auto r = compute_bl(MinkowskiNorm::lp(2, 3.0));
  CHECK(r.converged);
  CHECK(r.achieved_tolerance < 1e-8);
  CHECK(r.scheme == QuadratureScheme::CircleTrapezoid);
  const auto p = compute_bl(square_norm());
  CHECK(p.scheme == QuadratureScheme::CirclePanels);
  CHECK(p.achieved_tolerance < 1e-12);
  const auto q3 = compute_bl(MinkowskiNorm::quartic_killing(3));
  CHECK(q3.converged);
  CHECK(q3.scheme == QuadratureScheme::ProductGauss);

  QuadratureOptions mc;
  mc.seed = 42;
  const auto r4 = compute_bl(MinkowskiNorm::euclidean(4), mc);
  CHECK(r4.scheme == QuadratureScheme::MonteCarlo);
  CHECK(r4.achieved_tolerance < 1e-3);
  CHECK(relative_frobenius(r4.metric.matrix(), Mat::Identity(4, 4)) < 5e-3);
  const auto again = compute_bl(MinkowskiNorm::euclidean(4), mc);
  CHECK(again.metric.matrix() == r4.metric.matrix());
}
