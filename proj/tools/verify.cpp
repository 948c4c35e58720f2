#include "verify.hpp"

#include "finsler/binet_legendre.hpp"
#include "finsler/manifold.hpp"
#include "finsler/minkowski.hpp"
#include "finsler/structure.hpp"

#include <algorithm>
#include <random>

namespace finsler::cli {

namespace {

constexpr const char* kProperties = "bl-properties";
constexpr const char* kEllipsoids = "ellipsoids";

Mat random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() + 0.5 * Mat::Identity(n, n);
}

Mat random_invertible(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  do {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng) + (i == j ? 1.5 : 0.0);
  } while (std::abs(a.determinant()) < 0.3 || condition_number(a) > 20.0);
  return a;
}

std::vector<MinkowskiNorm> norm_pool() {
  std::vector<Vec> hexagon;
  for (int k = 0; k < 6; ++k) hexagon.push_back(circle_point(k * kPi / 3.0 + 0.1));
  return {MinkowskiNorm::lp(2, 3.0),
          MinkowskiNorm::lp(2, INFINITY),
          MinkowskiNorm::lp(2, 1.0),
          MinkowskiNorm::polytope_gauge(hexagon),
          MinkowskiNorm::weighted_sum(1.0, MinkowskiNorm::euclidean(2), 0.5, MinkowskiNorm::lp(2, 1.0)),
          MinkowskiNorm::quartic_killing(2),
          MinkowskiNorm::quartic_killing(3),
          MinkowskiNorm::lp(3, 4.0)};
}

Mat metric_of(const MinkowskiNorm& f) { return compute_bl(f).metric.matrix(); }

double rel_diff(const Mat& a, const Mat& b) { return (a - b).norm() / b.norm(); }

// Generalized eigenvalues of the pencil (a, b), b positive definite.
Vec pencil_eigenvalues(const Mat& a, const Mat& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a, b);
  return es.eigenvalues();
}

// Smallest c with F2 / c <= F1 <= c F2 over a dense direction sample (times a small safety margin).
double bilipschitz_constant(const MinkowskiNorm& f1, const MinkowskiNorm& f2) {
  double c = 1.0;
  for (const Vec& u : sphere_directions(f1.dimension(), 20000)) {
    const double r = f2(u) / f1(u);
    c = std::max({c, r, 1.0 / r});
  }
  return c;
}

void add(std::vector<VerifyRow>& rows, const char* suite, std::string check, double residual, double tol) {
  rows.push_back({suite, std::move(check), residual, tol, residual <= tol});
}

void properties_suite(std::vector<VerifyRow>& rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto pool = norm_pool();

  // Smooth dependence: second differences of the metric along x1 scale like h^2 for a field that is
  // smooth in x although its norms have corners.
  {
    const FinslerStructure d = FinslerStructure::example_d();
    auto second_difference = [&](double h) {
      auto g = [&](double x1) {
        Vec x(2);
        x << x1, 0.0;
        return metric_of(d.norm_at(x));
      };
      return (g(0.5 + h) - 2.0 * g(0.5) + g(0.5 - h)).norm();
    };
    const double ratio = second_difference(0.02) / second_difference(0.01);
    add(rows, kProperties, "smoothness: second differences scale as h^2", std::abs(ratio / 4.0 - 1.0), 1e-2);
  }

  double riemannian = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Mat g0 = random_spd(rng, 2 + k % 2);
    riemannian = std::max(riemannian, rel_diff(metric_of(MinkowskiNorm::euclidean(g0)), g0));
  }
  add(rows, kProperties, "riemannian recovery g_F = g", riemannian, 1e-8);

  double equivariance = 0.0;
  for (int k = 0; k < 12; ++k) {
    const MinkowskiNorm& f = pool[static_cast<std::size_t>(k) % pool.size()];
    const Mat a = random_invertible(rng, f.dimension());
    const Mat expect = a.transpose() * metric_of(f) * a;
    equivariance = std::max(equivariance, rel_diff(metric_of(linear_image(f, a)), expect));
  }
  add(rows, kProperties, "automorphism equivariance g_{A*F} = A^T g_F A", equivariance, 1e-6);

  double conformal = 0.0;
  const FinslerStructure rotor = FinslerStructure::monochromatic_rotor(
      ChartBox(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)), MinkowskiNorm::lp(2, 3.0),
      ScalarField::sine(0.0, 0.5, 1.0, 0.0, 0));
  const ScalarField lambda = ScalarField::sine(1.0, 0.4, 2.0, 0.3, 1);
  const FinslerStructure rescaled = FinslerStructure::conformal_rescale(rotor, lambda);
  for (int k = 0; k < 6; ++k) {
    Vec x(2);
    x << 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0;
    const double l = lambda(x);
    conformal = std::max(conformal, rel_diff(metric_of(rescaled.norm_at(x)), l * l * metric_of(rotor.norm_at(x))));
  }
  for (int k = 0; k < 6; ++k) {
    const double kappa = std::exp(3.0 * unit(rng) - 1.5);
    const MinkowskiNorm& f = pool[static_cast<std::size_t>(k) % pool.size()];
    conformal = std::max(conformal, rel_diff(metric_of(scaled(f, kappa)), kappa * kappa * metric_of(f)));
  }
  add(rows, kProperties, "conformal change g_{lambda F} = lambda^2 g_F", conformal, 1e-8);

  double violation = 0.0;
  for (int k = 0; k < 8; ++k) {
    const MinkowskiNorm& f1 = pool[static_cast<std::size_t>(k) % pool.size()];
    const int n = f1.dimension();
    const MinkowskiNorm f2 = linear_image(
        MinkowskiNorm::weighted_sum(1.0, f1, 0.2 + unit(rng), MinkowskiNorm::euclidean(random_spd(rng, n))),
        Mat::Identity(n, n) + 0.1 * random_spd(rng, n));
    const double c = bilipschitz_constant(f1, f2);
    const Vec eig = pencil_eigenvalues(metric_of(f2), metric_of(f1));
    const double bound = std::pow(c, 2.0 * n);
    violation = std::max({violation, eig.maxCoeff() / bound - 1.0, 1.0 / (bound * eig.minCoeff()) - 1.0});
  }
  add(rows, kProperties, "bilipschitz sandwich c^-2n g_1 <= g_2 <= c^2n g_1", std::max(violation, 0.0), 0.0);

  double stability = 0.0;
  for (int k = 0; k < 6; ++k) {
    const MinkowskiNorm& f = pool[static_cast<std::size_t>(k) % pool.size()];
    const int n = f.dimension();
    const double eps = 0.01 + 0.09 * unit(rng);
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = 6.0 * unit(rng) - 3.0;
    const double phase = 2.0 * kPi * unit(rng);
    const MinkowskiNorm perturbed = MinkowskiNorm::custom(
        n, [f, w, eps, phase](const Vec& xi) { return f(xi) * (1.0 + eps * std::sin(w.dot(xi.normalized()) + phase)); },
        "perturbed");
    const Vec eig = pencil_eigenvalues(metric_of(perturbed), metric_of(f));
    const double distance = std::max(eig.maxCoeff() - 1.0, 1.0 - eig.minCoeff());
    const double bound = std::pow((1.0 + eps) / (1.0 - eps), 2.0 * n) - 1.0;
    stability = std::max(stability, distance / bound);
  }
  add(rows, kProperties, "C0 stability (distance / bound)", stability, 1.0);
}

void ellipsoids_suite(std::vector<VerifyRow>& rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> g;

  double identity = 0.0;
  for (int n : {2, 3}) identity = std::max(identity, rel_diff(metric_of(MinkowskiNorm::euclidean(n)), Mat::Identity(n, n)));
  add(rows, kEllipsoids, "unit ball moments give g = I", identity, 1e-10);

  double duality = 0.0;
  double inertia = 0.0;
  double mc_sigma = 0.0;
  const std::vector<MinkowskiNorm> bodies = {MinkowskiNorm::lp(2, INFINITY), MinkowskiNorm::lp(2, 1.0),
                                             MinkowskiNorm::lp(2, 3.0), MinkowskiNorm::quartic_killing(3)};
  for (const MinkowskiNorm& f : bodies) {
    const int n = f.dimension();
    const BLResult bl = compute_bl(f);
    duality = std::max(duality, (bl.dual.matrix() * bl.metric.matrix() - Mat::Identity(n, n)).norm());
    const SphericalQuadrature quad = quadrature_for(f, bl.level);
    const Ellipsoid legendre = legendre_ellipsoid(f, quad);
    for (int k = 0; k < 3; ++k) {
      Vec theta(n);
      for (int i = 0; i < n; ++i) theta[i] = g(rng);
      const double body = moment_of_inertia(f, theta, quad);
      inertia = std::max(inertia, std::abs(moment_of_inertia(legendre, theta) - body) / body);
      const MonteCarloEstimate mc = moment_of_inertia_mc(f, theta, 200000, rng());
      mc_sigma = std::max(mc_sigma, std::abs(mc.value - body) / mc.standard_error);
    }
  }
  add(rows, kEllipsoids, "Binet ellipsoid is dual to g (|M* G - I|)", duality, 1e-10);
  add(rows, kEllipsoids, "Legendre ellipsoid has the body's moments of inertia", inertia, 1e-8);
  add(rows, kEllipsoids, "Monte Carlo moments agree (standard errors)", mc_sigma, 5.0);
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {kProperties, kEllipsoids, "all"};
  return names;
}

std::string canonical_suite(const std::string& name) {
  if (name == "theorem-1.2") return kProperties;
  if (name == "appendix") return kEllipsoids;
  return name;
}

std::vector<VerifyRow> run_suite(const std::string& name, std::uint64_t seed) {
  const std::string suite = canonical_suite(name);
  std::vector<VerifyRow> rows;
  if (suite == kProperties || suite == "all") properties_suite(rows, seed);
  if (suite == kEllipsoids || suite == "all") ellipsoids_suite(rows, seed);
  if (rows.empty()) throw InputError("unknown suite '" + name + "' (expected bl-properties, ellipsoids or all)");
  return rows;
}

}  // namespace finsler::cli
