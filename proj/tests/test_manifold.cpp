#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "finsler/manifold.hpp"

#include <cmath>

using namespace finsler;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

ChartBox square_box() { return ChartBox(v2(-1, -1), v2(1, 1)); }
MinkowskiNorm square_norm() { return MinkowskiNorm::lp(2, INFINITY); }

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<Vec> rectangle(double x0, double y0, double x1, double y1, int per_side) {
  std::vector<Vec> corners = {v2(x0, y0), v2(x1, y0), v2(x1, y1), v2(x0, y1), v2(x0, y0)};
  std::vector<Vec> path = {corners[0]};
  for (int s = 0; s < 4; ++s) {
    for (int k = 1; k <= per_side; ++k) {
      const double t = static_cast<double>(k) / per_side;
      path.push_back((1.0 - t) * corners[static_cast<std::size_t>(s)] + t * corners[static_cast<std::size_t>(s) + 1]);
    }
  }
  return path;
}

// G = exp(2 phi) I with phi = c x1^2, sampled directly (no Binet-Legendre step).
MetricField gaussian_conformal(double c, int grid) {
  return MetricField::from_function(Lattice::uniform(square_box(), grid),
                                    [c](const Vec& x) -> Mat { return std::exp(2.0 * c * x[0] * x[0]) * Mat::Identity(2, 2); });
}

}  // namespace

TEST_CASE("lattice indexing") {
  Lattice lat(ChartBox(v3(0, 0, 0), v3(1, 2, 3)), {4, 5, 6});
  CHECK(lat.size() == 120);
  CHECK(lat.spacing(1) == doctest::Approx(0.5));
  for (std::size_t i : {0u, 7u, 63u, 119u}) CHECK(lat.flat_index(lat.multi_index(i)) == i);
  CHECK(lat.multi_index(1) == std::vector<int>{1, 0, 0});
  CHECK((lat.node(119) - v3(1, 2, 3)).norm() == 0.0);
  CHECK_THROWS_AS(Lattice(square_box(), {3, 8}), InputError);
}

// Quadratics are exact away from the two boundary cells, where ghost nodes are linear extrapolations.
TEST_CASE("metric field interpolation reproduces quadratics and rejects indefinite tensors") {
  auto fn = [](const Vec& x) -> Mat {
    Mat g(2, 2);
    g << 2 + x[0] * x[0], 0.3 * x[0] * x[1], 0.3 * x[0] * x[1], 3 + x[1] - 0.5 * x[1] * x[1];
    return g;
  };
  const MetricField f = MetricField::from_function(Lattice::uniform(square_box(), 9), fn);
  for (const Vec& x : {v2(0.1, -0.2), v2(-0.43, 0.61), v2(0.0, 0.0)}) {
    Mat g;
    std::vector<Mat> dg;
    f.evaluate(x, g, dg);
    CHECK(max_abs(g - fn(x)) < 1e-12);
    Mat d0(2, 2);
    d0 << 2 * x[0], 0.3 * x[1], 0.3 * x[1], 0;
    CHECK(max_abs(dg[0] - d0) < 1e-12);
  }
  CHECK_THROWS_AS(MetricField::from_function(Lattice::uniform(square_box(), 5),
                                             [](const Vec& x) -> Mat { return x[0] * Mat::Identity(2, 2); }),
                  NumericalError);
  CHECK_THROWS_AS(f(v2(1.5, 0)), InputError);
}

TEST_CASE("bl_field of constant and example (d) structures") {
  const auto c = FinslerStructure::constant_minkowski(square_box(), square_norm());
  const MetricField fc = bl_field(c, Lattice::uniform(square_box(), 5));
  for (const Mat& g : fc.values()) CHECK(max_abs(g - 0.75 * Mat::Identity(2, 2)) < 1e-10);

  const auto d = FinslerStructure::example_d();
  const Lattice lat = Lattice::uniform(d.chart(), 13);
  const MetricField fd = bl_field(d, lat);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const Mat& g = fd.values()[i];
    const double a = 0.5 * g.trace();
    CHECK(max_abs(g - a * Mat::Identity(2, 2)) < 1e-6);
    const double x1 = lat.node(i)[0];
    if (x1 <= 0.0) CHECK(a == doctest::Approx(1.5).epsilon(1e-8));
    if (x1 >= 1.0) CHECK(a == doctest::Approx(1.0).epsilon(1e-8));
  }
  // Lipschitz in x: neighbour differences shrink with the spacing.
  auto max_jump = [&](int grid) {
    const Lattice l = Lattice::uniform(d.chart(), grid);
    const MetricField f = bl_field(d, l);
    double jump = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) {
      auto idx = l.multi_index(i);
      if (idx[0] + 1 >= grid) continue;
      ++idx[0];
      jump = std::max(jump, max_abs(f.values()[l.flat_index(idx)] - f.values()[i]));
    }
    return jump / l.spacing(0);
  };
  const double coarse = max_jump(13);
  const double fine = max_jump(25);
  CHECK(coarse < 3.0);
  CHECK(fine < 3.0);
  CHECK(fine == doctest::Approx(coarse).epsilon(0.3));
}

TEST_CASE("conformal rescale and conformal factor recovery") {
  const auto base = FinslerStructure::constant_minkowski(square_box(), MinkowskiNorm::lp(2, 3));
  const ScalarField lambda = ScalarField::sine(1.0, 0.3, 1.0, 0.2, 0);
  const auto scaled_s = FinslerStructure::conformal_rescale(base, lambda);
  const Lattice lat = Lattice::uniform(square_box(), 9);
  const MetricField fa = bl_field(scaled_s, lat);
  const MetricField fb = bl_field(base, lat);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double l = lambda(lat.node(i));
    CHECK(max_abs(fa.values()[i] - l * l * fb.values()[i]) < 1e-6);
  }
  const ConformalFactorResult r = conformal_factor(fa, fb);
  CHECK(r.conformal);
  for (std::size_t i = 0; i < lat.size(); ++i) CHECK(std::abs(r.lambda[i] - lambda(lat.node(i))) < 1e-5);
  const ConformalFactorResult same = conformal_factor(fb, fb);
  CHECK(same.residual == 0.0);
  for (double l : same.lambda) CHECK(l == doctest::Approx(1.0));

  const auto other = FinslerStructure::example_d(square_box());
  const auto moved = FinslerStructure::moving_polygon(square_box(), {v2(1, 0), v2(0, 1), v2(-1, 0.2), v2(0, -1)},
                                                      {0.1 * Mat::Identity(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2),
                                                       0.1 * Mat::Identity(2, 2)});
  CHECK_FALSE(conformal_factor(bl_field(moved, lat), bl_field(other, lat)).conformal);
  Mat shear(2, 2);
  shear << 1.0, 0.6, 0.0, 1.5;
  const auto rotor = FinslerStructure::monochromatic_rotor(square_box(), square_norm(), ScalarField::sine(0, 0.5, 1, 0, 0));
  const auto anisotropic = FinslerStructure::constant_minkowski(square_box(), linear_image(square_norm(), shear));
  const ConformalFactorResult apart = conformal_factor(bl_field(rotor, lat), bl_field(anisotropic, lat));
  CHECK_FALSE(apart.conformal);
  CHECK(apart.residual > 0.1);
  CHECK_THROWS_AS(conformal_factor(fa, bl_field(base, Lattice::uniform(square_box(), 5))), InputError);
}

TEST_CASE("christoffel symbols") {
  const MetricField flat = MetricField::from_function(Lattice::uniform(square_box(), 9),
                                                      [](const Vec&) -> Mat { return 0.75 * Mat::Identity(2, 2); });
  for (const Mat& g : christoffel(flat, v2(0.2, -0.3))) CHECK(max_abs(g) < 1e-14);

  // G = exp(x1) I, phi = x1 / 2: Gamma^k_ij = d^k_i phi_j + d^k_j phi_i - d_ij phi_k.
  auto error_at = [](int grid) {
    const MetricField f = MetricField::from_function(Lattice::uniform(square_box(), grid),
                                                     [](const Vec& x) -> Mat { return std::exp(x[0]) * Mat::Identity(2, 2); });
    const Vec dphi = v2(0.5, 0.0);
    double err = 0.0;
    for (const Vec& x : {v2(0.13, 0.21), v2(-0.37, 0.05), v2(0.41, -0.44)}) {
      const Christoffel g = christoffel(f, x);
      for (int k = 0; k < 2; ++k) {
        CHECK(max_abs(g[static_cast<std::size_t>(k)] - g[static_cast<std::size_t>(k)].transpose()) < 1e-14);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            const double expect = (k == i) * dphi[j] + (k == j) * dphi[i] - (i == j) * dphi[k];
            err = std::max(err, std::abs(g[static_cast<std::size_t>(k)](i, j) - expect));
          }
      }
    }
    return err;
  };
  const double coarse = error_at(17);
  const double fine = error_at(33);
  CHECK(fine < 1e-3);
  CHECK(coarse / fine > 3.0);
  CHECK_THROWS_AS(christoffel(flat, v2(0.9, 0.0)), InputError);
}

TEST_CASE("parallel transport on constant fields is the identity") {
  const auto s = FinslerStructure::constant_minkowski(square_box(), square_norm());
  const MetricField f = bl_field(s, Lattice::uniform(square_box(), 9));
  const auto path = rectangle(-0.4, -0.3, 0.5, 0.2, 4);
  Mat frame(2, 2);
  frame << 1, 0.3, -0.2, 2;
  const TransportResult r = parallel_transport(f, path, frame);
  CHECK(max_abs(r.transported_frame - frame) < 1e-14);
  for (const Mat& p : r.propagators) CHECK(max_abs(p - Mat::Identity(2, 2)) < 1e-14);
  CHECK(r.propagators.size() == path.size());
}

TEST_CASE("holonomy of a conformally flat metric matches the curvature integral") {
  // Rotation angle of transport around a counter-clockwise loop = integral of K dA = -2 c area.
  const double c = 0.3;
  const double x0 = -0.5, y0 = -0.3, x1 = 0.5, y1 = 0.4;
  const double expect = -2.0 * c * (x1 - x0) * (y1 - y0);
  auto angle_error = [&](int grid) {
    const TransportResult r = parallel_transport(gaussian_conformal(c, grid), rectangle(x0, y0, x1, y1, 8), Mat::Identity(2, 2));
    const Mat& p = r.transported_frame;
    CHECK(max_abs(p.transpose() * p - Mat::Identity(2, 2)) < 1e-6);
    CHECK(r.gram_residual < 1e-9);
    return std::abs(std::atan2(p(1, 0), p(0, 0)) - expect);
  };
  const double coarse = angle_error(33);
  const double fine = angle_error(65);
  CHECK(fine < 1e-3 * std::abs(expect));
  CHECK(coarse / fine > 3.5);
}

TEST_CASE("transport reversal and metric preservation") {
  const MetricField f = bl_field(FinslerStructure::example_d(), Lattice::uniform(FinslerStructure::default_example_d_chart(), 25));
  std::vector<Vec> path = {v2(-0.5, -0.3), v2(0.2, 0.1), v2(0.9, -0.2), v2(1.3, 0.4)};
  const TransportResult there = parallel_transport(f, path, Mat::Identity(2, 2));
  std::vector<Vec> back(path.rbegin(), path.rend());
  const TransportResult home = parallel_transport(f, back, there.transported_frame);
  CHECK(max_abs(home.transported_frame - Mat::Identity(2, 2)) < 1e-8);
  CHECK(there.gram_residual < 1e-9);
  const Mat g0 = f(path.front());
  const Mat g1 = f(path.back());
  const Mat& p = there.transported_frame;
  CHECK(max_abs(p.transpose() * g1 * p - g0) < 1e-8);
}

TEST_CASE("transport raises an accuracy error when the step budget cannot meet the Gram bound") {
  const MetricField f = gaussian_conformal(3.0, 17);
  TransportOptions tight;
  tight.max_doublings = 0;
  tight.gram_bound = 1e-14;
  CHECK_THROWS_AS(parallel_transport(f, rectangle(-0.6, -0.6, 0.6, 0.6, 1), Mat::Identity(2, 2), tight), AccuracyError);
}

TEST_CASE("berwald defect") {
  const auto c = FinslerStructure::constant_minkowski(square_box(), square_norm());
  CHECK(berwald_defect(c).defect <= 1e-6);
  CHECK(berwald_defect(FinslerStructure::example_d()).defect >= 1e-2);

  const auto varying = FinslerStructure::monochromatic_rotor(square_box(), square_norm(), ScalarField::sine(0, 0.5, 1, 0, 0));
  const auto fixed = FinslerStructure::monochromatic_rotor(square_box(), square_norm(), ScalarField::constant(0.4));
  CHECK(berwald_defect(varying).defect > 1e-2);
  CHECK(berwald_defect(fixed).defect <= 1e-6);

  BerwaldOptions bad;
  bad.loops = {{v2(0, 0), v2(0.1, 0), v2(0.1, 0.1)}};
  CHECK_THROWS_AS(berwald_defect(c, bad), InputError);
}

TEST_CASE("local Minkowski verdicts") {
  const ChartBox box = square_box();
  const auto negative = {
      FinslerStructure::example_d(),
      FinslerStructure::monochromatic_rotor(box, square_norm(), ScalarField::sine(0, 0.5, 1, 0, 0)),
      FinslerStructure::conformal_rescale(FinslerStructure::constant_minkowski(box, square_norm()),
                                          ScalarField::sine(1, 0.3, 1, 0, 0)),
      FinslerStructure::moving_polygon(box, {v2(1, 0), v2(0, 1), v2(-1, 0.2), v2(0, -1)},
                                       {0.1 * Mat::Identity(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2), 0.1 * Mat::Identity(2, 2)}),
  };
  for (const auto& s : negative) {
    const LocalMinkowskiResult r = is_locally_minkowski(s);
    CHECK_FALSE(r.locally_minkowski);
    CHECK(r.verdict == "not locally Minkowski");
  }
  const auto positive = {
      FinslerStructure::constant_minkowski(box, square_norm()),
      FinslerStructure::holonomy_extension(box, MinkowskiNorm::lp(2, 3)),
      FinslerStructure::holonomy_extension(ChartBox(v2(0.5, -1), v2(1.5, 1)), MinkowskiNorm::lp(2, 3),
                                           FinslerStructure::ChartMap::Polar),
  };
  for (const auto& s : positive) {
    const LocalMinkowskiResult r = is_locally_minkowski(s);
    CHECK(r.locally_minkowski);
    CHECK(r.verdict == "locally Minkowski");
    CHECK(r.max_gram_residual < 1e-9);
  }
}

TEST_CASE("extrapolated curvature removes the discretisation residual of a flat polar chart") {
  const auto polar = FinslerStructure::holonomy_extension(ChartBox(v2(0.5, -1), v2(1.5, 1)), MinkowskiNorm::lp(2, 3),
                                                          FinslerStructure::ChartMap::Polar);
  BerwaldOptions o;
  const MetricField f = bl_field(polar, berwald_lattice(polar, o), o.quad);
  const double plain = flat_residual(f, false);
  const double extrapolated = flat_residual(f, true);
  CHECK(extrapolated < 1e-4);
  CHECK(plain > 10.0 * extrapolated);
  // A curved field keeps an O(1) residual either way: K = -exp(-2 phi) * 2c for phi = c x1^2.
  CHECK(flat_residual(gaussian_conformal(0.3, 33), true) > 0.1);
}

TEST_CASE("3D structures") {
  const ChartBox box(v3(-1, -1, -1), v3(1, 1, 1));
  const auto c = FinslerStructure::constant_minkowski(box, MinkowskiNorm::quartic_killing(3));
  CHECK(is_locally_minkowski(c).locally_minkowski);
  const auto rotor = FinslerStructure::monochromatic_rotor(box, MinkowskiNorm::quartic_killing(3),
                                                           ScalarField::sine(0, 0.5, 1, 0, 2), v3(1, 0, 0));
  const LocalMinkowskiResult r = is_locally_minkowski(rotor);
  CHECK(r.flat_residual < 1e-8);
  CHECK(r.berwald_defect > 1e-2);
  CHECK_FALSE(r.locally_minkowski);
}

TEST_CASE("rigid motions act equivariantly") {
  const auto d = FinslerStructure::example_d();
  Mat rot = rotation2(M_PI / 2.0);
  const Vec b = v2(0.5, 0.0);
  const auto moved = FinslerStructure::rigid_motion(d, rot, b, ChartBox(v2(-0.9, -0.9), v2(0.9, 0.9)));
  for (const Vec& x : {v2(0.1, 0.2), v2(-0.7, 0.4), v2(0.3, -0.8)}) {
    const Mat g = compute_bl(moved.norm_at(x)).metric.matrix();
    const Mat g_base = compute_bl(d.norm_at(rot * x + b)).metric.matrix();
    CHECK(max_abs(g - rot.transpose() * g_base * rot) < 1e-6);
  }
  CHECK_FALSE(is_locally_minkowski(moved).locally_minkowski);
  const auto moved_const = FinslerStructure::rigid_motion(FinslerStructure::constant_minkowski(square_box(), square_norm()),
                                                          rotation2(0.3), v2(0.1, -0.1), ChartBox(v2(-0.5, -0.5), v2(0.5, 0.5)));
  CHECK(is_locally_minkowski(moved_const).locally_minkowski);
}

TEST_CASE("structure JSON round trip") {
  const ChartBox box = square_box();
  const std::vector<FinslerStructure> all = {
      FinslerStructure::constant_minkowski(box, MinkowskiNorm::lp(2, 3)),
      FinslerStructure::example_d(),
      FinslerStructure::monochromatic_rotor(box, square_norm(), ScalarField::sine(0.1, 0.5, 2, 0.3, 1)),
      FinslerStructure::conformal_rescale(FinslerStructure::constant_minkowski(box, square_norm()),
                                          ScalarField::exponential(0.2, 0.3, 0)),
      FinslerStructure::holonomy_extension(ChartBox(v2(0.5, -1), v2(1.5, 1)), MinkowskiNorm::lp(2, 3),
                                           FinslerStructure::ChartMap::Polar),
      FinslerStructure::moving_polygon(box, {v2(1, 0), v2(0, 1), v2(-1, 0.2), v2(0, -1)},
                                       {0.1 * Mat::Identity(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2), 0.1 * Mat::Identity(2, 2)}),
      FinslerStructure::rigid_motion(FinslerStructure::example_d(), rotation2(M_PI / 2.0), v2(0.5, 0.0),
                                     ChartBox(v2(-0.9, -0.9), v2(0.9, 0.9))),
      FinslerStructure::conformal_rescale(FinslerStructure::constant_minkowski(box, square_norm()),
                                          ScalarField::affine(1.5, v2(0.2, -0.1))),
  };
  for (const auto& s : all) {
    const auto j = s.to_json();
    const FinslerStructure back = structure_from_json(j);
    CHECK(back.family() == s.family());
    CHECK(back.to_json() == j);
    for (const Vec& x : {v2(0.6, 0.1), v2(0.8, -0.5)}) {
      for (const Vec& xi : {v2(1, 0), v2(0.3, -0.7)}) CHECK(back(x, xi) == doctest::Approx(s(x, xi)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(structure_from_json(nlohmann::json::parse(R"({"chart": {"lower": [0], "upper": [1]}})")), InputError);
  CHECK_THROWS_AS(structure_from_json(nlohmann::json::parse(R"({"chart": {"lower": [0,0], "upper": [1,1]},
                                                                "field": {"family": "unknown"}})")),
                  InputError);
  CHECK_THROWS_AS(FinslerStructure::example_d().norm_at(v2(5, 0)), InputError);
}
