#include "finsler/examples.hpp"

#include "finsler/json_io.hpp"
#include "finsler/minkowski.hpp"
#include "finsler/structure.hpp"

#include <cmath>

namespace finsler {

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

std::vector<BuiltinExample> make_examples() {
  const ChartBox square_chart(v2(-1, -1), v2(1, 1));
  const MinkowskiNorm square = MinkowskiNorm::lp(2, INFINITY);
  std::vector<Vec> hexagon;
  for (int k = 0; k < 6; ++k) hexagon.push_back(circle_point(k * kPi / 3.0));
  Mat shear(2, 2);
  shear << 1.0, 0.6, 0.0, 1.5;
  const std::vector<Vec> polygon = {v2(1, 0), v2(0, 1), v2(-1, 0.2), v2(0, -1)};
  const std::vector<Mat> polygon_motion = {0.1 * Mat::Identity(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2),
                                           0.1 * Mat::Identity(2, 2)};

  std::vector<BuiltinExample> out;
  auto norm = [&](std::string name, std::string formula, std::string note, const MinkowskiNorm& f) {
    out.push_back({std::move(name), "norm", std::move(formula), std::move(note), f.to_json()});
  };
  auto structure = [&](std::string name, std::string formula, std::string note, const FinslerStructure& s) {
    out.push_back({std::move(name), "structure", std::move(formula), std::move(note), s.to_json()});
  };

  norm("euclidean", "|xi|", "Riemannian point: metric I, mu = M = 1", MinkowskiNorm::euclidean(2));
  norm("square", "max(|xi1|, |xi2|)", "closed form G = 0.75 I", square);
  norm("diamond", "|xi1| + |xi2|", "closed form G = 1.5 I", MinkowskiNorm::lp(2, 1.0));
  norm("l3-plane", "(|xi1|^3 + |xi2|^3)^(1/3)", "smooth non-Riemannian planar norm", MinkowskiNorm::lp(2, 3.0));
  norm("hexagon", "gauge of the regular hexagon with unit vertices", "polytope with dihedral symmetry, G a multiple of I",
       MinkowskiNorm::polytope_gauge(hexagon));
  norm("triangle", "gauge of the triangle (1,0), (-0.5,0.8), (-0.5,-0.8)", "asymmetric norm",
       MinkowskiNorm::polytope_gauge({v2(1, 0), v2(-0.5, 0.8), v2(-0.5, -0.8)}));
  norm("sheared-square", "max(|xi1 + 0.6 xi2|, |1.5 xi2|)", "linear image: G transforms as A^T G A",
       linear_image(square, shear));
  norm("euclidean-plus-diamond", "|xi| + |xi1| + |xi2|", "weighted sum of a smooth and a polytope norm",
       MinkowskiNorm::weighted_sum(1.0, MinkowskiNorm::euclidean(2), 1.0, MinkowskiNorm::lp(2, 1.0)));
  norm("quartic-killing", "((xi1^2 + xi2^2 + xi3^2)^2 + xi3^4)^(1/4)",
       "non-Riemannian norm with a large isometry group; BL metric diag(a, a, b)", MinkowskiNorm::quartic_killing(3));
  norm("cube", "max(|xi1|, |xi2|, |xi3|)", "closed form G = 0.6 I", MinkowskiNorm::lp(3, INFINITY));
  norm("octahedron", "|xi1| + |xi2| + |xi3|", "3D polytope gauge", MinkowskiNorm::lp(3, 1.0));

  structure("constant-square", "F(x, xi) = max(|xi1|, |xi2|)", "locally Minkowski",
            FinslerStructure::constant_minkowski(square_chart, square));
  structure("example-d", "(1 - f(x1)) (|xi1| + |xi2|) + f(x1) sqrt(xi1^2 + xi2^2), f a smooth step on [0, 1]",
            "partially smooth, BL metric a(x1) I, not Berwald", FinslerStructure::example_d());
  structure("monochromatic-rotor", "F0(A_x xi), A_x = S^-1 R(0.5 sin x1) S, F0 = max-norm",
            "all tangent norms isometric, flat BL metric, not Berwald",
            FinslerStructure::monochromatic_rotor(square_chart, square, ScalarField::sine(0.0, 0.5, 1.0, 0.0, 0)));
  structure("conformal-square", "(1 + 0.3 sin x1) max(|xi1|, |xi2|)", "conformal to a Minkowski space, curved BL metric",
            FinslerStructure::conformal_rescale(FinslerStructure::constant_minkowski(square_chart, square),
                                                ScalarField::sine(1.0, 0.3, 1.0, 0.0, 0)));
  structure("holonomy-polar", "F0(D Phi(r, phi) xi), Phi polar coordinates, F0 = l3 norm",
            "a constant norm written in a curvilinear chart; locally Minkowski",
            FinslerStructure::holonomy_extension(ChartBox(v2(0.5, -1), v2(1.5, 1)), MinkowskiNorm::lp(2, 3.0),
                                                 FinslerStructure::ChartMap::Polar));
  structure("moving-polygon", "unit ball = polygon with vertices v_k + B_k x", "polygon field, not Berwald",
            FinslerStructure::moving_polygon(square_chart, polygon, polygon_motion));
  structure("rotated-example-d", "example-d composed with x -> R(pi/2) x + (0.5, 0)", "rigid motion of a built-in",
            FinslerStructure::rigid_motion(FinslerStructure::example_d(), rotation2(kPi / 2.0), v2(0.5, 0.0),
                                           ChartBox(v2(-0.9, -0.9), v2(0.9, 0.9))));
  structure("quartic-killing-field", "F(x, xi) = ((|xi|^2)^2 + xi3^4)^(1/4)", "3D locally Minkowski",
            FinslerStructure::constant_minkowski(ChartBox(v3(-1, -1, -1), v3(1, 1, 1)), MinkowskiNorm::quartic_killing(3)));
  return out;
}

}  // namespace

const std::vector<BuiltinExample>& builtin_examples() {
  static const std::vector<BuiltinExample> examples = make_examples();
  return examples;
}

const BuiltinExample& builtin_example(const std::string& name) {
  for (const auto& e : builtin_examples()) {
    if (e.name == name) return e;
  }
  throw InputError("unknown built-in example: " + name);
}

}  // namespace finsler
