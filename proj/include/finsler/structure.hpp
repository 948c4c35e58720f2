#pragma once

#include "finsler/core.hpp"
#include "finsler/minkowski.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace finsler {

/// Real function on the chart used for conformal factors and rotation angles.
///   constant: value
///   affine:   offset + gradient . x
///   sin:      offset + amplitude * sin(frequency * x[axis] + phase)
///   exp:      exp(linear * x[axis] + quadratic * x[axis]^2)
class ScalarField {
 public:
  enum class Kind { Constant, Affine, Sin, Exp };

  static ScalarField constant(double value);
  static ScalarField affine(double offset, Vec gradient);
  static ScalarField sine(double offset, double amplitude, double frequency, double phase, int axis);
  static ScalarField exponential(double linear, double quadratic, int axis);

  double operator()(const Vec& x) const;
  Kind kind() const { return kind_; }
  bool is_constant() const;
  nlohmann::json to_json() const;

 private:
  Kind kind_ = Kind::Constant;
  double a_ = 0.0;  // value / offset / offset / linear
  double b_ = 0.0;  // amplitude / quadratic
  double c_ = 0.0;  // frequency
  double d_ = 0.0;  // phase
  int axis_ = 0;
  Vec gradient_;
};

ScalarField scalar_field_from_json(const nlohmann::json& spec);

/// Axis-aligned box [lower, upper] in R^n.
struct ChartBox {
  Vec lower;
  Vec upper;

  ChartBox() = default;
  /// Throws InputError unless lower < upper componentwise.
  ChartBox(Vec lower, Vec upper);

  int dimension() const { return static_cast<int>(lower.size()); }
  bool contains(const Vec& x, double slack = 1e-12) const;
  Vec center() const { return 0.5 * (lower + upper); }
};

enum class Smoothness { Smooth, PartiallySmooth, Continuous };

std::string to_string(Smoothness s);

namespace detail {

/// x -> F(x, .) without chart bookkeeping.
class FieldImpl {
 public:
  virtual ~FieldImpl() = default;
  virtual int dimension() const = 0;
  virtual MinkowskiNorm norm_at(const Vec& x) const = 0;
  virtual Smoothness smoothness() const = 0;
  virtual std::string family() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

}  // namespace detail

/// A Finsler structure on a chart box: a norm oracle x -> F(x, .).
class FinslerStructure {
 public:
  /// F(x, xi) = F0(xi).
  static FinslerStructure constant_minkowski(ChartBox chart, MinkowskiNorm norm);

  /// (1 - f(x1)) (|xi1| + |xi2|) + f(x1) |xi|, with f a smooth step from 0 (x1 <= 0) to 1 (x1 >= 1).
  static FinslerStructure example_d(ChartBox chart = default_example_d_chart());
  static ChartBox default_example_d_chart();

  /// F0(A_x xi) with A_x = S^{-1} R(angle(x)) S and S the symmetric square root of g_{F0}, so every
  /// A_x preserves the Binet-Legendre metric of F0. In 3D the rotation is about `axis`.
  static FinslerStructure monochromatic_rotor(ChartBox chart, MinkowskiNorm norm, ScalarField angle,
                                              Vec axis = Vec());

  /// lambda(x) F(x, xi); lambda must stay positive.
  static FinslerStructure conformal_rescale(const FinslerStructure& base, ScalarField factor);

  enum class ChartMap { Cartesian, Polar };
  /// Parallel extension of a constant norm by the flat Levi-Civita connection. With the cartesian map the
  /// result is the constant norm; with the polar map (x = (r, phi), r > 0) it is F0(D Phi(x) xi).
  static FinslerStructure holonomy_extension(ChartBox chart, MinkowskiNorm norm, ChartMap map = ChartMap::Cartesian);

  /// Polygon with vertices v_k(x) = base_k + gradient_k x (planar only); origin must stay interior.
  static FinslerStructure moving_polygon(ChartBox chart, std::vector<Vec> base, std::vector<Mat> gradients);

  /// F'(x, xi) = F(R x + b, R xi) on the given chart.
  static FinslerStructure rigid_motion(const FinslerStructure& base, Mat rotation, Vec translation, ChartBox chart);

  int dimension() const { return chart_.dimension(); }
  const ChartBox& chart() const { return chart_; }
  Smoothness smoothness() const { return field_->smoothness(); }
  std::string family() const { return field_->family(); }

  /// Throws InputError when x is outside the chart.
  MinkowskiNorm norm_at(const Vec& x) const;
  double operator()(const Vec& x, const Vec& xi) const { return norm_at(x)(xi); }

  /// {"chart": {"lower": [...], "upper": [...]}, "field": {...}}
  nlohmann::json to_json() const;

  FinslerStructure(ChartBox chart, std::shared_ptr<const detail::FieldImpl> field);
  const detail::FieldImpl& field() const { return *field_; }

 private:
  ChartBox chart_;
  std::shared_ptr<const detail::FieldImpl> field_;
};

/// Parses the structure JSON; throws InputError with a schema hint on bad input.
FinslerStructure structure_from_json(const nlohmann::json& spec);

/// Checks that norm_at(x) is a valid norm at `count` deterministic chart points.
void require_valid_structure(const FinslerStructure& s, std::size_t count = 16);

}  // namespace finsler
