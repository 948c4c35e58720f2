#pragma once

#include "finsler/core.hpp"
#include "finsler/polytope.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace finsler {

enum class NormFamily { Euclidean, Lp, PolytopeGauge, LinearImage, WeightedSum, QuarticKilling, Custom };

std::string to_string(NormFamily family);

namespace detail {

class NormImpl {
 public:
  virtual ~NormImpl() = default;
  virtual int dimension() const = 0;
  virtual NormFamily family() const = 0;
  virtual double eval(const Vec& xi) const = 0;
  /// Closed-form support function when one exists.
  virtual std::optional<double> exact_support(const Vec& theta) const = 0;
  virtual std::vector<Vec> kinks() const { return {}; }
  virtual std::vector<Vec> dual_kinks() const { return {}; }
  /// False when the support function may have kinks that dual_kinks() does not list.
  virtual bool dual_kinks_complete() const { return true; }
  virtual nlohmann::json to_json() const = 0;
};

}  // namespace detail

/// An asymmetric Minkowski norm on R^n: positively homogeneous, convex, definite.
///
/// Value type with shared immutable state; copies are cheap and concurrent evaluation is safe.
class MinkowskiNorm {
 public:
  static MinkowskiNorm euclidean(int n);
  /// sqrt(xi^T G xi); G must be symmetric positive definite.
  static MinkowskiNorm euclidean(const Mat& metric);
  /// p >= 1; p = +infinity selects the max-norm.
  static MinkowskiNorm lp(int n, double p);
  static MinkowskiNorm polytope_gauge(std::vector<Vec> vertices);
  /// ((sum xi_i^2)^2 + xi_n^4)^{1/4}.
  static MinkowskiNorm quartic_killing(int n);
  static MinkowskiNorm weighted_sum(double w1, const MinkowskiNorm& first, double w2, const MinkowskiNorm& second);
  /// Arbitrary callable; not serializable. Used for perturbations and injected test families.
  static MinkowskiNorm custom(int n, std::function<double(const Vec&)> fn, std::string label);

  int dimension() const { return impl_->dimension(); }
  NormFamily family() const { return impl_->family(); }

  /// F(xi). Throws InputError on dimension mismatch or non-finite input.
  double operator()(const Vec& xi) const;
  /// F(xi) without argument checks.
  double eval_unchecked(const Vec& xi) const { return impl_->eval(xi); }

  /// Directions where F fails to be differentiable (vertex rays of the unit ball), unit length.
  std::vector<Vec> kink_directions() const;
  /// Covector directions where the support function may be non-smooth (facet normals), unit length.
  std::vector<Vec> dual_kink_directions() const;
  bool dual_kinks_complete() const { return impl_->dual_kinks_complete(); }

  nlohmann::json to_json() const { return impl_->to_json(); }
  const detail::NormImpl& impl() const { return *impl_; }

  explicit MinkowskiNorm(std::shared_ptr<const detail::NormImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const detail::NormImpl> impl_;
};

/// The norm xi -> F(A xi). A must be invertible.
MinkowskiNorm linear_image(const MinkowskiNorm& norm, const Mat& a);

/// kappa * F, realized as F(kappa xi).
MinkowskiNorm scaled(const MinkowskiNorm& norm, double kappa);

/// F(xi) with validation of the argument.
double eval_norm(const MinkowskiNorm& norm, const Vec& xi);

/// h(theta) = max{theta(xi) : F(xi) <= 1}.
///
/// Polytopes, L^p and euclidean norms use closed forms. Other families run a coarse sphere scan
/// (512 directions in 2D, 4096 in 3D) followed by local refinement to relative tolerance 1e-8.
double support(const MinkowskiNorm& norm, const Vec& theta);

struct ValidationReport {
  std::size_t samples = 0;
  double homogeneity_residual = 0.0;
  double subadditivity_residual = 0.0;
  double min_on_unit_sphere = 0.0;
  bool passed = true;
  std::string failure;
  std::optional<Vec> witness;
};

/// Scans random samples for violations of positive homogeneity, subadditivity and definiteness.
ValidationReport validate(const MinkowskiNorm& norm, std::size_t sample_count, std::uint64_t seed = 1);

/// validate() and throw InputError naming the witness on failure.
void require_valid(const MinkowskiNorm& norm, std::size_t sample_count = 256, std::uint64_t seed = 1);

/// Parses {"family": ..., params...}; throws InputError with a schema hint on bad input.
MinkowskiNorm norm_from_json(const nlohmann::json& spec);

}  // namespace finsler
