#include "finsler/structure.hpp"

#include "finsler/binet_legendre.hpp"
#include "finsler/json_io.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace finsler {

// ---------------------------------------------------------------- scalar fields

ScalarField ScalarField::constant(double value) {
  if (!std::isfinite(value)) throw InputError("scalar field: constant must be finite");
  ScalarField f;
  f.kind_ = Kind::Constant;
  f.a_ = value;
  return f;
}

ScalarField ScalarField::affine(double offset, Vec gradient) {
  if (!std::isfinite(offset) || !gradient.allFinite() || gradient.size() == 0) {
    throw InputError("scalar field: affine needs a finite offset and gradient");
  }
  ScalarField f;
  f.kind_ = Kind::Affine;
  f.a_ = offset;
  f.gradient_ = std::move(gradient);
  return f;
}

ScalarField ScalarField::sine(double offset, double amplitude, double frequency, double phase, int axis) {
  if (!std::isfinite(offset) || !std::isfinite(amplitude) || !std::isfinite(frequency) || !std::isfinite(phase) ||
      axis < 0) {
    throw InputError("scalar field: sin parameters must be finite and the axis nonnegative");
  }
  ScalarField f;
  f.kind_ = Kind::Sin;
  f.a_ = offset;
  f.b_ = amplitude;
  f.c_ = frequency;
  f.d_ = phase;
  f.axis_ = axis;
  return f;
}

ScalarField ScalarField::exponential(double linear, double quadratic, int axis) {
  if (!std::isfinite(linear) || !std::isfinite(quadratic) || axis < 0) {
    throw InputError("scalar field: exp parameters must be finite and the axis nonnegative");
  }
  ScalarField f;
  f.kind_ = Kind::Exp;
  f.a_ = linear;
  f.b_ = quadratic;
  f.axis_ = axis;
  return f;
}

double ScalarField::operator()(const Vec& x) const {
  switch (kind_) {
    case Kind::Constant: return a_;
    case Kind::Affine:
      if (gradient_.size() != x.size()) throw InputError("scalar field: affine gradient has the wrong dimension");
      return a_ + gradient_.dot(x);
    case Kind::Sin:
      if (axis_ >= x.size()) throw InputError("scalar field: axis out of range");
      return a_ + b_ * std::sin(c_ * x[axis_] + d_);
    case Kind::Exp:
      if (axis_ >= x.size()) throw InputError("scalar field: axis out of range");
      return std::exp(a_ * x[axis_] + b_ * x[axis_] * x[axis_]);
  }
  return 0.0;
}

bool ScalarField::is_constant() const {
  switch (kind_) {
    case Kind::Constant: return true;
    case Kind::Affine: return gradient_.isZero(0.0);
    case Kind::Sin: return b_ == 0.0 || c_ == 0.0;
    case Kind::Exp: return a_ == 0.0 && b_ == 0.0;
  }
  return false;
}

nlohmann::json ScalarField::to_json() const {
  switch (kind_) {
    case Kind::Constant: return {{"type", "constant"}, {"value", a_}};
    case Kind::Affine: return {{"type", "affine"}, {"offset", a_}, {"gradient", vector_to_json(gradient_)}};
    case Kind::Sin:
      return {{"type", "sin"}, {"offset", a_}, {"amplitude", b_}, {"frequency", c_}, {"phase", d_}, {"axis", axis_}};
    case Kind::Exp: return {{"type", "exp"}, {"linear", a_}, {"quadratic", b_}, {"axis", axis_}};
  }
  return {};
}

ScalarField scalar_field_from_json(const nlohmann::json& spec) {
  if (spec.is_number()) return ScalarField::constant(spec.get<double>());
  if (!spec.is_object() || !spec.contains("type")) {
    throw InputError("scalar field: expected a number or {\"type\": constant | affine | sin | exp, ...}");
  }
  const std::string type = spec.at("type").get<std::string>();
  try {
    if (type == "constant") return ScalarField::constant(spec.at("value").get<double>());
    if (type == "affine") {
      return ScalarField::affine(spec.value("offset", 0.0), json_vector(spec.at("gradient"), "affine.gradient"));
    }
    if (type == "sin") {
      return ScalarField::sine(spec.value("offset", 0.0), spec.at("amplitude").get<double>(),
                               spec.value("frequency", 1.0), spec.value("phase", 0.0), spec.value("axis", 0));
    }
    if (type == "exp") {
      return ScalarField::exponential(spec.value("linear", 0.0), spec.value("quadratic", 0.0), spec.value("axis", 0));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("scalar field (" + type + "): " + e.what());
  }
  throw InputError("scalar field: unknown type '" + type + "'");
}

// ---------------------------------------------------------------- chart

ChartBox::ChartBox(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() < 1) throw InputError("chart: lower and upper differ in dimension");
  if (!lower.allFinite() || !upper.allFinite()) throw InputError("chart: bounds must be finite");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw InputError("chart: degenerate box along axis " + std::to_string(i));
  }
}

bool ChartBox::contains(const Vec& x, double slack) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double pad = slack * (upper[i] - lower[i]);
    if (x[i] < lower[i] - pad || x[i] > upper[i] + pad) return false;
  }
  return true;
}

std::string to_string(Smoothness s) {
  switch (s) {
    case Smoothness::Smooth: return "smooth";
    case Smoothness::PartiallySmooth: return "partially-smooth";
    case Smoothness::Continuous: return "continuous";
  }
  return "unknown";
}

// ---------------------------------------------------------------- field families

namespace {

constexpr const char* kStructureSchemaHint =
    "expected {\"chart\": {\"lower\": [...], \"upper\": [...]}, \"field\": {\"family\": one of constant_minkowski | "
    "example_d | monochromatic_rotor | conformal_rescale | holonomy_extension | moving_polygon | rigid_motion, ...}} "
    "(see schemas/structure.schema.json)";

Mat symmetric_sqrt(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

class ConstantField final : public detail::FieldImpl {
 public:
  explicit ConstantField(MinkowskiNorm norm) : norm_(std::move(norm)) {}
  int dimension() const override { return norm_.dimension(); }
  MinkowskiNorm norm_at(const Vec&) const override { return norm_; }
  Smoothness smoothness() const override { return Smoothness::PartiallySmooth; }
  std::string family() const override { return "constant_minkowski"; }
  nlohmann::json to_json() const override { return {{"family", family()}, {"norm", norm_.to_json()}}; }

 private:
  MinkowskiNorm norm_;
};

double smooth_step(double t) {
  auto psi = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double a = psi(t);
  const double b = psi(1.0 - t);
  return a / (a + b);
}

class ExampleDField final : public detail::FieldImpl {
 public:
  ExampleDField() : l1_(MinkowskiNorm::lp(2, 1.0)), l2_(MinkowskiNorm::euclidean(2)) {}
  int dimension() const override { return 2; }
  MinkowskiNorm norm_at(const Vec& x) const override {
    const double f = smooth_step(x[0]);
    return MinkowskiNorm::weighted_sum(1.0 - f, l1_, f, l2_);
  }
  Smoothness smoothness() const override { return Smoothness::PartiallySmooth; }
  std::string family() const override { return "example_d"; }
  nlohmann::json to_json() const override { return {{"family", family()}}; }

 private:
  MinkowskiNorm l1_;
  MinkowskiNorm l2_;
};

class RotorField final : public detail::FieldImpl {
 public:
  RotorField(MinkowskiNorm norm, ScalarField angle, Vec axis)
      : norm_(std::move(norm)), angle_(std::move(angle)), axis_(std::move(axis)) {
    const int n = norm_.dimension();
    if (n == 2) {
      if (axis_.size() != 0) throw InputError("monochromatic_rotor: planar rotors take no axis");
    } else if (n == 3) {
      if (axis_.size() != 3 || !(axis_.norm() > 0.0)) throw InputError("monochromatic_rotor: 3D rotors need a nonzero axis");
    } else {
      throw InputError("monochromatic_rotor: dimension must be 2 or 3");
    }
    s_ = symmetric_sqrt(compute_bl(norm_).metric.matrix());
    s_inv_ = s_.inverse();
  }
  int dimension() const override { return norm_.dimension(); }
  MinkowskiNorm norm_at(const Vec& x) const override {
    const double psi = angle_(x);
    const Mat r = dimension() == 2 ? rotation2(psi) : rotation3(axis_, psi);
    return linear_image(norm_, s_inv_ * r * s_);
  }
  Smoothness smoothness() const override { return Smoothness::PartiallySmooth; }
  std::string family() const override { return "monochromatic_rotor"; }
  nlohmann::json to_json() const override {
    nlohmann::json j = {{"family", family()}, {"norm", norm_.to_json()}, {"angle", angle_.to_json()}};
    if (axis_.size() != 0) j["axis"] = vector_to_json(axis_);
    return j;
  }

 private:
  MinkowskiNorm norm_;
  ScalarField angle_;
  Vec axis_;
  Mat s_;
  Mat s_inv_;
};

class ConformalField final : public detail::FieldImpl {
 public:
  ConformalField(std::shared_ptr<const detail::FieldImpl> base, ScalarField factor)
      : base_(std::move(base)), factor_(std::move(factor)) {}
  int dimension() const override { return base_->dimension(); }
  MinkowskiNorm norm_at(const Vec& x) const override {
    const double l = factor_(x);
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw InputError("conformal_rescale: factor must be positive, got " + std::to_string(l));
    }
    return scaled(base_->norm_at(x), l);
  }
  Smoothness smoothness() const override { return base_->smoothness(); }
  std::string family() const override { return "conformal_rescale"; }
  nlohmann::json to_json() const override {
    return {{"family", family()}, {"base", base_->to_json()}, {"factor", factor_.to_json()}};
  }

 private:
  std::shared_ptr<const detail::FieldImpl> base_;
  ScalarField factor_;
};

class HolonomyField final : public detail::FieldImpl {
 public:
  HolonomyField(MinkowskiNorm norm, FinslerStructure::ChartMap map) : norm_(std::move(norm)), map_(map) {
    if (map_ == FinslerStructure::ChartMap::Polar && norm_.dimension() != 2) {
      throw InputError("holonomy_extension: the polar chart map is planar");
    }
  }
  int dimension() const override { return norm_.dimension(); }
  MinkowskiNorm norm_at(const Vec& x) const override {
    if (map_ == FinslerStructure::ChartMap::Cartesian) return norm_;
    const double r = x[0];
    const double phi = x[1];
    if (!(r > 0.0)) throw InputError("holonomy_extension: polar chart needs r > 0");
    Mat d(2, 2);
    d << std::cos(phi), -r * std::sin(phi), std::sin(phi), r * std::cos(phi);
    return linear_image(norm_, d);
  }
  Smoothness smoothness() const override { return Smoothness::PartiallySmooth; }
  std::string family() const override { return "holonomy_extension"; }
  nlohmann::json to_json() const override {
    return {{"family", family()},
            {"norm", norm_.to_json()},
            {"chart_map", map_ == FinslerStructure::ChartMap::Cartesian ? "cartesian" : "polar"}};
  }

 private:
  MinkowskiNorm norm_;
  FinslerStructure::ChartMap map_;
};

class MovingPolygonField final : public detail::FieldImpl {
 public:
  MovingPolygonField(std::vector<Vec> base, std::vector<Mat> gradients)
      : base_(std::move(base)), gradients_(std::move(gradients)) {
    if (base_.size() < 3 || base_.size() != gradients_.size()) {
      throw InputError("moving_polygon: need at least 3 vertices with one gradient each");
    }
    for (std::size_t k = 0; k < base_.size(); ++k) {
      if (base_[k].size() != 2 || gradients_[k].rows() != 2 || gradients_[k].cols() != 2) {
        throw InputError("moving_polygon: vertices are planar and gradients 2x2");
      }
    }
  }
  int dimension() const override { return 2; }
  MinkowskiNorm norm_at(const Vec& x) const override {
    std::vector<Vec> v;
    v.reserve(base_.size());
    for (std::size_t k = 0; k < base_.size(); ++k) v.push_back(base_[k] + gradients_[k] * x);
    return MinkowskiNorm::polytope_gauge(std::move(v));
  }
  Smoothness smoothness() const override { return Smoothness::PartiallySmooth; }
  std::string family() const override { return "moving_polygon"; }
  nlohmann::json to_json() const override {
    nlohmann::json verts = nlohmann::json::array();
    nlohmann::json grads = nlohmann::json::array();
    for (std::size_t k = 0; k < base_.size(); ++k) {
      verts.push_back(vector_to_json(base_[k]));
      grads.push_back(matrix_to_json(gradients_[k]));
    }
    return {{"family", family()}, {"vertices", verts}, {"gradients", grads}};
  }

 private:
  std::vector<Vec> base_;
  std::vector<Mat> gradients_;
};

class RigidMotionField final : public detail::FieldImpl {
 public:
  RigidMotionField(std::shared_ptr<const detail::FieldImpl> base, Mat rotation, Vec translation)
      : base_(std::move(base)), r_(std::move(rotation)), b_(std::move(translation)) {
    const int n = base_->dimension();
    if (r_.rows() != n || r_.cols() != n || b_.size() != n) throw InputError("rigid_motion: dimension mismatch");
    if ((r_.transpose() * r_ - Mat::Identity(n, n)).norm() > 1e-10) {
      throw InputError("rigid_motion: rotation matrix is not orthogonal");
    }
  }
  int dimension() const override { return base_->dimension(); }
  MinkowskiNorm norm_at(const Vec& x) const override { return linear_image(base_->norm_at(r_ * x + b_), r_); }
  Smoothness smoothness() const override { return base_->smoothness(); }
  std::string family() const override { return "rigid_motion"; }
  nlohmann::json to_json() const override {
    return {{"family", family()},
            {"base", base_->to_json()},
            {"rotation", matrix_to_json(r_)},
            {"translation", vector_to_json(b_)}};
  }

 private:
  std::shared_ptr<const detail::FieldImpl> base_;
  Mat r_;
  Vec b_;
};

MinkowskiNorm parse_norm(const nlohmann::json& spec, const char* where) {
  if (!spec.contains("norm")) throw InputError(std::string(where) + ": missing \"norm\"");
  return norm_from_json(spec.at("norm"));
}

std::shared_ptr<const detail::FieldImpl> parse_field(const nlohmann::json& spec, int n) {
  if (!spec.is_object() || !spec.contains("family")) throw InputError(kStructureSchemaHint);
  const std::string family = spec.at("family").get<std::string>();
  std::shared_ptr<const detail::FieldImpl> out;
  try {
    if (family == "constant_minkowski") {
      out = std::make_shared<ConstantField>(parse_norm(spec, "constant_minkowski"));
    } else if (family == "example_d") {
      out = std::make_shared<ExampleDField>();
    } else if (family == "monochromatic_rotor") {
      Vec axis;
      if (spec.contains("axis")) axis = json_vector(spec.at("axis"), "monochromatic_rotor.axis");
      out = std::make_shared<RotorField>(parse_norm(spec, "monochromatic_rotor"),
                                         scalar_field_from_json(spec.at("angle")), axis);
    } else if (family == "conformal_rescale") {
      out = std::make_shared<ConformalField>(parse_field(spec.at("base"), n), scalar_field_from_json(spec.at("factor")));
    } else if (family == "holonomy_extension") {
      const std::string map = spec.value("chart_map", std::string("cartesian"));
      if (map != "cartesian" && map != "polar") throw InputError("holonomy_extension: chart_map is cartesian or polar");
      out = std::make_shared<HolonomyField>(parse_norm(spec, "holonomy_extension"),
                                            map == "polar" ? FinslerStructure::ChartMap::Polar
                                                           : FinslerStructure::ChartMap::Cartesian);
    } else if (family == "moving_polygon") {
      std::vector<Vec> verts;
      std::vector<Mat> grads;
      for (const auto& v : spec.at("vertices")) verts.push_back(json_vector(v, "moving_polygon.vertices"));
      for (const auto& g : spec.at("gradients")) grads.push_back(json_matrix(g, "moving_polygon.gradients"));
      out = std::make_shared<MovingPolygonField>(std::move(verts), std::move(grads));
    } else if (family == "rigid_motion") {
      out = std::make_shared<RigidMotionField>(parse_field(spec.at("base"), n),
                                               json_matrix(spec.at("rotation"), "rigid_motion.rotation"),
                                               json_vector(spec.at("translation"), "rigid_motion.translation"));
    } else {
      throw InputError("unknown structure family '" + family + "'; " + kStructureSchemaHint);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("structure field (" + family + "): " + e.what() + "; " + kStructureSchemaHint);
  }
  if (out->dimension() != n) {
    throw InputError("structure field (" + family + ") has dimension " + std::to_string(out->dimension()) +
                     " but the chart has dimension " + std::to_string(n));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- structure

FinslerStructure::FinslerStructure(ChartBox chart, std::shared_ptr<const detail::FieldImpl> field)
    : chart_(std::move(chart)), field_(std::move(field)) {
  if (!field_) throw InputError("structure: missing field");
  if (field_->dimension() != chart_.dimension()) throw InputError("structure: chart and field dimensions differ");
}

FinslerStructure FinslerStructure::constant_minkowski(ChartBox chart, MinkowskiNorm norm) {
  return FinslerStructure(std::move(chart), std::make_shared<ConstantField>(std::move(norm)));
}

ChartBox FinslerStructure::default_example_d_chart() {
  Vec lo(2);
  Vec hi(2);
  lo << -1.0, -1.0;
  hi << 2.0, 1.0;
  return ChartBox(lo, hi);
}

FinslerStructure FinslerStructure::example_d(ChartBox chart) {
  return FinslerStructure(std::move(chart), std::make_shared<ExampleDField>());
}

FinslerStructure FinslerStructure::monochromatic_rotor(ChartBox chart, MinkowskiNorm norm, ScalarField angle, Vec axis) {
  return FinslerStructure(std::move(chart), std::make_shared<RotorField>(std::move(norm), std::move(angle), std::move(axis)));
}

FinslerStructure FinslerStructure::conformal_rescale(const FinslerStructure& base, ScalarField factor) {
  return FinslerStructure(base.chart_, std::make_shared<ConformalField>(base.field_, std::move(factor)));
}

FinslerStructure FinslerStructure::holonomy_extension(ChartBox chart, MinkowskiNorm norm, ChartMap map) {
  if (map == ChartMap::Polar && chart.dimension() == 2 && !(chart.lower[0] > 0.0)) {
    throw InputError("holonomy_extension: polar chart needs r > 0 on the whole box");
  }
  return FinslerStructure(std::move(chart), std::make_shared<HolonomyField>(std::move(norm), map));
}

FinslerStructure FinslerStructure::moving_polygon(ChartBox chart, std::vector<Vec> base, std::vector<Mat> gradients) {
  return FinslerStructure(std::move(chart), std::make_shared<MovingPolygonField>(std::move(base), std::move(gradients)));
}

FinslerStructure FinslerStructure::rigid_motion(const FinslerStructure& base, Mat rotation, Vec translation,
                                                ChartBox chart) {
  return FinslerStructure(std::move(chart),
                          std::make_shared<RigidMotionField>(base.field_, std::move(rotation), std::move(translation)));
}

MinkowskiNorm FinslerStructure::norm_at(const Vec& x) const {
  if (x.size() != dimension()) throw InputError("norm_at: point has the wrong dimension");
  if (!x.allFinite()) throw InputError("norm_at: point is not finite");
  if (!chart_.contains(x)) {
    std::ostringstream os;
    os << "norm_at: point (" << x.transpose() << ") lies outside the chart";
    throw InputError(os.str());
  }
  return field_->norm_at(x);
}

nlohmann::json FinslerStructure::to_json() const {
  return {{"chart", {{"lower", vector_to_json(chart_.lower)}, {"upper", vector_to_json(chart_.upper)}}},
          {"field", field_->to_json()}};
}

FinslerStructure structure_from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("chart") || !spec.contains("field")) throw InputError(kStructureSchemaHint);
  const auto& chart = spec.at("chart");
  if (!chart.is_object() || !chart.contains("lower") || !chart.contains("upper")) {
    throw InputError("chart: expected {\"lower\": [...], \"upper\": [...]}; " + std::string(kStructureSchemaHint));
  }
  ChartBox box(json_vector(chart.at("lower"), "chart.lower"), json_vector(chart.at("upper"), "chart.upper"));
  const int n = box.dimension();
  FinslerStructure s(box, parse_field(spec.at("field"), n));
  if (s.family() == "holonomy_extension" && spec.at("field").value("chart_map", std::string()) == "polar" &&
      !(box.lower[0] > 0.0)) {
    throw InputError("holonomy_extension: polar chart needs r > 0 on the whole box");
  }
  return s;
}

void require_valid_structure(const FinslerStructure& s, std::size_t count) {
  const int n = s.dimension();
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> points = {s.chart().center(), s.chart().lower, s.chart().upper};
  while (points.size() < count) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = s.chart().lower[i] + (s.chart().upper[i] - s.chart().lower[i]) * u(rng);
    points.push_back(x);
  }
  for (const auto& x : points) {
    const ValidationReport r = validate(s.norm_at(x), 128, 1);
    if (!r.passed) {
      std::ostringstream os;
      os << "structure " << s.family() << " is not a Minkowski norm at x = (" << x.transpose() << "): " << r.failure;
      throw InputError(os.str());
    }
  }
}

}  // namespace finsler
