#include "finsler/minkowski.hpp"

#include "finsler/json_io.hpp"
#include "finsler/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace finsler {

std::string to_string(NormFamily family) {
  switch (family) {
    case NormFamily::Euclidean: return "euclidean";
    case NormFamily::Lp: return "lp";
    case NormFamily::PolytopeGauge: return "polytope_gauge";
    case NormFamily::LinearImage: return "linear_image";
    case NormFamily::WeightedSum: return "weighted_sum";
    case NormFamily::QuarticKilling: return "quartic_killing";
    case NormFamily::Custom: return "custom";
  }
  return "unknown";
}

namespace {

void append_unit(std::vector<Vec>& out, const Vec& v) {
  const double len = v.norm();
  if (len > 0.0) out.push_back(v / len);
}

class EuclideanNorm final : public detail::NormImpl {
 public:
  explicit EuclideanNorm(const Mat& g) : g_(0.5 * (g + g.transpose())) {
    if (g.rows() != g.cols() || g.rows() < 1) throw InputError("euclidean norm: metric must be square");
    if (!is_symmetric(g, 1e-10)) throw InputError("euclidean norm: metric is not symmetric");
    Eigen::LLT<Mat> llt(g_);
    if (llt.info() != Eigen::Success) throw InputError("euclidean norm: metric is not positive definite");
    g_inv_ = llt.solve(Mat::Identity(g_.rows(), g_.cols()));
  }
  int dimension() const override { return static_cast<int>(g_.rows()); }
  NormFamily family() const override { return NormFamily::Euclidean; }
  double eval(const Vec& xi) const override { return std::sqrt(std::max(0.0, xi.dot(g_ * xi))); }
  std::optional<double> exact_support(const Vec& theta) const override {
    return std::sqrt(std::max(0.0, theta.dot(g_inv_ * theta)));
  }
  nlohmann::json to_json() const override {
    return {{"family", "euclidean"}, {"metric", matrix_to_json(g_)}};
  }

 private:
  Mat g_;
  Mat g_inv_;
};

class LpNorm final : public detail::NormImpl {
 public:
  LpNorm(int n, double p) : n_(n), p_(p) {
    if (n < 1) throw InputError("lp norm: dimension must be positive");
    if (!(p >= 1.0)) throw InputError("lp norm: p must be >= 1");
  }
  int dimension() const override { return n_; }
  NormFamily family() const override { return NormFamily::Lp; }
  double eval(const Vec& xi) const override { return lp_value(xi, p_); }
  std::optional<double> exact_support(const Vec& theta) const override {
    if (std::isinf(p_)) return lp_value(theta, 1.0);
    if (p_ == 1.0) return lp_value(theta, std::numeric_limits<double>::infinity());
    return lp_value(theta, p_ / (p_ - 1.0));
  }
  std::vector<Vec> kinks() const override { return std::isinf(p_) ? corners() : p_ == 1.0 ? axes() : std::vector<Vec>{}; }
  std::vector<Vec> dual_kinks() const override {
    return std::isinf(p_) ? axes() : p_ == 1.0 ? corners() : std::vector<Vec>{};
  }
  nlohmann::json to_json() const override {
    nlohmann::json j = {{"family", "lp"}, {"dimension", n_}};
    if (std::isinf(p_)) {
      j["p"] = "inf";
    } else {
      j["p"] = p_;
    }
    return j;
  }

  static double lp_value(const Vec& xi, double p) {
    const double m = xi.cwiseAbs().maxCoeff();
    if (std::isinf(p) || m == 0.0) return m;
    if (p == 1.0) return xi.cwiseAbs().sum();
    if (p == 2.0) return xi.norm();
    double s = 0.0;
    for (Eigen::Index i = 0; i < xi.size(); ++i) s += std::pow(std::abs(xi[i]) / m, p);
    return m * std::pow(s, 1.0 / p);
  }

 private:
  std::vector<Vec> axes() const {
    std::vector<Vec> out;
    for (int i = 0; i < n_; ++i) {
      for (double s : {1.0, -1.0}) {
        Vec e = Vec::Zero(n_);
        e[i] = s;
        out.push_back(e);
      }
    }
    return out;
  }
  std::vector<Vec> corners() const {
    std::vector<Vec> out;
    const int count = 1 << n_;
    for (int mask = 0; mask < count; ++mask) {
      Vec v(n_);
      for (int i = 0; i < n_; ++i) v[i] = (mask >> i) & 1 ? -1.0 : 1.0;
      out.push_back(v / std::sqrt(static_cast<double>(n_)));
    }
    return out;
  }

  int n_;
  double p_;
};

class PolytopeNorm final : public detail::NormImpl {
 public:
  explicit PolytopeNorm(std::vector<Vec> vertices) : gauge_(std::move(vertices)) {}
  int dimension() const override { return gauge_.dimension(); }
  NormFamily family() const override { return NormFamily::PolytopeGauge; }
  double eval(const Vec& xi) const override { return gauge_.eval(xi); }
  std::optional<double> exact_support(const Vec& theta) const override { return gauge_.support(theta); }
  std::vector<Vec> kinks() const override {
    std::vector<Vec> out;
    for (const auto& v : gauge_.hull_vertices()) append_unit(out, v);
    return out;
  }
  std::vector<Vec> dual_kinks() const override {
    std::vector<Vec> out;
    for (const auto& f : gauge_.facet_covectors()) append_unit(out, f);
    return out;
  }
  nlohmann::json to_json() const override {
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : gauge_.input_vertices()) verts.push_back(vector_to_json(v));
    return {{"family", "polytope_gauge"}, {"vertices", verts}};
  }

 private:
  PolytopeGauge gauge_;
};

class LinearImageNorm final : public detail::NormImpl {
 public:
  LinearImageNorm(MinkowskiNorm inner, const Mat& a) : inner_(std::move(inner)), a_(a) {
    if (a.rows() != a.cols() || a.rows() != inner_.dimension()) {
      throw InputError("linear_image: matrix must be square and match the norm dimension");
    }
    if (!a.allFinite()) throw InputError("linear_image: non-finite matrix");
    Eigen::FullPivLU<Mat> lu(a);
    if (!lu.isInvertible() || condition_number(a.transpose() * a) > 1e28) {
      throw InputError("linear_image: matrix is singular");
    }
    a_inv_ = lu.inverse();
  }
  int dimension() const override { return inner_.dimension(); }
  NormFamily family() const override { return NormFamily::LinearImage; }
  double eval(const Vec& xi) const override { return inner_.eval_unchecked(a_ * xi); }
  std::optional<double> exact_support(const Vec& theta) const override {
    return inner_.impl().exact_support(a_inv_.transpose() * theta);
  }
  std::vector<Vec> kinks() const override {
    std::vector<Vec> out;
    for (const auto& k : inner_.impl().kinks()) append_unit(out, a_inv_ * k);
    return out;
  }
  std::vector<Vec> dual_kinks() const override {
    std::vector<Vec> out;
    for (const auto& k : inner_.impl().dual_kinks()) append_unit(out, a_.transpose() * k);
    return out;
  }
  bool dual_kinks_complete() const override { return inner_.impl().dual_kinks_complete(); }
  nlohmann::json to_json() const override {
    return {{"family", "linear_image"}, {"matrix", matrix_to_json(a_)}, {"inner", inner_.to_json()}};
  }

 private:
  MinkowskiNorm inner_;
  Mat a_;
  Mat a_inv_;
};

class WeightedSumNorm final : public detail::NormImpl {
 public:
  WeightedSumNorm(double w1, MinkowskiNorm f1, double w2, MinkowskiNorm f2)
      : w1_(w1), w2_(w2), f1_(std::move(f1)), f2_(std::move(f2)) {
    if (!(w1 >= 0.0) || !(w2 >= 0.0) || !(w1 + w2 > 0.0)) {
      throw InputError("weighted_sum: weights must be nonnegative with positive sum");
    }
    if (f1_.dimension() != f2_.dimension()) throw InputError("weighted_sum: summands differ in dimension");
  }
  int dimension() const override { return f1_.dimension(); }
  NormFamily family() const override { return NormFamily::WeightedSum; }
  double eval(const Vec& xi) const override {
    double v = 0.0;
    if (w1_ > 0.0) v += w1_ * f1_.eval_unchecked(xi);
    if (w2_ > 0.0) v += w2_ * f2_.eval_unchecked(xi);
    return v;
  }
  std::optional<double> exact_support(const Vec& theta) const override {
    // Support of {w F <= 1} is h_F / w.
    if (w2_ == 0.0) {
      if (auto h = f1_.impl().exact_support(theta)) return *h / w1_;
    } else if (w1_ == 0.0) {
      if (auto h = f2_.impl().exact_support(theta)) return *h / w2_;
    }
    return std::nullopt;
  }
  std::vector<Vec> kinks() const override {
    std::vector<Vec> out;
    if (w1_ > 0.0) out = f1_.impl().kinks();
    if (w2_ > 0.0) {
      for (auto& k : f2_.impl().kinks()) out.push_back(std::move(k));
    }
    return out;
  }
  bool dual_kinks_complete() const override { return w1_ == 0.0 || w2_ == 0.0; }
  std::vector<Vec> dual_kinks() const override {
    if (w2_ == 0.0) return f1_.impl().dual_kinks();
    if (w1_ == 0.0) return f2_.impl().dual_kinks();
    return {};
  }
  nlohmann::json to_json() const override {
    return {{"family", "weighted_sum"}, {"w1", w1_}, {"w2", w2_}, {"first", f1_.to_json()}, {"second", f2_.to_json()}};
  }

 private:
  double w1_;
  double w2_;
  MinkowskiNorm f1_;
  MinkowskiNorm f2_;
};

class QuarticKillingNorm final : public detail::NormImpl {
 public:
  explicit QuarticKillingNorm(int n) : n_(n) {
    if (n < 2) throw InputError("quartic_killing: dimension must be at least 2");
  }
  int dimension() const override { return n_; }
  NormFamily family() const override { return NormFamily::QuarticKilling; }
  double eval(const Vec& xi) const override {
    const double m = xi.cwiseAbs().maxCoeff();
    if (m == 0.0) return 0.0;
    const Vec y = xi / m;
    const double r2 = y.squaredNorm();
    const double last = y[n_ - 1] * y[n_ - 1];
    return m * std::pow(r2 * r2 + last * last, 0.25);
  }
  std::optional<double> exact_support(const Vec&) const override { return std::nullopt; }
  bool dual_kinks_complete() const override { return true; }  // smooth, strictly convex
  nlohmann::json to_json() const override { return {{"family", "quartic_killing"}, {"dimension", n_}}; }

 private:
  int n_;
};

class CustomNorm final : public detail::NormImpl {
 public:
  CustomNorm(int n, std::function<double(const Vec&)> fn, std::string label)
      : n_(n), fn_(std::move(fn)), label_(std::move(label)) {
    if (n < 1) throw InputError("custom norm: dimension must be positive");
  }
  int dimension() const override { return n_; }
  NormFamily family() const override { return NormFamily::Custom; }
  double eval(const Vec& xi) const override { return fn_(xi); }
  std::optional<double> exact_support(const Vec&) const override { return std::nullopt; }
  bool dual_kinks_complete() const override { return false; }
  nlohmann::json to_json() const override { return {{"family", "custom"}, {"label", label_}}; }

 private:
  int n_;
  std::function<double(const Vec&)> fn_;
  std::string label_;
};

double numeric_support(const MinkowskiNorm& norm, const Vec& theta) {
  const int n = norm.dimension();
  auto value = [&](const Vec& u) {
    const double f = norm.eval_unchecked(u);
    return theta.dot(u) / f;
  };
  std::vector<Vec> candidates = sphere_directions(n, n == 2 ? 512 : 4096);
  for (auto& k : norm.kink_directions()) candidates.push_back(std::move(k));
  if (theta.norm() > 0.0) candidates.push_back(theta.normalized());
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double v = value(candidates[i]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  if (n == 2) {
    // A linear functional restricted to a convex curve is unimodal on each side of its maximum.
    const double phi0 = std::atan2(candidates[best][1], candidates[best][0]);
    const double bracket = 2.0 * kPi / 512.0 * 1.5;
    const auto [phi, v] = opt::golden_maximize([&](double p) { return value(circle_point(p)); }, phi0 - bracket,
                                               phi0 + bracket, 1e-13);
    (void)phi;
    return std::max(best_value, v);
  }
  const auto [u, v] = opt::sphere_local_maximize(value, candidates[best], 0.05, 1e-14);
  (void)u;
  return std::max(best_value, v);
}

constexpr const char* kNormSchemaHint =
    "expected {\"family\": one of euclidean | lp | polytope_gauge | linear_image | weighted_sum | "
    "quartic_killing, ...} (see schemas/norm.schema.json)";

}  // namespace

MinkowskiNorm MinkowskiNorm::euclidean(int n) {
  if (n < 1) throw InputError("euclidean norm: dimension must be positive");
  return euclidean(Mat::Identity(n, n));
}

MinkowskiNorm MinkowskiNorm::euclidean(const Mat& metric) {
  return MinkowskiNorm(std::make_shared<EuclideanNorm>(metric));
}

MinkowskiNorm MinkowskiNorm::lp(int n, double p) { return MinkowskiNorm(std::make_shared<LpNorm>(n, p)); }

MinkowskiNorm MinkowskiNorm::polytope_gauge(std::vector<Vec> vertices) {
  return MinkowskiNorm(std::make_shared<PolytopeNorm>(std::move(vertices)));
}

MinkowskiNorm MinkowskiNorm::quartic_killing(int n) { return MinkowskiNorm(std::make_shared<QuarticKillingNorm>(n)); }

MinkowskiNorm MinkowskiNorm::weighted_sum(double w1, const MinkowskiNorm& first, double w2,
                                          const MinkowskiNorm& second) {
  return MinkowskiNorm(std::make_shared<WeightedSumNorm>(w1, first, w2, second));
}

MinkowskiNorm MinkowskiNorm::custom(int n, std::function<double(const Vec&)> fn, std::string label) {
  return MinkowskiNorm(std::make_shared<CustomNorm>(n, std::move(fn), std::move(label)));
}

double MinkowskiNorm::operator()(const Vec& xi) const {
  if (xi.size() != dimension()) {
    std::ostringstream os;
    os << "norm evaluation: expected a vector of dimension " << dimension() << ", got " << xi.size();
    throw InputError(os.str());
  }
  if (!xi.allFinite()) throw InputError("norm evaluation: non-finite vector");
  if (xi.norm() < kZeroVectorThreshold) return 0.0;
  return impl_->eval(xi);
}

std::vector<Vec> MinkowskiNorm::kink_directions() const { return impl_->kinks(); }
std::vector<Vec> MinkowskiNorm::dual_kink_directions() const { return impl_->dual_kinks(); }

MinkowskiNorm linear_image(const MinkowskiNorm& norm, const Mat& a) {
  return MinkowskiNorm(std::make_shared<LinearImageNorm>(norm, a));
}

MinkowskiNorm scaled(const MinkowskiNorm& norm, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InputError("scaled: factor must be positive and finite");
  const int n = norm.dimension();
  return linear_image(norm, kappa * Mat::Identity(n, n));
}

double eval_norm(const MinkowskiNorm& norm, const Vec& xi) { return norm(xi); }

double support(const MinkowskiNorm& norm, const Vec& theta) {
  if (theta.size() != norm.dimension()) throw InputError("support: dimension mismatch");
  if (!theta.allFinite() || theta.norm() == 0.0) throw InputError("support: covector must be finite and nonzero");
  if (auto exact = norm.impl().exact_support(theta)) return *exact;
  return numeric_support(norm, theta);
}

ValidationReport validate(const MinkowskiNorm& norm, std::size_t sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw InputError("validate: sample_count must be at least 1");
  const int n = norm.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> lambda_dist(1e-3, 10.0);
  auto random_vec = [&] {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
  };

  ValidationReport report;
  report.samples = sample_count;
  report.min_on_unit_sphere = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < sample_count; ++s) {
    const Vec xi = random_vec();
    const Vec eta = random_vec();
    const double lambda = lambda_dist(rng);
    const double fx = norm.eval_unchecked(xi);
    const double fe = norm.eval_unchecked(eta);

    const double homog = std::abs(norm.eval_unchecked(lambda * xi) - lambda * fx) / (1.0 + lambda * std::abs(fx));
    if (homog > report.homogeneity_residual) {
      report.homogeneity_residual = homog;
      if (homog > 1e-9 && report.passed) {
        report.passed = false;
        report.failure = "positive homogeneity violated";
        report.witness = xi;
      }
    }
    const double denom = std::abs(fx) + std::abs(fe);
    const double sub = denom > 0.0 ? std::max(0.0, norm.eval_unchecked(xi + eta) - fx - fe) / denom : 0.0;
    if (sub > report.subadditivity_residual) {
      report.subadditivity_residual = sub;
      if (sub > 1e-9 && report.passed) {
        report.passed = false;
        report.failure = "subadditivity violated";
        report.witness = xi;
      }
    }
    const Vec u = xi.normalized();
    const double fu = norm.eval_unchecked(u);
    if (fu < report.min_on_unit_sphere) {
      report.min_on_unit_sphere = fu;
      if (!(fu > 0.0) && report.passed) {
        report.passed = false;
        report.failure = "definiteness violated";
        report.witness = u;
      }
    }
  }
  return report;
}

void require_valid(const MinkowskiNorm& norm, std::size_t sample_count, std::uint64_t seed) {
  const auto report = validate(norm, sample_count, seed);
  if (!report.passed) {
    std::ostringstream os;
    os << "norm validation failed: " << report.failure;
    if (report.witness) os << " at witness [" << report.witness->transpose() << "]";
    throw InputError(os.str());
  }
}

MinkowskiNorm norm_from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("family")) throw InputError(kNormSchemaHint);
  const std::string family = spec.at("family").get<std::string>();
  try {
    if (family == "euclidean") {
      if (spec.contains("metric")) return MinkowskiNorm::euclidean(json_matrix(spec.at("metric"), "euclidean.metric"));
      return MinkowskiNorm::euclidean(spec.at("dimension").get<int>());
    }
    if (family == "lp") {
      const auto& p = spec.at("p");
      const double pv = p.is_string() ? (p.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                                       : throw InputError("lp.p: use a number or \"inf\""))
                                      : p.get<double>();
      return MinkowskiNorm::lp(spec.at("dimension").get<int>(), pv);
    }
    if (family == "polytope_gauge") {
      std::vector<Vec> vertices;
      for (const auto& v : spec.at("vertices")) vertices.push_back(json_vector(v, "polytope_gauge.vertices"));
      return MinkowskiNorm::polytope_gauge(std::move(vertices));
    }
    if (family == "linear_image") {
      return linear_image(norm_from_json(spec.at("inner")), json_matrix(spec.at("matrix"), "linear_image.matrix"));
    }
    if (family == "weighted_sum") {
      return MinkowskiNorm::weighted_sum(spec.at("w1").get<double>(), norm_from_json(spec.at("first")),
                                         spec.at("w2").get<double>(), norm_from_json(spec.at("second")));
    }
    if (family == "quartic_killing") return MinkowskiNorm::quartic_killing(spec.at("dimension").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError("norm spec (" + family + "): " + e.what() + "; " + kNormSchemaHint);
  }
  throw InputError("unknown norm family '" + family + "'; " + kNormSchemaHint);
}

}  // namespace finsler
