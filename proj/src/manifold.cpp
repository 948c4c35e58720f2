#include "finsler/manifold.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <sstream>

namespace finsler {

// ---------------------------------------------------------------- lattice

Lattice::Lattice(ChartBox box, std::vector<int> counts) : box_(std::move(box)), counts_(std::move(counts)) {
  if (static_cast<int>(counts_.size()) != box_.dimension()) throw InputError("lattice: one count per axis required");
  size_ = 1;
  for (std::size_t d = 0; d < counts_.size(); ++d) {
    if (counts_[d] < 4) throw InputError("lattice: at least 4 nodes per axis");
    h_.push_back((box_.upper[static_cast<Eigen::Index>(d)] - box_.lower[static_cast<Eigen::Index>(d)]) /
                 static_cast<double>(counts_[d] - 1));
    size_ *= static_cast<std::size_t>(counts_[d]);
  }
}

Lattice Lattice::uniform(const ChartBox& box, int per_axis) {
  return Lattice(box, std::vector<int>(static_cast<std::size_t>(box.dimension()), per_axis));
}

double Lattice::min_spacing() const { return *std::min_element(h_.begin(), h_.end()); }

std::vector<int> Lattice::multi_index(std::size_t flat) const {
  std::vector<int> idx(counts_.size());
  for (std::size_t d = 0; d < counts_.size(); ++d) {
    idx[d] = static_cast<int>(flat % static_cast<std::size_t>(counts_[d]));
    flat /= static_cast<std::size_t>(counts_[d]);
  }
  return idx;
}

std::size_t Lattice::flat_index(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (std::size_t d = counts_.size(); d-- > 0;) flat = flat * static_cast<std::size_t>(counts_[d]) + static_cast<std::size_t>(idx[d]);
  return flat;
}

Vec Lattice::node(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Vec x(dimension());
  for (int d = 0; d < dimension(); ++d) {
    x[d] = idx[static_cast<std::size_t>(d)] == counts_[static_cast<std::size_t>(d)] - 1
               ? box_.upper[d]
               : box_.lower[d] + h_[static_cast<std::size_t>(d)] * idx[static_cast<std::size_t>(d)];
  }
  return x;
}

bool Lattice::same_as(const Lattice& other) const {
  if (counts_ != other.counts_) return false;
  const double scale = 1.0 + box_.upper.cwiseAbs().maxCoeff() + box_.lower.cwiseAbs().maxCoeff();
  return (box_.lower - other.box_.lower).cwiseAbs().maxCoeff() <= 1e-12 * scale &&
         (box_.upper - other.box_.upper).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// ---------------------------------------------------------------- metric field

namespace {

struct AxisStencil {
  std::array<int, 4> node{};
  std::array<double, 4> w{};
  std::array<double, 4> dw{};  // derivative weights, already divided by h
  int used = 0;

  void add(int k, double wk, double dwk) {
    for (int i = 0; i < used; ++i) {
      if (node[static_cast<std::size_t>(i)] == k) {
        w[static_cast<std::size_t>(i)] += wk;
        dw[static_cast<std::size_t>(i)] += dwk;
        return;
      }
    }
    node[static_cast<std::size_t>(used)] = k;
    w[static_cast<std::size_t>(used)] = wk;
    dw[static_cast<std::size_t>(used)] = dwk;
    ++used;
  }
};

// Catmull-Rom weights on nodes i-1..i+2; missing end nodes are replaced by linear extrapolation.
AxisStencil axis_stencil(double x, double lo, double h, int count) {
  double s = (x - lo) / h;
  int i = static_cast<int>(std::floor(s));
  i = std::clamp(i, 0, count - 2);
  const double t = s - i;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const std::array<double, 4> b = {0.5 * (-t + 2.0 * t2 - t3), 0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
                                   0.5 * (t + 4.0 * t2 - 3.0 * t3), 0.5 * (-t2 + t3)};
  const std::array<double, 4> db = {0.5 * (-1.0 + 4.0 * t - 3.0 * t2) / h, 0.5 * (-10.0 * t + 9.0 * t2) / h,
                                    0.5 * (1.0 + 8.0 * t - 9.0 * t2) / h, 0.5 * (-2.0 * t + 3.0 * t2) / h};
  AxisStencil st;
  for (int k = 0; k < 4; ++k) {
    const int j = i - 1 + k;
    const auto ku = static_cast<std::size_t>(k);
    if (j < 0) {
      st.add(i, 2.0 * b[ku], 2.0 * db[ku]);
      st.add(i + 1, -b[ku], -db[ku]);
    } else if (j > count - 1) {
      st.add(i + 1, 2.0 * b[ku], 2.0 * db[ku]);
      st.add(i, -b[ku], -db[ku]);
    } else {
      st.add(j, b[ku], db[ku]);
    }
  }
  return st;
}

}  // namespace

MetricField::MetricField(Lattice lattice, std::vector<Mat> values) : lattice_(std::move(lattice)), values_(std::move(values)) {
  if (values_.size() != lattice_.size()) throw InputError("metric field: one tensor per lattice node required");
  const int n = lattice_.dimension();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    Mat& g = values_[i];
    if (g.rows() != n || g.cols() != n) throw InputError("metric field: tensor has the wrong size");
    g = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    if (!g.allFinite() || es.eigenvalues().minCoeff() <= 0.0) {
      std::ostringstream os;
      os << "metric field: tensor at node " << i << " (" << lattice_.node(i).transpose() << ") is not positive definite";
      throw NumericalError(os.str());
    }
  }
}

MetricField MetricField::from_function(const Lattice& lattice, const std::function<Mat(const Vec&)>& fn) {
  std::vector<Mat> values(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) values[i] = fn(lattice.node(i));
  return MetricField(lattice, std::move(values));
}

void MetricField::evaluate(const Vec& x, Mat& g, std::vector<Mat>& dg) const {
  const int n = dimension();
  if (x.size() != n || !x.allFinite()) throw InputError("metric field: bad evaluation point");
  if (!lattice_.box().contains(x, 1e-9)) throw InputError("metric field: point outside the lattice box");
  std::vector<AxisStencil> st;
  st.reserve(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    st.push_back(axis_stencil(x[d], lattice_.box().lower[d], lattice_.spacing(d), lattice_.counts()[static_cast<std::size_t>(d)]));
  }
  g = Mat::Zero(n, n);
  dg.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
  std::vector<int> pos(static_cast<std::size_t>(n), 0);
  std::vector<int> idx(static_cast<std::size_t>(n));
  while (true) {
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      const auto du = static_cast<std::size_t>(d);
      idx[du] = st[du].node[static_cast<std::size_t>(pos[du])];
      w *= st[du].w[static_cast<std::size_t>(pos[du])];
    }
    const Mat& v = values_[lattice_.flat_index(idx)];
    g += w * v;
    for (int a = 0; a < n; ++a) {
      double wa = 1.0;
      for (int d = 0; d < n; ++d) {
        const auto du = static_cast<std::size_t>(d);
        wa *= d == a ? st[du].dw[static_cast<std::size_t>(pos[du])] : st[du].w[static_cast<std::size_t>(pos[du])];
      }
      dg[static_cast<std::size_t>(a)] += wa * v;
    }
    int d = 0;
    while (d < n) {
      const auto du = static_cast<std::size_t>(d);
      if (++pos[du] < st[du].used) break;
      pos[du] = 0;
      ++d;
    }
    if (d == n) break;
  }
}

Mat MetricField::operator()(const Vec& x) const {
  Mat g;
  std::vector<Mat> dg;
  evaluate(x, g, dg);
  return g;
}

MetricField bl_field(const FinslerStructure& structure, const Lattice& lattice, const QuadratureOptions& options) {
  if (lattice.dimension() != structure.dimension()) throw InputError("bl_field: lattice dimension mismatch");
  for (int d = 0; d < lattice.dimension(); ++d) {
    if (lattice.box().lower[d] < structure.chart().lower[d] - 1e-12 * std::abs(structure.chart().lower[d]) ||
        lattice.box().upper[d] > structure.chart().upper[d] + 1e-12 * std::abs(structure.chart().upper[d])) {
      throw InputError("bl_field: lattice leaves the chart box");
    }
  }
  std::vector<Mat> values(lattice.size());
  parallel_for(lattice.size(), [&](std::size_t i) {
    const Vec x = lattice.node(i);
    auto where = [&] {
      std::ostringstream os;
      os << "bl_field: node " << i << " at x = (" << x.transpose() << "): ";
      return os.str();
    };
    try {
      values[i] = compute_bl(structure.norm_at(x), options).metric.matrix();
    } catch (const InputError& e) {
      throw InputError(where() + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(where() + e.what());
    }
  });
  return MetricField(lattice, std::move(values));
}

ConformalFactorResult conformal_factor(const MetricField& a, const MetricField& b) {
  if (!a.lattice().same_as(b.lattice())) throw InputError("conformal_factor: fields live on different lattices");
  const int n = a.dimension();
  ConformalFactorResult out;
  out.lambda.resize(a.values().size());
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const Mat& ga = a.values()[i];
    const Mat& gb = b.values()[i];
    const double l = std::pow(ga.determinant() / gb.determinant(), 1.0 / (2.0 * n));
    out.lambda[i] = l;
    out.residual = std::max(out.residual, (ga - l * l * gb).norm() / ga.norm());
  }
  out.conformal = out.residual < 1e-4;
  return out;
}

// ---------------------------------------------------------------- connection and transport

namespace {

Christoffel christoffel_from(const Mat& g, const std::vector<Mat>& dg) {
  const auto n = g.rows();
  const Mat ginv = g.inverse();
  Christoffel gamma(static_cast<std::size_t>(n), Mat::Zero(n, n));
  // lowered[l](i, j) = 1/2 (d_i G_jl + d_j G_il - d_l G_ij)
  std::vector<Mat> lowered(static_cast<std::size_t>(n), Mat::Zero(n, n));
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) {
        const double v = 0.5 * (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                                dg[static_cast<std::size_t>(l)](i, j));
        lowered[static_cast<std::size_t>(l)](i, j) = v;
        lowered[static_cast<std::size_t>(l)](j, i) = v;
      }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l) gamma[static_cast<std::size_t>(k)] += ginv(k, l) * lowered[static_cast<std::size_t>(l)];
  return gamma;
}

void require_interior(const Lattice& lat, const Vec& x, const char* what) {
  for (int d = 0; d < lat.dimension(); ++d) {
    const double margin = 2.0 * lat.spacing(d) * (1.0 - 1e-9);
    if (x[d] < lat.box().lower[d] + margin || x[d] > lat.box().upper[d] - margin) {
      std::ostringstream os;
      os << what << ": point (" << x.transpose() << ") is closer than two lattice spacings to the chart boundary";
      throw InputError(os.str());
    }
  }
}

// M(k, j) = Gamma^k_ij v^i
Mat connection_matrix(const MetricField& field, const Vec& x, const Vec& v) {
  Mat g;
  std::vector<Mat> dg;
  field.evaluate(x, g, dg);
  const Christoffel gamma = christoffel_from(g, dg);
  const auto n = x.size();
  Mat m(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m.row(k) = v.transpose() * gamma[static_cast<std::size_t>(k)];
  return m;
}

Mat rk4_segment(const MetricField& field, const Vec& a, const Vec& b, int steps) {
  const auto n = a.size();
  const Vec v = b - a;
  Mat p = Mat::Identity(n, n);
  const double ds = 1.0 / steps;
  for (int s = 0; s < steps; ++s) {
    const double s0 = s * ds;
    const Mat m0 = connection_matrix(field, a + s0 * v, v);
    const Mat mh = connection_matrix(field, a + (s0 + 0.5 * ds) * v, v);
    const Mat m1 = connection_matrix(field, a + (s0 + ds) * v, v);
    const Mat k1 = -m0 * p;
    const Mat k2 = -mh * (p + 0.5 * ds * k1);
    const Mat k3 = -mh * (p + 0.5 * ds * k2);
    const Mat k4 = -m1 * (p + ds * k3);
    p += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return p;
}

// Propagator along a straight piece contained in a single lattice cell.
Mat transport_piece(const MetricField& field, const Vec& a, const Vec& b, const TransportOptions& options,
                    std::size_t& steps) {
  int m = 2;
  Mat coarse = rk4_segment(field, a, b, m);
  steps += static_cast<std::size_t>(m);
  for (int k = 0; k < options.max_doublings; ++k) {
    m *= 2;
    Mat fine = rk4_segment(field, a, b, m);
    steps += static_cast<std::size_t>(m);
    const double change = (fine - coarse).cwiseAbs().maxCoeff();
    coarse = std::move(fine);
    if (change <= options.step_tolerance) break;
  }
  return coarse;
}

}  // namespace

Christoffel christoffel(const MetricField& field, const Vec& x) {
  if (x.size() != field.dimension()) throw InputError("christoffel: point has the wrong dimension");
  require_interior(field.lattice(), x, "christoffel");
  Mat g;
  std::vector<Mat> dg;
  field.evaluate(x, g, dg);
  return christoffel_from(g, dg);
}

TransportResult parallel_transport(const MetricField& field, const std::vector<Vec>& path, const Mat& frame,
                                   const TransportOptions& options) {
  const int n = field.dimension();
  if (path.size() < 2) throw InputError("parallel_transport: the path needs at least two points");
  if (frame.rows() != n || frame.cols() < 1) throw InputError("parallel_transport: frame must have n rows");
  for (const auto& x : path) {
    if (x.size() != n) throw InputError("parallel_transport: path point has the wrong dimension");
    require_interior(field.lattice(), x, "parallel_transport");
  }
  const Lattice& lat = field.lattice();
  TransportResult out;
  out.path = path;
  out.initial_frame = frame;
  Mat total = Mat::Identity(n, n);
  out.propagators.push_back(total);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const Vec& a = path[k];
    const Vec& b = path[k + 1];
    // Split at lattice faces so that every RK4 piece sees one cubic patch.
    std::vector<double> cuts = {0.0, 1.0};
    for (int d = 0; d < n; ++d) {
      const double lo = std::min(a[d], b[d]);
      const double hi = std::max(a[d], b[d]);
      if (hi - lo <= 0.0) continue;
      const double h = lat.spacing(d);
      const double base = lat.box().lower[d];
      for (double m = std::ceil((lo - base) / h); base + m * h < hi; m += 1.0) {
        const double s = (base + m * h - a[d]) / (b[d] - a[d]);
        if (s > 1e-12 && s < 1.0 - 1e-12) cuts.push_back(s);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double u, double v) { return std::abs(u - v) < 1e-12; }),
               cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const Vec pa = a + cuts[c] * (b - a);
      const Vec pb = a + cuts[c + 1] * (b - a);
      total = transport_piece(field, pa, pb, options, out.steps) * total;
    }
    out.propagators.push_back(total);
  }
  out.transported_frame = total * frame;
  const Mat gram0 = frame.transpose() * field(path.front()) * frame;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const Mat f = out.propagators[k] * frame;
    const Mat gram = f.transpose() * field(path[k]) * f;
    out.gram_residual = std::max(out.gram_residual, (gram - gram0).norm() / gram0.norm());
  }
  if (!(out.gram_residual <= options.gram_bound)) {
    std::ostringstream os;
    os << "parallel_transport: metric drift " << out.gram_residual << " exceeds " << options.gram_bound
       << "; use a finer step tolerance or lattice";
    throw AccuracyError(os.str());
  }
  return out;
}

// ---------------------------------------------------------------- Berwald and flatness

std::vector<std::vector<Vec>> default_loops(const Lattice& lattice, int subdivisions) {
  if (subdivisions < 1) throw InputError("default_loops: subdivisions must be positive");
  const int n = lattice.dimension();
  const Vec c = lattice.box().center();
  const Vec half = 0.5 * (lattice.box().upper - lattice.box().lower);
  std::vector<std::vector<Vec>> loops;
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      for (double scale : {0.25, 0.5, 0.75}) {
        const double wp = std::min(scale * half[p], half[p] - 2.5 * lattice.spacing(p));
        const double wq = std::min(scale * half[q], half[q] - 2.5 * lattice.spacing(q));
        if (!(wp > 0.0) || !(wq > 0.0)) continue;
        std::array<Vec, 4> corners;
        for (auto& k : corners) k = c;
        corners[0][p] -= wp;
        corners[0][q] -= wq;
        corners[1][p] += wp;
        corners[1][q] -= wq;
        corners[2][p] += wp;
        corners[2][q] += wq;
        corners[3][p] -= wp;
        corners[3][q] += wq;
        std::vector<Vec> loop;
        for (int side = 0; side < 4; ++side) {
          const Vec& from = corners[static_cast<std::size_t>(side)];
          const Vec& to = corners[static_cast<std::size_t>((side + 1) % 4)];
          for (int j = 0; j < subdivisions; ++j) loop.push_back(from + (to - from) * (static_cast<double>(j) / subdivisions));
        }
        loop.push_back(corners[0]);
        loops.push_back(std::move(loop));
      }
    }
  }
  if (loops.empty()) throw InputError("default_loops: lattice too coarse for interior loops");
  return loops;
}

std::vector<Vec> default_probes(int n) {
  if (n == 2) return sphere_directions(2, 16);
  std::vector<Vec> probes;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    probes.push_back(e);
    probes.push_back(-e);
  }
  for (const auto& u : sphere_directions(n, 26)) probes.push_back(u);
  return probes;
}

Lattice berwald_lattice(const FinslerStructure& structure, const BerwaldOptions& options) {
  const int n = structure.dimension();
  const int per_axis = options.grid > 0 ? options.grid : (n == 2 ? 33 : 13);
  return Lattice::uniform(structure.chart(), per_axis);
}

BerwaldResult berwald_defect(const FinslerStructure& structure, const MetricField& field,
                             const std::vector<std::vector<Vec>>& loops, const std::vector<Vec>& probes,
                             const TransportOptions& options) {
  const int n = structure.dimension();
  if (field.dimension() != n) throw InputError("berwald_defect: field dimension mismatch");
  if (loops.empty() || probes.empty()) throw InputError("berwald_defect: need at least one loop and one probe");
  for (const auto& p : probes) {
    if (p.size() != n || !(p.norm() > 0.0)) throw InputError("berwald_defect: probes must be nonzero n-vectors");
  }
  for (const auto& loop : loops) {
    if (loop.size() < 3) throw InputError("berwald_defect: a loop needs at least three points");
    if ((loop.front() - loop.back()).norm() > 1e-9 * (1.0 + loop.front().norm())) {
      throw InputError("berwald_defect: loops must be closed (last point equals the first)");
    }
  }
  std::vector<BerwaldResult> per_loop(loops.size());
  parallel_for(loops.size(), [&](std::size_t l) {
    const auto& loop = loops[l];
    const TransportResult tr = parallel_transport(field, loop, Mat::Identity(n, n), options);
    const MinkowskiNorm f0 = structure.norm_at(loop.front());
    BerwaldResult r;
    r.transports = probes.size();
    r.ode_steps = tr.steps;
    r.max_gram_residual = tr.gram_residual;
    for (std::size_t k = 1; k < loop.size(); ++k) {
      const MinkowskiNorm fk = structure.norm_at(loop[k]);
      for (const auto& xi : probes) {
        const double base = f0(xi);
        r.defect = std::max(r.defect, std::abs(fk(tr.propagators[k] * xi) - base) / base);
      }
    }
    per_loop[l] = r;
  });
  BerwaldResult out;
  for (const auto& r : per_loop) {
    out.defect = std::max(out.defect, r.defect);
    out.max_gram_residual = std::max(out.max_gram_residual, r.max_gram_residual);
    out.transports += r.transports;
    out.ode_steps += r.ode_steps;
  }
  return out;
}

BerwaldResult berwald_defect(const FinslerStructure& structure, const BerwaldOptions& options) {
  const Lattice lat = berwald_lattice(structure, options);
  const MetricField field = bl_field(structure, lat, options.quad);
  const auto loops = options.loops.empty() ? default_loops(lat) : options.loops;
  const auto probes = options.probes.empty() ? default_probes(structure.dimension()) : options.probes;
  return berwald_defect(structure, field, loops, probes, options.transport);
}

namespace {

// Christoffel symbols at a node from central differences of G over +-stride nodes.
Christoffel nodal_christoffel(const MetricField& field, std::vector<int> idx, int stride) {
  const Lattice& lat = field.lattice();
  const int n = lat.dimension();
  std::vector<Mat> dg(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    auto up = idx;
    auto dn = idx;
    up[static_cast<std::size_t>(d)] += stride;
    dn[static_cast<std::size_t>(d)] -= stride;
    dg[static_cast<std::size_t>(d)] = (field.values()[lat.flat_index(up)] - field.values()[lat.flat_index(dn)]) /
                                      (2.0 * stride * lat.spacing(d));
  }
  return christoffel_from(field.values()[lat.flat_index(idx)], dg);
}

// R^a_bcd at a node, flattened, from differences over +-stride nodes (needs 2 * stride nodes of room).
Vec nodal_curvature(const MetricField& field, const std::vector<int>& idx, int stride) {
  const Lattice& lat = field.lattice();
  const int n = lat.dimension();
  const Christoffel g = nodal_christoffel(field, idx, stride);
  std::vector<Christoffel> dgamma(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    auto up = idx;
    auto dn = idx;
    up[static_cast<std::size_t>(c)] += stride;
    dn[static_cast<std::size_t>(c)] -= stride;
    const Christoffel gu = nodal_christoffel(field, up, stride);
    const Christoffel gd = nodal_christoffel(field, dn, stride);
    Christoffel d(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      d[static_cast<std::size_t>(a)] = (gu[static_cast<std::size_t>(a)] - gd[static_cast<std::size_t>(a)]) / (2.0 * stride * lat.spacing(c));
    }
    dgamma[static_cast<std::size_t>(c)] = std::move(d);
  }
  Vec r(n * n * n * n);
  Eigen::Index out = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const auto au = static_cast<std::size_t>(a);
          double v = dgamma[static_cast<std::size_t>(c)][au](d, b) - dgamma[static_cast<std::size_t>(d)][au](c, b);
          for (int e = 0; e < n; ++e) {
            const auto eu = static_cast<std::size_t>(e);
            v += g[au](c, e) * g[eu](d, b) - g[au](d, e) * g[eu](c, b);
          }
          r[out++] = v;
        }
  return r;
}

}  // namespace

double flat_residual(const MetricField& field, bool richardson) {
  const Lattice& lat = field.lattice();
  const int n = lat.dimension();
  int min_count = *std::min_element(lat.counts().begin(), lat.counts().end());
  if (min_count < 5) throw InputError("flat_residual: need at least 5 nodes per axis");
  const bool extrapolate = richardson && min_count >= 9;
  const int margin = extrapolate ? 4 : 2;
  double worst = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const auto idx = lat.multi_index(i);
    bool inner = true;
    for (int d = 0; d < n; ++d) {
      const int k = idx[static_cast<std::size_t>(d)];
      inner = inner && k >= margin && k <= lat.counts()[static_cast<std::size_t>(d)] - 1 - margin;
    }
    if (!inner) continue;
    Vec r = nodal_curvature(field, idx, 1);
    if (extrapolate) r = (4.0 * r - nodal_curvature(field, idx, 2)) / 3.0;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

LocalMinkowskiResult is_locally_minkowski(const FinslerStructure& structure, const BerwaldOptions& options) {
  const Lattice lat = berwald_lattice(structure, options);
  const MetricField field = bl_field(structure, lat, options.quad);
  const auto loops = options.loops.empty() ? default_loops(lat) : options.loops;
  const auto probes = options.probes.empty() ? default_probes(structure.dimension()) : options.probes;
  const BerwaldResult b = berwald_defect(structure, field, loops, probes, options.transport);
  LocalMinkowskiResult out;
  out.flat_residual = flat_residual(field, options.richardson);
  out.berwald_defect = b.defect;
  out.max_gram_residual = b.max_gram_residual;
  out.locally_minkowski = out.flat_residual < options.flat_tolerance && out.berwald_defect < options.defect_tolerance;
  out.verdict = out.locally_minkowski ? "locally Minkowski" : "not locally Minkowski";
  return out;
}

}  // namespace finsler
