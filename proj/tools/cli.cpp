#include "cli.hpp"

#include "verify.hpp"

#include "finsler/binet_legendre.hpp"
#include "finsler/examples.hpp"
#include "finsler/invariants.hpp"
#include "finsler/json_io.hpp"
#include "finsler/manifold.hpp"
#include "finsler/minkowski.hpp"
#include "finsler/structure.hpp"

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>

namespace finsler::cli {

namespace {

using nlohmann::json;

// Table output shared by the fingerprint and field commands.
struct Table {
  std::string kind;  // "fingerprint" or "field"
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

constexpr int kTableVersion = 1;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_table(const Table& t, const std::string& format, std::ostream& os) {
  if (format == "json") {
    json j = {{"format", "finsler-" + t.kind}, {"version", kTableVersion}, {"columns", t.columns}, {"rows", t.rows}};
    os << j.dump(2) << "\n";
    return;
  }
  os << "# finsler-" << t.kind << " csv v" << kTableVersion << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << "\n";
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

Table read_table(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  Table t;
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    json j;
    try {
      j = json::parse(text);
      t.columns = j.at("columns").get<std::vector<std::string>>();
      t.rows = j.at("rows").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw InputError(path + ": expected {\"columns\": [...], \"rows\": [[...]]}: " + e.what());
    }
  } else {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (t.columns.empty()) {
        t.columns = cells;
        continue;
      }
      if (cells.size() != t.columns.size()) {
        throw InputError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.columns.size()) + " values");
      }
      std::vector<double> row;
      for (const auto& c : cells) {
        char* end = nullptr;
        const double v = std::strtod(c.c_str(), &end);
        if (end == c.c_str() || *end != '\0') throw InputError(path + ":" + std::to_string(line_no) + ": bad number '" + c + "'");
        row.push_back(v);
      }
      t.rows.push_back(std::move(row));
    }
  }
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw InputError(path + ": row length differs from the header");
  }
  if (t.columns.empty()) throw InputError(path + ": missing header");
  return t;
}

// Fingerprint vectors of a table: every column whose name is not a coordinate x<k>.
std::vector<Fingerprint> fingerprint_cloud(const Table& t) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    const std::string& name = t.columns[c];
    const bool coordinate = name.size() > 1 && name[0] == 'x' &&
                            std::all_of(name.begin() + 1, name.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
    if (!coordinate) keep.push_back(c);
  }
  std::vector<Fingerprint> cloud;
  for (const auto& row : t.rows) {
    Fingerprint f(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) f[static_cast<Eigen::Index>(k)] = row[keep[k]];
    cloud.push_back(f);
  }
  return cloud;
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& writer) {
  if (path.empty() || path == "-") {
    writer(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write " + path);
  writer(file);
  if (!file) throw InputError("write failed for " + path);
}

std::vector<int> parse_grid(const std::string& text, int dimension) {
  std::vector<int> counts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(part, &used);
      if (used != part.size() || k < 1) throw std::invalid_argument(part);
      counts.push_back(k);
    } catch (const std::exception&) {
      throw InputError("grid: expected positive integers separated by 'x', got '" + text + "'");
    }
  }
  if (counts.size() == 1) counts.assign(static_cast<std::size_t>(dimension), counts[0]);
  if (static_cast<int>(counts.size()) != dimension) {
    throw InputError("grid: " + std::to_string(counts.size()) + " counts for a " + std::to_string(dimension) + "-dimensional chart");
  }
  return counts;
}

Vec parse_point(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (end == part.c_str() || *end != '\0') throw InputError("point: bad coordinate '" + part + "'");
    values.push_back(v);
  }
  return Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<std::string> coordinate_columns(int n) {
  std::vector<std::string> c;
  for (int d = 0; d < n; ++d) c.push_back("x" + std::to_string(d));
  return c;
}

struct QuadFlags {
  int level = 3;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  bool fixed = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--quad-level", level, "Starting quadrature refinement level")->capture_default_str()->check(CLI::Range(0, 12));
    cmd->add_option("--mc-seed", seed, "Monte Carlo seed (dimension >= 4 only)")->capture_default_str();
    cmd->add_option("--tol", tol, "Relative change accepted between refinement levels")->capture_default_str();
    cmd->add_flag("--fixed-level", fixed, "Use --quad-level without refinement");
  }

  QuadratureOptions options() const {
    QuadratureOptions o;
    o.level = level;
    o.max_level = std::max(level, o.max_level);
    o.seed = seed;
    o.tolerance = tol;
    o.converge = !fixed;
    return o;
  }
};

json bl_json(const BLResult& r, std::uint64_t seed) {
  return {{"metric", matrix_to_json(r.metric.matrix())},
          {"dual", matrix_to_json(r.dual.matrix())},
          {"volume", r.volume},
          {"condition", {{"metric", r.metric.condition()}, {"dual", r.dual.condition()}}},
          {"quadrature",
           {{"scheme", to_string(r.scheme)},
            {"level", r.level},
            {"nodes", r.nodes},
            {"achieved_tolerance", r.achieved_tolerance},
            {"converged", r.converged},
            {"seed", r.scheme == QuadratureScheme::MonteCarlo ? json(seed) : json(nullptr)}}}};
}

json ellipsoid_json(const Ellipsoid& e) {
  return {{"shape", matrix_to_json(e.shape.matrix())}, {"scale", e.scale}, {"volume", e.volume()}};
}

// The norm named by --norm, or the norm of --structure at --at (chart center by default).
struct NormSource {
  std::string norm_path;
  std::string structure_path;
  std::string at;

  void attach(CLI::App* cmd) {
    auto* n = cmd->add_option("--norm", norm_path, "Norm JSON file");
    auto* s = cmd->add_option("--structure", structure_path, "Structure JSON file");
    cmd->add_option("--at", at, "Chart point x1,x2,... for --structure (default: chart center)")->needs(s);
    n->excludes(s);
  }

  MinkowskiNorm load(json& context) const {
    if (!norm_path.empty()) {
      MinkowskiNorm f = norm_from_json(read_json(norm_path));
      require_valid(f);
      context["family"] = to_string(f.family());
      context["dimension"] = f.dimension();
      return f;
    }
    if (structure_path.empty()) throw InputError("one of --norm or --structure is required");
    const FinslerStructure s = structure_from_json(read_json(structure_path));
    const Vec x = at.empty() ? s.chart().center() : parse_point(at);
    if (x.size() != s.dimension()) throw InputError("--at: point dimension differs from the chart");
    MinkowskiNorm f = s.norm_at(x);
    require_valid(f);
    context["family"] = s.family();
    context["dimension"] = s.dimension();
    context["point"] = vector_to_json(x);
    return f;
  }
};

void print_examples(std::ostream& out) {
  std::size_t width = 0;
  for (const auto& e : builtin_examples()) width = std::max(width, e.name.size());
  for (const auto& e : builtin_examples()) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << e.name << std::setw(11) << e.kind << e.formula << "\n"
        << std::string(width + 13, ' ') << e.note << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binet-Legendre metrics, conformal invariants and Berwald checks for Finsler structures", "finsler"};
  app.require_subcommand(1);
  std::function<int()> action;

  // metric
  NormSource metric_src;
  QuadFlags metric_quad;
  auto* metric = app.add_subcommand("metric", "Binet-Legendre metric G, dual M*, unit ball volume, condition numbers");
  metric_src.attach(metric);
  metric_quad.attach(metric);
  metric->callback([&] {
    action = [&] {
      json j;
      const MinkowskiNorm f = metric_src.load(j);
      j.update(bl_json(compute_bl(f, metric_quad.options()), metric_quad.seed));
      out << j.dump(2) << "\n";
      return kExitOk;
    };
  });

  // ellipsoid
  NormSource ell_src;
  QuadFlags ell_quad;
  auto* ellipsoid = app.add_subcommand("ellipsoid", "Binet and Legendre ellipsoids");
  ell_src.attach(ellipsoid);
  ell_quad.attach(ellipsoid);
  ellipsoid->callback([&] {
    action = [&] {
      json j;
      const MinkowskiNorm f = ell_src.load(j);
      const BLResult r = compute_bl(f, ell_quad.options());
      const int n = f.dimension();
      const Ellipsoid binet{r.dual, 1.0};
      const Ellipsoid legendre{r.metric, std::pow(r.volume / unit_ball_volume_euclidean(n), 1.0 / (n + 2))};
      j["binet"] = ellipsoid_json(binet);
      j["legendre"] = ellipsoid_json(legendre);
      j["unit_ball_volume"] = r.volume;
      out << j.dump(2) << "\n";
      return kExitOk;
    };
  });

  // invariants
  NormSource inv_src;
  QuadFlags inv_quad;
  auto* invariants = app.add_subcommand("invariants", "Quermassintegrals, roundness mu and M, isotropy defect");
  inv_src.attach(invariants);
  inv_quad.attach(invariants);
  invariants->callback([&] {
    action = [&] {
      json j;
      const MinkowskiNorm f = inv_src.load(j);
      const BLResult r = compute_bl(f, inv_quad.options());
      const Quermassintegrals w = quermassintegrals(f, r.metric, inv_quad.options());
      const Roundness rd = roundness(f, r.metric);
      j["metric"] = matrix_to_json(r.metric.matrix());
      j["quermassintegrals"] = w.values;
      j["mu"] = rd.mu;
      j["M"] = rd.big_m;
      j["isotropy_defect"] = rd.big_m / rd.mu - 1.0;
      std::vector<double> fp(w.values.begin(), w.values.end() - 1);
      fp.push_back(rd.mu);
      fp.push_back(rd.big_m);
      j["fingerprint"] = fp;
      out << j.dump(2) << "\n";
      return kExitOk;
    };
  });

  // fingerprint
  std::string fp_structure, fp_grid = "8", fp_out, fp_format = "csv";
  QuadFlags fp_quad;
  auto* fingerprint = app.add_subcommand("fingerprint", "Fingerprint cloud (W_0..W_{n-1}, mu, M) over chart cell centers");
  fingerprint->add_option("--structure", fp_structure, "Structure JSON file")->required();
  fingerprint->add_option("--grid", fp_grid, "Cells per axis, e.g. 32x32 or 32")->capture_default_str();
  fingerprint->add_option("--out", fp_out, "Output file (default: stdout)");
  fingerprint->add_option("--format", fp_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  fp_quad.attach(fingerprint);
  fingerprint->callback([&] {
    action = [&] {
      const FinslerStructure s = structure_from_json(read_json(fp_structure));
      const int n = s.dimension();
      if (n != 2 && n != 3) throw NotImplementedError("fingerprint: only 2- and 3-dimensional structures are supported");
      const auto counts = parse_grid(fp_grid, n);
      std::size_t total = 1;
      for (int c : counts) total *= static_cast<std::size_t>(c);
      Table t{"fingerprint", coordinate_columns(n), {}};
      for (int j = 0; j < n; ++j) t.columns.push_back("W" + std::to_string(j));
      t.columns.push_back("mu");
      t.columns.push_back("M");
      t.rows.resize(total);
      const Vec width = s.chart().upper - s.chart().lower;
      parallel_for(total, [&](std::size_t i) {
        std::size_t rest = i;
        Vec x(n);
        for (int d = 0; d < n; ++d) {
          const auto c = static_cast<std::size_t>(counts[static_cast<std::size_t>(d)]);
          x[d] = s.chart().lower[d] + (static_cast<double>(rest % c) + 0.5) * width[d] / static_cast<double>(c);
          rest /= c;
        }
        const Fingerprint f = fingerprint_point(s.norm_at(x), fp_quad.options());
        std::vector<double> row(x.data(), x.data() + n);
        row.insert(row.end(), f.data(), f.data() + f.size());
        t.rows[i] = std::move(row);
      });
      emit(fp_out, out, [&](std::ostream& os) { write_table(t, fp_format, os); });
      return kExitOk;
    };
  });

  // compare
  std::string cmp_a, cmp_b;
  double cmp_tol = 1e-3;
  bool cmp_assert = false;
  auto* compare = app.add_subcommand("compare", "Normalized Hausdorff comparison of two fingerprint clouds");
  compare->add_option("--a", cmp_a, "First cloud (CSV or JSON)")->required();
  compare->add_option("--b", cmp_b, "Second cloud (CSV or JSON)")->required();
  compare->add_option("--tol", cmp_tol, "Normalized Hausdorff tolerance")->capture_default_str();
  compare->add_flag("--assert", cmp_assert, "Exit 1 when the clouds are distinguishable");
  compare->callback([&] {
    action = [&] {
      const FingerprintComparison c =
          compare_fingerprints(fingerprint_cloud(read_table(cmp_a)), fingerprint_cloud(read_table(cmp_b)), cmp_tol);
      json j = {{"hausdorff", c.hausdorff},
                {"quantile95", c.quantile95},
                {"scale", vector_to_json(c.scale)},
                {"tolerance", cmp_tol},
                {"distinguishable", c.distinguishable},
                {"verdict", c.verdict}};
      out << j.dump(2) << "\n";
      return cmp_assert && c.distinguishable ? kExitNegative : kExitOk;
    };
  });

  // field
  std::string fld_structure, fld_grid = "17", fld_out, fld_format = "csv";
  QuadFlags fld_quad;
  auto* field = app.add_subcommand("field", "Binet-Legendre metric at every node of a lattice including the chart faces");
  field->add_option("--structure", fld_structure, "Structure JSON file")->required();
  field->add_option("--grid", fld_grid, "Nodes per axis (>= 4), e.g. 64x64 or 64")->capture_default_str();
  field->add_option("--out", fld_out, "Output file (default: stdout)");
  field->add_option("--format", fld_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  fld_quad.attach(field);
  field->callback([&] {
    action = [&] {
      const FinslerStructure s = structure_from_json(read_json(fld_structure));
      const int n = s.dimension();
      const Lattice lat(s.chart(), parse_grid(fld_grid, n));
      const MetricField f = bl_field(s, lat, fld_quad.options());
      Table t{"field", coordinate_columns(n), {}};
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) t.columns.push_back("G" + std::to_string(a) + std::to_string(b));
      for (std::size_t i = 0; i < lat.size(); ++i) {
        const Vec x = lat.node(i);
        std::vector<double> row(x.data(), x.data() + n);
        const Mat& g = f.values()[i];
        for (int a = 0; a < n; ++a)
          for (int b = a; b < n; ++b) row.push_back(g(a, b));
        t.rows.push_back(std::move(row));
      }
      emit(fld_out, out, [&](std::ostream& os) { write_table(t, fld_format, os); });
      return kExitOk;
    };
  });

  // berwald
  std::string bw_structure;
  BerwaldOptions bw;
  bool bw_assert = false, bw_plain = false;
  auto* berwald = app.add_subcommand("berwald", "Berwald defect, flatness residual and local-Minkowski verdict");
  berwald->add_option("--structure", bw_structure, "Structure JSON file")->required();
  berwald->add_option("--grid", bw.grid, "Lattice nodes per axis (0: 33 in 2D, 13 in 3D)")->capture_default_str();
  berwald->add_option("--defect-tol", bw.defect_tolerance, "Berwald defect threshold")->capture_default_str();
  berwald->add_option("--flat-tol", bw.flat_tolerance, "Curvature threshold")->capture_default_str();
  berwald->add_flag("--no-richardson", bw_plain, "Curvature from single-spacing differences only");
  berwald->add_flag("--assert", bw_assert, "Exit 1 unless the structure is locally Minkowski");
  berwald->callback([&] {
    action = [&] {
      const FinslerStructure s = structure_from_json(read_json(bw_structure));
      bw.richardson = !bw_plain;
      if (bw.grid != 0 && bw.grid < 9) throw InputError("--grid: at least 9 nodes per axis");
      const LocalMinkowskiResult r = is_locally_minkowski(s, bw);
      json j = {{"family", s.family()},
                {"grid", berwald_lattice(s, bw).counts()},
                {"defect", r.berwald_defect},
                {"flat_residual", r.flat_residual},
                {"max_gram_residual", r.max_gram_residual},
                {"defect_tolerance", bw.defect_tolerance},
                {"flat_tolerance", bw.flat_tolerance},
                {"locally_minkowski", r.locally_minkowski},
                {"verdict", r.verdict}};
      out << j.dump(2) << "\n";
      return bw_assert && !r.locally_minkowski ? kExitNegative : kExitOk;
    };
  });

  // verify
  std::string vf_suite = "all";
  std::uint64_t vf_seed = 1;
  std::string vf_format = "table";
  auto* verify = app.add_subcommand("verify", "Property suite with seeded random inputs; exit 1 if any check fails");
  verify->add_option("--suite", vf_suite, "bl-properties (alias theorem-1.2), ellipsoids (alias appendix) or all")->capture_default_str();
  verify->add_option("--seed", vf_seed, "Random seed")->capture_default_str();
  verify->add_option("--format", vf_format, "table or json")->check(CLI::IsMember({"table", "json"}))->capture_default_str();
  verify->callback([&] {
    action = [&] {
      const auto rows = run_suite(vf_suite, vf_seed);
      const bool ok = std::all_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.pass; });
      if (vf_format == "json") {
        json j = json::array();
        for (const auto& r : rows) {
          j.push_back({{"suite", r.suite}, {"check", r.check}, {"residual", r.residual}, {"tolerance", r.tolerance}, {"pass", r.pass}});
        }
        out << json{{"seed", vf_seed}, {"checks", j}, {"pass", ok}}.dump(2) << "\n";
      } else {
        std::size_t width = 0;
        for (const auto& r : rows) width = std::max(width, r.check.size());
        out << std::left << std::setw(13) << "suite" << std::setw(static_cast<int>(width) + 2) << "check" << std::setw(13)
            << "residual" << std::setw(13) << "tolerance"
            << "status\n";
        for (const auto& r : rows) {
          char res[32], tol[32];
          std::snprintf(res, sizeof res, "%.3e", r.residual);
          std::snprintf(tol, sizeof tol, "%.3e", r.tolerance);
          out << std::setw(13) << r.suite << std::setw(static_cast<int>(width) + 2) << r.check << std::setw(13) << res
              << std::setw(13) << tol << (r.pass ? "PASS" : "FAIL") << "\n";
        }
      }
      return ok ? kExitOk : kExitNegative;
    };
  });

  // examples
  bool ex_list = false;
  std::string ex_out, ex_show;
  auto* examples = app.add_subcommand("examples", "List built-in norms and structures or write their JSON specs");
  examples->add_flag("--list", ex_list, "Print names, formulas and notes");
  examples->add_option("--out", ex_out, "Directory receiving <name>.json for every example");
  examples->add_option("--show", ex_show, "Print the JSON spec of one example");
  examples->callback([&] {
    action = [&] {
      if (!ex_show.empty()) out << builtin_example(ex_show).spec.dump(2) << "\n";
      if (!ex_out.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(ex_out, ec);
        if (ec) throw InputError("cannot create " + ex_out + ": " + ec.message());
        for (const auto& e : builtin_examples()) {
          const std::string path = (std::filesystem::path(ex_out) / (e.name + ".json")).string();
          emit(path, out, [&](std::ostream& os) { os << e.spec.dump(2) << "\n"; });
        }
        out << "wrote " << builtin_examples().size() << " examples to " << ex_out << "\n";
      }
      if (ex_list || (ex_show.empty() && ex_out.empty())) print_examples(out);
      return kExitOk;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    return action();
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NotImplementedError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace finsler::cli
