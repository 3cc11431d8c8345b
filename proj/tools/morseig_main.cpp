#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "morseig/families.hpp"
#include "morseig/grassmann.hpp"
#include "morseig/pipeline.hpp"

using namespace morseig;

namespace {

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw std::invalid_argument("empty entry in '" + csv + "'");
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    if (pos != item.size()) throw std::invalid_argument("bad number '" + item + "'");
  }
  if (out.empty()) throw std::invalid_argument("no values in '" + csv + "'");
  return out;
}

IntPoly parse_poly(const std::string& csv) {
  std::vector<std::int64_t> coeffs;
  for (double v : parse_doubles(csv)) {
    auto c = static_cast<std::int64_t>(std::llround(v));
    if (std::abs(v - static_cast<double>(c)) > 1e-9)
      throw std::invalid_argument("polynomial coefficients must be integers");
    coeffs.push_back(c);
  }
  return IntPoly(std::move(coeffs));
}

Field parse_field(const std::string& name) {
  if (name == "real") return Field::Real;
  if (name == "complex") return Field::Complex;
  throw std::invalid_argument("field must be 'real' or 'complex'");
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  f << text;
}

nlohmann::json trace_json(const TraceResult& tr) {
  nlohmann::json j;
  j["closed"] = tr.closed;
  j["hit_condition_boundary"] = tr.hit_condition_boundary;
  j["length"] = tr.length;
  j["points"] = nlohmann::json::array();
  for (const auto& p : tr.points)
    j["points"].push_back(std::vector<double>(p.data(), p.data() + p.size()));
  return j;
}

struct ToleranceFlags {
  double tol_def = 1e-7;
  double tol_hess = 1e-6;
  double tol_res = 1e-10;
  double tol_grad = 1e-8;
  double tol_cluster = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol-def", tol_def, "definiteness margin");
    cmd->add_option("--tol-hess", tol_hess, "Hessian degeneracy margin");
    cmd->add_option("--tol-res", tol_res, "stratum residual acceptance");
    cmd->add_option("--tol-grad", tol_grad, "gradient polish target");
    cmd->add_option("--tol-cluster", tol_cluster, "eigenvalue clustering tolerance");
  }
  ScanOptions scan_options() const {
    ScanOptions o;
    o.cluster_tol = tol_cluster;
    o.tau_def = tol_def;
    o.tau_hess = tol_hess;
    o.tau_res = tol_res;
    o.grad_tol = tol_grad;
    return o;
  }
  ClassifyOptions classify_options() const {
    ClassifyOptions o;
    o.cluster_tol = tol_cluster;
    o.tau_def = tol_def;
    o.tau_hess = tol_hess;
    return o;
  }
  StratumOptions stratum_options() const {
    StratumOptions o;
    o.cluster_tol = tol_cluster;
    o.tau_res = tol_res;
    o.tau_hess = tol_hess;
    o.tau_def = tol_def;
    return o;
  }
};

int run_table(int nu, const std::string& field, const std::string& format,
              const std::string& out) {
  ContributionTable table = emit_table(nu, parse_field(field));
  if (format == "md") {
    emit(table.markdown(), out);
  } else if (format == "csv") {
    emit(table.csv(), out);
  } else if (format == "json") {
    nlohmann::json j;
    j["max_nu"] = table.max_nu;
    j["field"] = field;
    j["rows"] = nlohmann::json::array();
    for (int v = 1; v <= table.max_nu; ++v) {
      nlohmann::json row = nlohmann::json::array();
      for (int i = 1; i <= v; ++i) row.push_back(table.cell(v, i).str());
      j["rows"].push_back(row);
    }
    emit(j.dump(2), out);
  } else {
    throw std::invalid_argument("table formats: md, csv, json");
  }
  return 0;
}

int run_classify(const std::string& family, const std::string& x_csv, int k,
                 const ToleranceFlags& tols, std::uint64_t seed, const std::string& out) {
  MatrixFamily fam = load_family(family);
  std::vector<double> xs = parse_doubles(x_csv);
  if (static_cast<int>(xs.size()) != fam.d)
    throw std::invalid_argument("--x needs " + std::to_string(fam.d) + " coordinates");
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xs.data(), xs.size());
  ClassifyOptions opts = tols.classify_options();
  opts.seed = seed;
  emit(classify_point(fam, x, k, opts).to_json(), out);
  return 0;
}

int run_scan(const std::string& family, int k, int grid, const ToleranceFlags& tols,
             std::uint64_t seed, const std::string& manifold, const std::string& format,
             const std::string& out) {
  MatrixFamily fam = load_family(family);
  ScanOptions opts = tols.scan_options();
  opts.seed = seed;
  if (!manifold.empty()) opts.manifold_poincare = parse_poly(manifold);
  if (format == "csv") {
    // eigenvalue surface samples for plotting; no verdict involved
    emit(contour_csv(fam, k, grid), out);
    return 0;
  }
  MorseReport rep = scan(fam, k, grid, opts);
  if (format == "json")
    emit(rep.to_json(), out);
  else if (format == "md")
    emit(rep.markdown(), out);
  else
    throw std::invalid_argument("scan formats: json, md, csv");
  return exit_code(rep);
}

int run_vanhove(const std::string& family, int grid, const ToleranceFlags& tols,
                std::uint64_t seed, const std::string& manifold, const std::string& format,
                const std::string& out) {
  MatrixFamily fam = load_family(family);
  ScanOptions opts = tols.scan_options();
  opts.seed = seed;
  if (!manifold.empty()) opts.manifold_poincare = parse_poly(manifold);
  GridCache cache = grid_eigenvalues(fam, grid);
  std::vector<MorseReport> reports;
  for (int k = 1; k <= fam.n; ++k) reports.push_back(scan(fam, k, grid, opts, &cache));

  VanHoveTable vh = van_hove_table(reports, fam.d);
  MinMaxCheck mm = minmax_separation(reports);
  std::vector<ConseqCheck> conseq;
  for (const auto& rep : reports) conseq.push_back(conseq_check(rep));

  bool violated = !vh.all_pass || !mm.all_pass;
  bool inconclusive = vh.inconclusive;
  for (const auto& rep : reports) violated = violated || !rep.division.satisfied;
  for (const auto& cc : conseq) violated = violated || (cc.applicable && !cc.pass);

  if (format == "json") {
    nlohmann::json j;
    j["family"] = fam.name;
    j["grid"] = grid;
    j["reports"] = nlohmann::json::array();
    for (const auto& rep : reports) j["reports"].push_back(nlohmann::json::parse(rep.to_json()));
    j["van_hove"] = nlohmann::json::parse(vh.to_json());
    j["minmax"] = nlohmann::json::parse(mm.to_json());
    j["conseq"] = nlohmann::json::array();
    for (const auto& cc : conseq) j["conseq"].push_back(nlohmann::json::parse(cc.to_json()));
    j["exit"] = exit_code(violated, inconclusive);
    emit(j.dump(2), out);
  } else if (format == "md") {
    std::ostringstream os;
    os << "# Branch survey: " << fam.name << ", grid " << grid << "^" << fam.d << "\n\n";
    for (const auto& rep : reports)
      os << "- k = " << rep.k << ": P = " << rep.p_morse.str() << ", "
         << (rep.division.satisfied ? "satisfied" : "violated")
         << (rep.inconclusive ? " (inconclusive)" : "") << "\n";
    os << "\n## Saddle-count bounds\n\n" << vh.markdown();
    os << "\n## Extrema interlacing\n\n" << mm.markdown();
    emit(os.str(), out);
  } else {
    throw std::invalid_argument("vanhove formats: json, md");
  }
  return exit_code(violated, inconclusive);
}

int run_hf_check(int trials, std::uint64_t seed, double tol, const std::string& out) {
  HfCheck hc = hf_check(trials, seed, tol);
  emit(hc.to_json(), out);
  return hc.pass ? 0 : 2;
}

int run_trace(const std::string& family, const std::string& x_csv, int k, double step,
              int max_steps, const ToleranceFlags& tols, const std::string& format,
              const std::string& out) {
  MatrixFamily fam = load_family(family);
  std::vector<double> xs = parse_doubles(x_csv);
  if (static_cast<int>(xs.size()) != fam.d)
    throw std::invalid_argument("--x needs " + std::to_string(fam.d) + " coordinates");
  Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(xs.data(), xs.size());
  StratumOptions opts = tols.stratum_options();
  Projection p = project_near(fam, x0, k, opts);
  if (!p.converged)
    throw std::runtime_error("no stratum near the seed point (projection did not converge)");
  TraceResult tr = trace_stratum(fam, p.x, k, step, max_steps, opts);
  if (format == "csv")
    emit(polyline_csv(tr), out);
  else if (format == "json")
    emit(trace_json(tr).dump(2), out);
  else
    throw std::invalid_argument("trace formats: csv, json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical points and Morse data of ordered eigenvalue branches"};
  app.require_subcommand(1);

  std::string family, x_csv, out, manifold;
  std::string format_table = "md", format_scan = "json", format_vanhove = "json",
              format_trace = "csv";
  int k = 1, grid = 32, nu = 8, trials = 200, max_steps = 500;
  double step = 0.1, hf_tol = 1e-5;
  std::uint64_t seed = 1, hf_seed = 20260819;
  std::string field = "real";
  ToleranceFlags tols;

  CLI::App* table = app.add_subcommand("table", "non-smooth contribution table");
  table->add_option("--nu", nu, "largest multiplicity row")->check(CLI::Range(1, 16));
  table->add_option("--field", field, "real or complex");
  table->add_option("--format", format_table, "md, csv, json");
  table->add_option("--out", out, "write to file instead of stdout");

  CLI::App* classify = app.add_subcommand("classify", "classify one parameter point");
  classify->add_option("--family", family, "builtin name or spec JSON path")->required();
  classify->add_option("--x", x_csv, "comma-separated coordinates")->required();
  classify->add_option("--k", k, "branch index (1-based)");
  classify->add_option("--seed", seed, "search seed");
  classify->add_option("--out", out, "write to file instead of stdout");
  tols.attach(classify);

  CLI::App* scan_cmd = app.add_subcommand("scan", "critical point survey of one branch");
  scan_cmd->add_option("--family", family, "builtin name or spec JSON path")->required();
  scan_cmd->add_option("--k", k, "branch index (1-based)");
  scan_cmd->add_option("--grid", grid, "grid resolution per dimension");
  scan_cmd->add_option("--seed", seed, "scan seed");
  scan_cmd->add_option("--manifold-poincare", manifold,
                       "Poincare coefficients, constant term first (default: torus)");
  scan_cmd->add_option("--format", format_scan, "json, md, or csv (eigenvalue surface)");
  scan_cmd->add_option("--out", out, "write to file instead of stdout");
  tols.attach(scan_cmd);

  CLI::App* vanhove = app.add_subcommand("vanhove", "all branches: bounds and interlacing");
  vanhove->add_option("--family", family, "builtin name or spec JSON path")->required();
  vanhove->add_option("--grid", grid, "grid resolution per dimension");
  vanhove->add_option("--seed", seed, "scan seed");
  vanhove->add_option("--manifold-poincare", manifold,
                      "Poincare coefficients, constant term first (default: torus)");
  vanhove->add_option("--format", format_vanhove, "json or md");
  vanhove->add_option("--out", out, "write to file instead of stdout");
  tols.attach(vanhove);

  CLI::App* hf = app.add_subcommand("hf-check", "first-order slope audit");
  hf->add_option("--trials", trials, "random families to draw");
  hf->add_option("--seed", hf_seed, "draw seed");
  hf->add_option("--tol", hf_tol, "max relative slope error");
  hf->add_option("--out", out, "write to file instead of stdout");

  CLI::App* trace = app.add_subcommand("trace", "follow a one-dimensional stratum");
  trace->add_option("--family", family, "builtin name or spec JSON path")->required();
  trace->add_option("--x", x_csv, "seed coordinates (projected onto the stratum)")->required();
  trace->add_option("--k", k, "branch index (1-based)");
  trace->add_option("--step", step, "arc-length step");
  trace->add_option("--max-steps", max_steps, "step budget");
  trace->add_option("--format", format_trace, "csv or json");
  trace->add_option("--out", out, "write to file instead of stdout");
  tols.attach(trace);

  CLI11_PARSE(app, argc, argv);

  try {
    if (table->parsed()) return run_table(nu, field, format_table, out);
    if (classify->parsed()) return run_classify(family, x_csv, k, tols, seed, out);
    if (scan_cmd->parsed())
      return run_scan(family, k, grid, tols, seed, manifold, format_scan, out);
    if (vanhove->parsed())
      return run_vanhove(family, grid, tols, seed, manifold, format_vanhove, out);
    if (hf->parsed()) return run_hf_check(trials, hf_seed, hf_tol, out);
    if (trace->parsed())
      return run_trace(family, x_csv, k, step, max_steps, tols, format_trace, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
