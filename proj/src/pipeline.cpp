#include "morseig/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "morseig/numdiff.hpp"
#include "morseig/spectral.hpp"

namespace morseig {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_coord(double v) {
  double w = std::fmod(v, kTwoPi);
  if (w < 0) w += kTwoPi;
  if (w >= kTwoPi) w = 0;  // fmod can land exactly on the period
  return w;
}

Eigen::VectorXd wrap_point(Eigen::VectorXd x) {
  for (int j = 0; j < x.size(); ++j) x[j] = wrap_coord(x[j]);
  return x;
}

double torus_dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0;
  for (int j = 0; j < a.size(); ++j) {
    double r = std::remainder(a[j] - b[j], kTwoPi);
    s += r * r;
  }
  return std::sqrt(s);
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int j = 0; j < a.size(); ++j) {
    if (a[j] < b[j]) return true;
    if (a[j] > b[j]) return false;
  }
  return false;
}

std::string point_str(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << std::setprecision(3) << "(";
  for (int j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
  os << ")";
  return os.str();
}

std::string num_str(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

nlohmann::json poly_json(const IntPoly& p) {
  nlohmann::json j;
  j["coeffs"] = p.coeffs();
  j["str"] = p.str();
  return j;
}

nlohmann::json point_json(const CriticalPointReport& r) {
  nlohmann::json j;
  j["basin"] = r.basin;
  j["classification"] = nlohmann::json::parse(r.cls.to_json());
  j["value"] = r.value;
  j["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
  return j;
}

nlohmann::json cmu_json(const std::map<int, int>& c_mu) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [mu, count] : c_mu) j[std::to_string(mu)] = count;
  return j;
}

struct Candidate {
  Eigen::VectorXd x;
  double score = 0;  // residual / gradient norm; lower wins a merge
  int basin = -1;
  bool stratum = false;
};

// Newton polish of lambda_k along the stratum tangent. Recharts after
// every accepted step so the frame and tangent stay current. Returns
// the final restricted gradient norm, or nullopt when a projection or
// chart fails mid-polish.
std::optional<double> polish_on_stratum(const MatrixFamily& fam, int k, Eigen::VectorXd& y,
                                        const StratumOptions& sopts, double target,
                                        double step_cap) {
  for (int iter = 0; iter < 25; ++iter) {
    StratumChart ch = make_chart(fam, y, k, sopts);
    Eigen::MatrixXd T = tangent_basis(fam, y, ch);
    const int m = static_cast<int>(T.cols());
    if (m == 0) return 0.0;
    const Eigen::VectorXd base = y;
    ScalarFn val = [&](const Eigen::VectorXd& u) {
      Projection q = project_to_stratum(fam, base + T * u, ch, sopts);
      if (!q.converged) throw std::runtime_error("projection lost the stratum");
      return eig_sorted(fam.eval(q.x)).eigenvalues[k - 1];
    };
    const double gstep = 1e-5 * (1 + y.norm());
    Eigen::VectorXd g;
    try {
      g = fd_gradient(val, Eigen::VectorXd::Zero(m), gstep);
    } catch (const std::runtime_error&) {
      return std::nullopt;
    }
    if (g.norm() <= target) return g.norm();
    Eigen::MatrixXd H;
    try {
      H = fd_hessian(val, Eigen::VectorXd::Zero(m), 1e-3 * (1 + y.norm()));
    } catch (const std::runtime_error&) {
      return std::nullopt;
    }
    Eigen::VectorXd delta = H.ldlt().solve(-g);
    if (!delta.allFinite() || delta.norm() > step_cap)
      delta = -g * (step_cap / std::max(g.norm(), step_cap));
    Projection q = project_to_stratum(fam, y + T * delta, ch, sopts);
    if (!q.converged) return std::nullopt;
    y = q.x;
  }
  // out of iterations: report the last gradient size via one more chart
  StratumChart ch = make_chart(fam, y, k, sopts);
  Eigen::MatrixXd T = tangent_basis(fam, y, ch);
  if (T.cols() == 0) return 0.0;
  ScalarFn val = [&](const Eigen::VectorXd& u) {
    Projection q = project_to_stratum(fam, y + T * u, ch, sopts);
    if (!q.converged) throw std::runtime_error("projection lost the stratum");
    return eig_sorted(fam.eval(q.x)).eigenvalues[k - 1];
  };
  return fd_gradient(val, Eigen::VectorXd::Zero(T.cols()), 1e-5 * (1 + y.norm())).norm();
}

// Damped Newton on the finite-difference gradient of the smooth branch.
// Returns the final gradient norm, or nullopt when no step improves it.
std::optional<double> polish_smooth(const MatrixFamily& fam, int k, Eigen::VectorXd& x,
                                    double target, double step_cap) {
  ScalarFn branch = [&](const Eigen::VectorXd& p) {
    return eig_sorted(fam.eval(p)).eigenvalues[k - 1];
  };
  double gnorm = 0;
  for (int iter = 0; iter < 30; ++iter) {
    const double gstep = 1e-5 * (1 + x.norm());
    Eigen::VectorXd g = fd_gradient(branch, x, gstep);
    gnorm = g.norm();
    if (gnorm <= target) return gnorm;
    Eigen::MatrixXd H = fd_hessian(branch, x, 1e-3 * (1 + x.norm()));
    Eigen::VectorXd delta = H.ldlt().solve(-g);
    if (!delta.allFinite() || delta.norm() > step_cap)
      delta = -g * (step_cap / std::max(g.norm(), step_cap));
    bool accepted = false;
    for (int half = 0; half < 6; ++half) {
      Eigen::VectorXd trial = x + delta;
      if (fd_gradient(branch, trial, gstep).norm() < gnorm) {
        x = trial;
        accepted = true;
        break;
      }
      delta *= 0.5;
    }
    if (!accepted) return gnorm;
  }
  return gnorm;
}

}  // namespace

int GridCache::index(const std::vector<int>& coord) const {
  int idx = 0;
  for (int j = 0; j < d; ++j) {
    int c = ((coord[j] % grid) + grid) % grid;
    idx = idx * grid + c;
  }
  return idx;
}

Eigen::VectorXd GridCache::point(int cell) const {
  Eigen::VectorXd x(d);
  for (int j = d - 1; j >= 0; --j) {
    x[j] = kTwoPi * (cell % grid) / grid;
    cell /= grid;
  }
  return x;
}

Projection project_near(const MatrixFamily& fam, const Eigen::VectorXd& x0, int k,
                        const StratumOptions& opts) {
  if (k < 1 || k > fam.n) throw std::invalid_argument("branch index out of range");
  SpectralData s = eig_sorted(fam.eval(x0));
  // branches that meet at the nearby degeneracy are already within a
  // few multiples of the observed gap; size the window by it, not by
  // the family scale, so unrelated bands stay out
  double gap_k = std::numeric_limits<double>::infinity();
  if (k >= 2) gap_k = std::min(gap_k, s.eigenvalues[k - 1] - s.eigenvalues[k - 2]);
  if (k < fam.n) gap_k = std::min(gap_k, s.eigenvalues[k] - s.eigenvalues[k - 1]);
  const double lam_scale = 1 + s.eigenvalues.cwiseAbs().maxCoeff();
  const double thr_window =
      std::isfinite(gap_k) ? std::max(4 * gap_k, 1e-9 * lam_scale) : 0.0;
  int lo = k, hi = k;
  while (lo >= 2 && s.eigenvalues[lo - 1] - s.eigenvalues[lo - 2] <= thr_window) --lo;
  while (hi < fam.n && s.eigenvalues[hi] - s.eigenvalues[hi - 1] <= thr_window) ++hi;
  if (hi == lo) throw std::runtime_error("the branch is simple here; no stratum to project to");
  const double width = s.eigenvalues[hi - 1] - s.eigenvalues[lo - 1];
  double out_gap = std::numeric_limits<double>::infinity();
  if (lo >= 2) out_gap = std::min(out_gap, s.eigenvalues[lo - 1] - s.eigenvalues[lo - 2]);
  if (hi < fam.n) out_gap = std::min(out_gap, s.eigenvalues[hi] - s.eigenvalues[hi - 1]);
  if (out_gap <= std::max(2 * width, 1e-12 * lam_scale))
    throw std::runtime_error("cluster window not separable from the rest of the spectrum");
  StratumChart seed_chart;
  seed_chart.k = k;
  seed_chart.lo = lo;
  seed_chart.hi = hi;
  seed_chart.field = fam.field;
  seed_chart.U_ref = s.eigenvectors.middleCols(lo - 1, hi - lo + 1);
  seed_chart.isolation_gap = out_gap;
  return project_to_stratum(fam, x0, seed_chart, opts);
}

GridCache grid_eigenvalues(const MatrixFamily& fam, int grid) {
  if (fam.domain != Domain::Torus)
    throw std::invalid_argument("grid scan requires a torus family");
  if (grid < 8) throw std::invalid_argument("grid resolution must be at least 8");
  double cells_d = std::pow(static_cast<double>(grid), fam.d);
  if (cells_d > 2e7) throw std::invalid_argument("grid too large");
  GridCache g;
  g.d = fam.d;
  g.grid = grid;
  const int cells = static_cast<int>(cells_d + 0.5);
  g.values.resize(cells, fam.n);
  for (int cell = 0; cell < cells; ++cell)
    g.values.row(cell) = eig_sorted(fam.eval(g.point(cell))).eigenvalues.transpose();
  return g;
}

MorseReport scan(const MatrixFamily& fam, int k, int grid, const ScanOptions& opts,
                 const GridCache* cache) {
  if (fam.domain != Domain::Torus)
    throw std::invalid_argument("grid scan requires a torus family");
  if (grid < 8) throw std::invalid_argument("grid resolution must be at least 8");
  if (k < 1 || k > fam.n) throw std::invalid_argument("branch index out of range");
  GridCache local;
  if (cache == nullptr || cache->grid != grid || cache->d != fam.d ||
      cache->values.cols() != fam.n) {
    local = grid_eigenvalues(fam, grid);
    cache = &local;
  }

  MorseReport rep;
  rep.family = fam.name;
  rep.k = k;
  rep.d = fam.d;
  rep.n = fam.n;
  rep.grid = grid;
  rep.seed = opts.seed;
  rep.p_manifold = opts.manifold_poincare.value_or(torus_poincare(fam.d));

  const auto& V = cache->values;
  rep.lambda_min = V.col(k - 1).minCoeff();
  rep.lambda_max = V.col(k - 1).maxCoeff();

  const double scale = std::max(1.0, fam.scale_hint);
  if (rep.lambda_max - rep.lambda_min <= 1e-10 * (1 + scale)) {
    rep.notices.push_back(
        "branch is constant on the grid; the critical set is not finite and the scan "
        "hypotheses fail");
    rep.inconclusive = true;
    rep.division = morse_division(rep.p_morse, rep.p_manifold);
    return rep;
  }

  const double h = kTwoPi / grid;
  const double thr_dip = opts.seed_factor * h * scale;   // degeneracy candidates
  const double thr_flat = opts.seed_factor * h * scale;  // discrete-gradient dip
  const double gap_guard = opts.seed_factor * h;         // smooth cells keep this gap
  const double merge_r = kTwoPi / (4.0 * grid);
  const double polish_target = opts.grad_tol * (1 + scale);
  const double report_gate = 1e-7 * (1 + scale);

  StratumOptions sopts;
  sopts.cluster_tol = opts.cluster_tol;
  sopts.tau_res = opts.tau_res;
  sopts.tau_hess = opts.tau_hess;
  sopts.tau_def = opts.tau_def;

  // 3^d - 1 torus neighbor offsets
  std::vector<std::vector<int>> offsets;
  {
    std::vector<int> off(fam.d, -1);
    while (true) {
      if (std::any_of(off.begin(), off.end(), [](int o) { return o != 0; }))
        offsets.push_back(off);
      int j = fam.d - 1;
      while (j >= 0 && off[j] == 1) off[j--] = -1;
      if (j < 0) break;
      ++off[j];
    }
  }

  const int cells = cache->cells();
  std::vector<int> coord(fam.d);
  auto decode = [&](int cell) {
    for (int j = fam.d - 1; j >= 0; --j) {
      coord[j] = cell % grid;
      cell /= grid;
    }
  };
  auto neighbor = [&](const std::vector<int>& base, const std::vector<int>& off) {
    std::vector<int> c(base);
    for (int j = 0; j < fam.d; ++j) c[j] += off[j];
    return cache->index(c);
  };
  auto gap_at = [&](int cell) {
    double g = std::numeric_limits<double>::infinity();
    if (k >= 2) g = std::min(g, V(cell, k - 1) - V(cell, k - 2));
    if (k < fam.n) g = std::min(g, V(cell, k) - V(cell, k - 1));
    return g;
  };
  auto grad_at = [&](const std::vector<int>& c) {
    double s = 0;
    std::vector<int> up(c), dn(c);
    for (int j = 0; j < fam.d; ++j) {
      ++up[j];
      --dn[j];
      double der = (V(cache->index(up), k - 1) - V(cache->index(dn), k - 1)) / (2 * h);
      s += der * der;
      up[j] = c[j];
      dn[j] = c[j];
    }
    return std::sqrt(s);
  };

  std::vector<Candidate> cands;

  // Degeneracy candidates: local minima of the cluster gap, projected
  // onto the stratum and polished along its tangent.
  for (int cell = 0; cell < cells; ++cell) {
    const double gp = gap_at(cell);
    if (!(gp <= thr_dip)) continue;
    decode(cell);
    const std::vector<int> base = coord;
    bool is_min = true;
    for (const auto& off : offsets)
      if (gap_at(neighbor(base, off)) < gp) {
        is_min = false;
        break;
      }
    if (!is_min) continue;

    const Eigen::VectorXd x0 = cache->point(cell);
    Projection p;
    try {
      p = project_near(fam, x0, k, sopts);
    } catch (const std::exception&) {
      rep.notices.push_back("incomplete: cluster window not separable near " + point_str(x0));
      continue;
    }
    if (!p.converged) continue;  // avoided crossing, nothing there
    Eigen::VectorXd y = p.x;
    try {
      std::optional<double> res = polish_on_stratum(fam, k, y, sopts, polish_target, 2 * h);
      if (!res) {
        rep.notices.push_back("incomplete: stratum polish left the chart near " + point_str(y));
      } else if (*res > 10 * polish_target) {
        rep.notices.push_back("incomplete: stratum polish stalled near " + point_str(y));
      }
    } catch (const std::exception& e) {
      rep.notices.push_back("incomplete: stratum analysis failed near " + point_str(y) + ": " +
                            e.what());
    }
    cands.push_back({wrap_point(y), p.residual_norm, cell, true});
  }

  // Smooth candidates: local minima of the discrete gradient away from
  // any cluster dip, polished by damped Newton on the branch.
  for (int cell = 0; cell < cells; ++cell) {
    if (gap_at(cell) <= gap_guard) continue;
    decode(cell);
    const std::vector<int> base = coord;
    const double gn = grad_at(base);
    if (!(gn <= thr_flat)) continue;
    bool is_min = true;
    for (const auto& off : offsets) {
      std::vector<int> c(base);
      for (int j = 0; j < fam.d; ++j) c[j] += off[j];
      for (int j = 0; j < fam.d; ++j) c[j] = ((c[j] % grid) + grid) % grid;
      if (grad_at(c) < gn) {
        is_min = false;
        break;
      }
    }
    if (!is_min) continue;

    Eigen::VectorXd x = cache->point(cell);
    std::optional<double> res = polish_smooth(fam, k, x, polish_target, h);
    const double final_gap = [&] {
      SpectralData s = eig_sorted(fam.eval(x));
      double g = std::numeric_limits<double>::infinity();
      if (k >= 2) g = std::min(g, s.eigenvalues[k - 1] - s.eigenvalues[k - 2]);
      if (k < fam.n) g = std::min(g, s.eigenvalues[k] - s.eigenvalues[k - 1]);
      return g;
    }();
    if ((!res || *res > report_gate) && final_gap > 1e-6) {
      rep.notices.push_back("incomplete: gradient polish stalled near " + point_str(x));
      continue;
    }
    cands.push_back({wrap_point(x), res.value_or(0.0), cell, false});
  }

  // Deduplicate on the torus metric, keeping the better-converged copy.
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return lex_less(a.x, b.x); });
  std::vector<Candidate> kept;
  for (const auto& c : cands) {
    bool merged = false;
    for (auto& kc : kept)
      if (torus_dist(kc.x, c.x) <= merge_r) {
        if (c.score < kc.score) kc = c;
        merged = true;
        break;
      }
    if (!merged) kept.push_back(c);
  }

  ClassifyOptions copts;
  copts.cluster_tol = opts.cluster_tol;
  copts.tau_def = opts.tau_def;
  copts.tau_hess = opts.tau_hess;
  copts.seed = opts.seed;

  for (const auto& c : kept) {
    Classification cls = classify_point(fam, c.x, k, copts);
    CriticalPointReport r;
    r.x = c.x;
    r.value = eig_sorted(fam.eval(c.x)).eigenvalues[k - 1];
    r.cls = cls;
    r.basin = c.basin;
    switch (cls.verdict) {
      case Verdict::Regular: {
        if (!c.stratum) break;  // smooth non-critical point, drop
        // topologically regular stratum point: record its restricted
        // Morse data for the submanifold-sum check
        try {
          StratumChart ch = make_chart(fam, c.x, k, sopts);
          if (ch.nu() < 2) break;
          Eigen::MatrixXd T = tangent_basis(fam, c.x, ch);
          if (T.cols() > 0) {
            const Eigen::VectorXd base_pt = c.x;
            ScalarFn val = [&](const Eigen::VectorXd& u) {
              Projection q = project_to_stratum(fam, base_pt + T * u, ch, sopts);
              if (!q.converged) throw std::runtime_error("projection lost the stratum");
              return eig_sorted(fam.eval(q.x)).eigenvalues[k - 1];
            };
            const double gn =
                fd_gradient(val, Eigen::VectorXd::Zero(T.cols()), 1e-5 * (1 + c.x.norm()))
                    .norm();
            if (gn > 10 * polish_target) break;  // restriction not critical here
          }
          RestrictedHessian rh = restricted_hessian(fam, c.x, k, ch, sopts);
          r.cls.nu = ch.nu();
          r.cls.rel_index = ch.rel_index();
          r.cls.mu = rh.mu;
          r.cls.tangent_dim = static_cast<int>(T.cols());
          r.cls.nondegenerate = rh.nondegenerate;
          r.cls.contribution =
              nonsmooth_contribution(ch.nu(), ch.rel_index(), fam.field).shift(rh.mu);
          if (fam.field == Field::Real)
            r.cls.z2 = z2_contribution(ch.nu(), ch.rel_index(), rh.mu);
          r.cls.extremum = extremum_classify(ch.nu(), ch.rel_index(), rh.mu,
                                             static_cast<int>(T.cols()));
          if (!rh.nondegenerate)
            rep.notices.push_back("incomplete: degenerate stratum restriction near " +
                                  point_str(c.x));
          rep.regular_strata.push_back(std::move(r));
        } catch (const std::exception& e) {
          rep.notices.push_back("incomplete: stratum analysis failed near " + point_str(c.x) +
                                ": " + e.what());
        }
        break;
      }
      case Verdict::SmoothCritical: {
        if (cls.nondegenerate) {
          rep.c_mu[cls.mu] += 1;
          rep.p_morse += cls.contribution;
        } else {
          rep.inconclusive = true;
          rep.notices.push_back("degenerate smooth critical point near " + point_str(c.x));
        }
        rep.points.push_back(std::move(r));
        break;
      }
      case Verdict::NonDegenerateCritical: {
        rep.p_morse += cls.contribution;
        rep.d_contrib += cls.contribution;
        rep.points.push_back(std::move(r));
        break;
      }
      case Verdict::Borderline: {
        rep.inconclusive = true;
        rep.notices.push_back("borderline point near " + point_str(c.x) + ": " + cls.reason);
        rep.points.push_back(std::move(r));
        break;
      }
      case Verdict::NotCovered: {
        rep.inconclusive = true;
        rep.notices.push_back("uncovered point near " + point_str(c.x) + ": " + cls.reason);
        rep.points.push_back(std::move(r));
        break;
      }
    }
  }

  auto by_location = [](const CriticalPointReport& a, const CriticalPointReport& b) {
    return lex_less(a.x, b.x);
  };
  std::sort(rep.points.begin(), rep.points.end(), by_location);
  std::sort(rep.regular_strata.begin(), rep.regular_strata.end(), by_location);

  for (const auto& r : rep.points) {
    rep.lambda_min = std::min(rep.lambda_min, r.value);
    rep.lambda_max = std::max(rep.lambda_max, r.value);
  }
  rep.division = morse_division(rep.p_morse, rep.p_manifold);
  return rep;
}

std::string MorseReport::to_json() const {
  nlohmann::json j;
  j["family"] = family;
  j["k"] = k;
  j["d"] = d;
  j["n"] = n;
  j["grid"] = grid;
  j["seed"] = seed;
  j["points"] = nlohmann::json::array();
  for (const auto& r : points) j["points"].push_back(point_json(r));
  j["regular_strata"] = nlohmann::json::array();
  for (const auto& r : regular_strata) j["regular_strata"].push_back(point_json(r));
  j["p_morse"] = poly_json(p_morse);
  j["p_manifold"] = poly_json(p_manifold);
  j["division"] = {{"remainder", poly_json(division.remainder)},
                   {"satisfied", division.satisfied},
                   {"violation_degree", division.violation_degree}};
  j["c_mu"] = cmu_json(c_mu);
  j["d_contrib"] = poly_json(d_contrib);
  j["lambda_min"] = lambda_min;
  j["lambda_max"] = lambda_max;
  j["inconclusive"] = inconclusive;
  j["notices"] = notices;
  return j.dump(2);
}

std::string MorseReport::markdown() const {
  std::ostringstream os;
  os << "# Morse scan: " << family << ", branch " << k << "\n\n";
  os << "grid " << grid << "^" << d << ", n = " << n << ", lambda range [" << lambda_min << ", "
     << lambda_max << "]\n\n";
  os << "| x | verdict | nu | i | mu | contribution | extremum |\n";
  os << "|---|---------|----|---|----|--------------|----------|\n";
  for (const auto& r : points)
    os << "| " << point_str(r.x) << " | " << to_string(r.cls.verdict) << " | " << r.cls.nu
       << " | " << r.cls.rel_index << " | " << r.cls.mu << " | " << r.cls.contribution.str()
       << " | " << to_string(r.cls.extremum) << " |\n";
  for (const auto& r : regular_strata)
    os << "| " << point_str(r.x) << " | RegularStratum | " << r.cls.nu << " | "
       << r.cls.rel_index << " | " << r.cls.mu << " | " << r.cls.contribution.str() << " | "
       << to_string(r.cls.extremum) << " |\n";
  os << "\nP_morse = " << p_morse.str() << "\n";
  os << "P_manifold = " << p_manifold.str() << "\n";
  os << "Morse inequality: " << (division.satisfied ? "satisfied" : "violated");
  if (division.satisfied)
    os << ", remainder " << division.remainder.str();
  else
    os << " at degree " << division.violation_degree;
  os << "\n";
  if (inconclusive) os << "inconclusive: yes\n";
  for (const auto& note : notices) os << "- " << note << "\n";
  return os.str();
}

VanHoveTable van_hove_table(const std::vector<MorseReport>& reports, int d) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("saddle-count bounds are stated for d = 2 and d = 3 only");
  if (reports.empty()) throw std::invalid_argument("no reports");
  const int n = reports.front().n;
  if (static_cast<int>(reports.size()) != n)
    throw std::invalid_argument("need one report per branch k = 1..n");
  for (int i = 0; i < n; ++i)
    if (reports[i].k != i + 1 || reports[i].d != d || reports[i].n != n)
      throw std::invalid_argument("reports must cover k = 1..n of one family in dimension d");

  VanHoveTable t;
  t.d = d;
  t.n = n;
  t.inconclusive = false;
  for (const auto& rep : reports) {
    t.c_mu.push_back(rep.c_mu);
    if (rep.inconclusive) t.inconclusive = true;
  }
  auto cm = [&](int k, int mu) -> long {
    auto it = t.c_mu[k - 1].find(mu);
    return it == t.c_mu[k - 1].end() ? 0 : it->second;
  };
  auto add = [&](const std::string& label, long lhs, long rhs) {
    t.checks.push_back({label, lhs, rhs, lhs >= rhs});
  };
  if (d == 2) {
    for (int k = 1; k <= n; ++k)
      add("c_1(" + std::to_string(k) + ") >= 2", cm(k, 1), 2);
  } else {
    add("c_1(1) >= 3", cm(1, 1), 3);
    for (int k = 2; k <= n; ++k)
      add("c_1(" + std::to_string(k) + ") + c_2(" + std::to_string(k - 1) + ") >= 4",
          cm(k, 1) + cm(k - 1, 2), 4);
    add("c_2(" + std::to_string(n) + ") >= 3", cm(n, 2), 3);
  }
  t.all_pass = std::all_of(t.checks.begin(), t.checks.end(),
                           [](const BoundCheck& c) { return c.pass; });
  return t;
}

std::string VanHoveTable::to_json() const {
  nlohmann::json j;
  j["d"] = d;
  j["n"] = n;
  j["c_mu"] = nlohmann::json::array();
  for (const auto& m : c_mu) j["c_mu"].push_back(cmu_json(m));
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks)
    j["checks"].push_back(
        {{"label", c.label}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}});
  j["all_pass"] = all_pass;
  j["inconclusive"] = inconclusive;
  return j.dump(2);
}

std::string VanHoveTable::markdown() const {
  std::ostringstream os;
  os << "| bound | count | required | pass |\n|-------|-------|----------|------|\n";
  for (const auto& c : checks)
    os << "| " << c.label << " | " << c.lhs << " | " << c.rhs << " | "
       << (c.pass ? "yes" : "NO") << " |\n";
  os << "\nall bounds " << (all_pass ? "hold" : "FAIL");
  if (inconclusive) os << " (scan inconclusive)";
  os << "\n";
  return os.str();
}

MinMaxCheck minmax_separation(const std::vector<MorseReport>& reports) {
  MinMaxCheck mc;
  mc.all_pass = true;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].k != reports[i - 1].k + 1)
      throw std::invalid_argument("reports must cover consecutive branches");
    MinMaxRow row;
    row.k = reports[i].k;
    row.max_prev = reports[i - 1].lambda_max;
    row.max_cur = reports[i].lambda_max;
    row.min_prev = reports[i - 1].lambda_min;
    row.min_cur = reports[i].lambda_min;
    row.pass = row.max_prev < row.max_cur - 1e-9 && row.min_prev < row.min_cur - 1e-9;
    mc.all_pass = mc.all_pass && row.pass;
    mc.rows.push_back(row);
  }
  return mc;
}

std::string MinMaxCheck::to_json() const {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"k", r.k},
                         {"max_prev", r.max_prev},
                         {"max_cur", r.max_cur},
                         {"min_prev", r.min_prev},
                         {"min_cur", r.min_cur},
                         {"pass", r.pass}});
  j["all_pass"] = all_pass;
  return j.dump(2);
}

std::string MinMaxCheck::markdown() const {
  std::ostringstream os;
  os << "| k | max(k-1) < max(k) | min(k-1) < min(k) | pass |\n";
  os << "|---|-------------------|-------------------|------|\n";
  for (const auto& r : rows)
    os << "| " << r.k << " | " << r.max_prev << " < " << r.max_cur << " | " << r.min_prev
       << " < " << r.min_cur << " | " << (r.pass ? "yes" : "NO") << " |\n";
  os << "\nstrict interlacing " << (all_pass ? "holds" : "FAILS") << "\n";
  return os.str();
}

ConseqCheck conseq_check(const MorseReport& report) {
  ConseqCheck cc;
  bool complete = !report.inconclusive;
  for (const auto& note : report.notices)
    if (note.rfind("incomplete:", 0) == 0) complete = false;
  for (const auto& r : report.regular_strata)
    if (!r.cls.nondegenerate) complete = false;
  cc.applicable = complete;
  if (!complete) {
    cc.note = "stratum Morse data incomplete; the submanifold sum is not certified";
    return cc;
  }
  for (const auto& r : report.points) {
    if (r.cls.verdict == Verdict::SmoothCritical && r.cls.nondegenerate)
      cc.left += r.cls.contribution;
    else if (r.cls.verdict == Verdict::NonDegenerateCritical)
      cc.left += r.cls.contribution;
  }
  for (const auto& r : report.regular_strata) cc.left += r.cls.contribution;
  cc.left_dominates = cc.left.dominates(report.p_morse);
  cc.morse_dominates = report.p_morse.dominates(report.p_manifold);
  cc.pass = cc.left_dominates && cc.morse_dominates;
  return cc;
}

std::string ConseqCheck::to_json() const {
  nlohmann::json j;
  j["applicable"] = applicable;
  j["left"] = poly_json(left);
  j["left_dominates"] = left_dominates;
  j["morse_dominates"] = morse_dominates;
  j["pass"] = pass;
  j["note"] = note;
  return j.dump(2);
}

namespace {

// One-sided secants of the sorted branches through three step sizes,
// Richardson-extrapolated twice; third-order accurate in t0 even across
// a conical kink.
Eigen::VectorXd secant_slopes(const MatrixFamily& fam, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& v, int lo, int nu, double t0) {
  const Eigen::VectorXd base = eig_sorted(fam.eval(x)).eigenvalues;
  Eigen::VectorXd slopes(nu);
  Eigen::MatrixXd S(nu, 3);
  const double steps[3] = {t0, t0 / 2, t0 / 4};
  for (int c = 0; c < 3; ++c) {
    const Eigen::VectorXd ev = eig_sorted(fam.eval(x + steps[c] * v)).eigenvalues;
    for (int j = 0; j < nu; ++j)
      S(j, c) = (ev[lo - 1 + j] - base[lo - 1 + j]) / steps[c];
  }
  for (int j = 0; j < nu; ++j) {
    const double r1a = 2 * S(j, 1) - S(j, 0);
    const double r1b = 2 * S(j, 2) - S(j, 1);
    slopes[j] = (4 * r1b - r1a) / 3;
  }
  return slopes;
}

double audit_point(const MatrixFamily& fam, const Eigen::VectorXd& x, int k,
                   const Eigen::VectorXd& v, int* comparisons) {
  SpectralData s = eig_sorted(fam.eval(x));
  EigenCluster c = cluster_at(s, k);
  Eigen::VectorXd predicted = hf_slopes(fam, x, v, c);
  Eigen::VectorXd observed = secant_slopes(fam, x, v, c.lo, c.nu(), 1e-3);
  double worst = 0;
  for (int j = 0; j < c.nu(); ++j) {
    worst = std::max(worst, std::abs(predicted[j] - observed[j]) / (1 + std::abs(observed[j])));
    ++*comparisons;
  }
  return worst;
}

}  // namespace

HfCheck hf_check(int trials, std::uint64_t seed, double tol) {
  HfCheck hc;
  hc.tol = tol;
  for (int t = 0; t < trials; ++t) {
    const int d = 1 + t % 3;
    const int n = 2 + t % 5;
    const Field f = (t % 2 == 0) ? Field::Real : Field::Complex;
    MatrixFamily fam = random_family(seed + t, d, n, f, 1 + t % 2, 0.8);
    std::mt19937_64 rng(seed * 1000003 + t);
    std::uniform_real_distribution<double> uni(0.0, kTwoPi);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = uni(rng);
    const int k = 1 + static_cast<int>(rng() % n);
    // steer clear of near-degeneracies: the audit wants a branch whose
    // cluster is honestly isolated at the secant step scale
    for (int attempt = 0; attempt < 20; ++attempt) {
      SpectralData s = eig_sorted(fam.eval(x));
      EigenCluster c = cluster_at(s, k);
      double out_gap = std::numeric_limits<double>::infinity();
      if (c.lo >= 2) out_gap = std::min(out_gap, s.eigenvalues[c.lo - 1] - s.eigenvalues[c.lo - 2]);
      if (c.hi < n) out_gap = std::min(out_gap, s.eigenvalues[c.hi] - s.eigenvalues[c.hi - 1]);
      if (out_gap >= 0.05 * (1 + s.eigenvalues.cwiseAbs().maxCoeff())) break;
      x[attempt % d] += 0.37;
    }
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v[j] = gauss(rng);
    v.normalize();
    hc.max_rel_err = std::max(hc.max_rel_err, audit_point(fam, x, k, v, &hc.trials));
  }

  // the builtin degeneracies: conical and higher-order cluster points
  struct Probe {
    const char* name;
    std::vector<double> x;
    int k;
  };
  const std::vector<Probe> probes = {
      {"cone-symmetric", {0, 0}, 1},
      {"cone-symmetric", {0, 0}, 2},
      {"cone-tilted", {0, 0}, 1},
      {"borderline", {0, 0}, 2},
      {"sym2-identity", {0, 0, 0}, 1},
      {"real2band-t2", {0, 0}, 1},
      {"weyl-t3", {0, 0, 0}, 2},
      {"nodal-ring-t3", {0, 0, 0}, 1},
      {"graphene-t2", {kTwoPi / 3, kTwoPi * 2 / 3}, 1},
  };
  std::mt19937_64 rng(seed + 999);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const auto& p : probes) {
    MatrixFamily fam = builtin(p.name);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(p.x.data(), p.x.size());
    for (int rep = 0; rep < 3; ++rep) {
      Eigen::VectorXd v(fam.d);
      for (int j = 0; j < fam.d; ++j) v[j] = gauss(rng);
      v.normalize();
      hc.max_rel_err = std::max(hc.max_rel_err, audit_point(fam, x, p.k, v, &hc.trials));
    }
  }
  hc.pass = hc.max_rel_err <= tol;
  return hc;
}

std::string HfCheck::to_json() const {
  nlohmann::json j;
  j["trials"] = trials;
  j["max_rel_err"] = max_rel_err;
  j["tol"] = tol;
  j["pass"] = pass;
  return j.dump(2);
}

int exit_code(bool violated, bool inconclusive) {
  if (inconclusive) return 3;
  return violated ? 2 : 0;
}

int exit_code(const MorseReport& report) {
  return exit_code(!report.division.satisfied, report.inconclusive);
}

std::string contour_csv(const MatrixFamily& fam, int k, int grid) {
  if (fam.d != 2) throw std::invalid_argument("contour output requires d = 2");
  if (fam.domain != Domain::Torus)
    throw std::invalid_argument("contour output requires a torus family");
  if (k < 1 || k > fam.n) throw std::invalid_argument("branch index out of range");
  std::ostringstream os;
  os << "x1,x2,lambda_" << k << "\n";
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      Eigen::VectorXd x(2);
      x << kTwoPi * i / grid, kTwoPi * j / grid;
      os << num_str(x[0]) << "," << num_str(x[1]) << ","
         << num_str(eig_sorted(fam.eval(x)).eigenvalues[k - 1]) << "\n";
    }
  return os.str();
}

std::string polyline_csv(const TraceResult& trace) {
  std::ostringstream os;
  if (!trace.points.empty()) {
    const int d = static_cast<int>(trace.points.front().size());
    for (int j = 0; j < d; ++j) os << (j ? "," : "") << "x" << (j + 1);
    os << "\n";
    for (const auto& p : trace.points) {
      for (int j = 0; j < d; ++j) os << (j ? "," : "") << num_str(p[j]);
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace morseig
