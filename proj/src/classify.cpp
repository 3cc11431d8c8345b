#include "morseig/classify.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "morseig/grassmann.hpp"
#include "morseig/numdiff.hpp"
#include "morseig/stratum.hpp"

namespace morseig {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using json = nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Regular: return "Regular";
    case Verdict::SmoothCritical: return "SmoothCritical";
    case Verdict::NonDegenerateCritical: return "NonDegenerateCritical";
    case Verdict::Borderline: return "Borderline";
    case Verdict::NotCovered: return "NotCovered";
  }
  return "?";
}

std::string to_string(Extremum e) {
  switch (e) {
    case Extremum::Max: return "max";
    case Extremum::Min: return "min";
    case Extremum::Neither: return "neither";
  }
  return "?";
}

DefiniteSearch definite_in_span(const std::vector<MatrixXcd>& basis, double tau_def,
                                std::uint64_t seed) {
  DefiniteSearch best;
  best.margin = -std::numeric_limits<double>::infinity();
  const int dim = static_cast<int>(basis.size());
  if (dim == 0) return best;
  const int nu = static_cast<int>(basis[0].rows());

  struct Eval {
    double lam;
    VectorXcd vec;
  };
  auto bottom = [&](const VectorXd& c) -> Eval {
    MatrixXcd A = MatrixXcd::Zero(nu, nu);
    for (int j = 0; j < dim; ++j) A += c[j] * basis[j];
    SpectralData s = eig_sorted(A);
    return {s.eigenvalues[0], s.eigenvectors.col(0)};
  };

  // Reproducible starts independent of the standard library's
  // distribution implementations.
  std::mt19937_64 rng(seed);
  auto gauss = [&]() {
    double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
  };

  std::vector<VectorXd> starts;
  for (int j = 0; j < dim; ++j) {
    VectorXd e = VectorXd::Zero(dim);
    e[j] = 1;
    starts.push_back(e);
    starts.push_back(-e);
  }
  while (static_cast<int>(starts.size()) < 8 * dim) {
    VectorXd g(dim);
    for (int j = 0; j < dim; ++j) g[j] = gauss();
    if (g.norm() < 1e-8) continue;
    starts.push_back(g.normalized());
  }

  // lambda_min is concave, so projected subgradient ascent with an
  // adaptive step converges; the sphere constraint makes the problem
  // non-convex overall, hence the multistart.
  for (const VectorXd& c0 : starts) {
    VectorXd c = c0;
    Eval cur = bottom(c);
    double alpha = 0.5;
    for (int iter = 0; iter < 200 && alpha > 1e-13; ++iter) {
      VectorXd grad(dim);
      for (int j = 0; j < dim; ++j)
        grad[j] = (cur.vec.adjoint() * basis[j] * cur.vec)(0, 0).real();
      VectorXd cn = c + alpha * grad;
      if (cn.norm() < 1e-14) {
        alpha /= 2;
        continue;
      }
      cn.normalize();
      Eval next = bottom(cn);
      if (next.lam > cur.lam) {
        c = cn;
        cur = next;
        alpha *= 1.1;
      } else {
        alpha /= 2;
      }
    }
    if (cur.lam > best.margin) {
      best.margin = cur.lam;
      best.combo = c;
    }
  }
  best.found = best.margin > tau_def;
  return best;
}

RegularCheck check_regular(const HOperator& h, double tau_def, std::uint64_t seed) {
  DefiniteSearch ds = definite_in_span(h.images, tau_def, seed);
  RegularCheck out;
  out.certified = ds.found;
  out.witness = ds.combo;
  out.margin = ds.margin;
  return out;
}

ConditionN check_condition_N(const HOperator& h, double tau_def) {
  ConditionN out;
  auto cb = complement_basis(h);
  out.complement_dim = static_cast<int>(cb.size());
  if (out.complement_dim != 1) {
    out.status = ConditionN::Status::ComplementDimNot1;
    return out;
  }
  MatrixXcd B = cb[0];
  if (B.trace().real() < 0) B = -B;
  out.B = B;
  out.margin = eig_sorted(B).eigenvalues[0];
  out.status = out.margin > tau_def ? ConditionN::Status::Holds
                                    : ConditionN::Status::ComplementNotDefinite;
  return out;
}

bool check_transversality(const HOperator& h) {
  HOperator ext = h;
  ext.images.push_back(MatrixXcd::Identity(h.nu(), h.nu()));
  return h_rank(ext) == sym_dim(h.nu(), h.field);
}

double clarke_bound(const HOperator& h, const VectorXd& v) {
  if (v.norm() <= 0) throw std::invalid_argument("clarke_bound: zero direction");
  SpectralData s = eig_sorted(apply_h(h, v));
  return s.eigenvalues[s.n() - 1];
}

Classification classify_point(const MatrixFamily& fam, const VectorXd& x, int k,
                              const ClassifyOptions& opts) {
  Classification out;
  out.k = k;
  const double ctol = opts.cluster_tol < 0 ? cluster_default_tol : opts.cluster_tol;
  SpectralData s = eig_sorted(fam.eval(x));
  if (k < 1 || k > s.n()) throw std::invalid_argument("classify_point: branch index out of range");
  EigenCluster c = cluster_at(s, k, ctol);
  out.nu = c.nu();
  out.rel_index = c.rel_index();
  HOperator h = h_operator(fam, x, c);
  out.rank = h_rank(h);

  if (c.nu() == 1) {
    out.tangent_dim = fam.d;
    VectorXd g(fam.d);
    for (int j = 0; j < fam.d; ++j) g[j] = h.images[j](0, 0).real();
    const double tol_grad = opts.tol_grad < 0 ? 1e-6 * (1 + fam.scale_hint) : opts.tol_grad;
    out.margin = g.norm();
    if (g.norm() > tol_grad) {
      out.verdict = Verdict::Regular;
      out.witness = g.normalized();
      return out;
    }
    out.verdict = Verdict::SmoothCritical;
    auto branch = [&](const VectorXd& y) { return eig_sorted(fam.eval(y)).eigenvalues[k - 1]; };
    MatrixXd H = fd_hessian(branch, x, opts.hess_step * (1 + x.norm()));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
    const double tau = opts.tau_hess * (1 + H.norm());
    out.mu = 0;
    out.nondegenerate = true;
    out.margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < fam.d; ++i) {
      if (es.eigenvalues()[i] < -tau) ++out.mu;
      if (std::abs(es.eigenvalues()[i]) <= tau) out.nondegenerate = false;
      out.margin = std::min(out.margin, std::abs(es.eigenvalues()[i]));
    }
    if (out.nondegenerate) {
      out.contribution = IntPoly::monomial(1, out.mu);
      if (fam.field == Field::Real) out.z2 = z2_contribution(1, 1, out.mu);
      out.extremum = extremum_classify(1, 1, out.mu, fam.d);
    } else {
      out.reason = "smooth critical point with a degenerate Hessian";
    }
    return out;
  }

  RegularCheck reg = check_regular(h, opts.tau_def, opts.seed);
  out.margin = reg.margin;
  if (reg.certified) {
    out.verdict = Verdict::Regular;
    out.witness = reg.witness;
    return out;
  }

  ConditionN n = check_condition_N(h, opts.tau_def);
  out.complement_dim = n.complement_dim;
  const int codim = s_codim(c.nu(), fam.field);

  if (n.status == ConditionN::Status::Holds) {
    out.margin = n.margin;
    if (!check_transversality(h)) {
      out.verdict = Verdict::Borderline;
      out.complement = n.B;
      out.reason = "condition (N) holds but the cluster is not transverse";
      return out;
    }
    out.tangent_dim = fam.d - codim;
    StratumOptions sopts;
    sopts.cluster_tol = opts.cluster_tol;
    sopts.hess_step = opts.hess_step;
    sopts.tau_hess = opts.tau_hess;
    sopts.tau_def = opts.tau_def;
    try {
      StratumChart ch = make_chart(fam, x, k, sopts);
      Projection p = project_to_stratum(fam, x, ch, sopts);
      if (!p.converged) {
        out.verdict = Verdict::NotCovered;
        out.reason = "stratum projection did not converge";
        return out;
      }
      RestrictedHessian rh = restricted_hessian(fam, p.x, k, ch, sopts);
      out.mu = rh.mu;
      out.nondegenerate = rh.nondegenerate;
      if (!rh.nondegenerate) {
        out.verdict = Verdict::Borderline;
        out.complement = n.B;
        out.reason = "restriction to the stratum has a degenerate Hessian";
        return out;
      }
      out.verdict = Verdict::NonDegenerateCritical;
      out.contribution = nonsmooth_contribution(c.nu(), c.rel_index(), fam.field).shift(rh.mu);
      if (fam.field == Field::Real) out.z2 = z2_contribution(c.nu(), c.rel_index(), rh.mu);
      out.extremum = extremum_classify(c.nu(), c.rel_index(), rh.mu, out.tangent_dim);
      return out;
    } catch (const std::exception& e) {
      out.verdict = Verdict::NotCovered;
      out.reason = e.what();
      return out;
    }
  }

  if (n.status == ConditionN::Status::ComplementNotDefinite) {
    out.verdict = Verdict::Borderline;
    out.complement = n.B;
    out.margin = n.margin;
    out.reason = "one-dimensional complement matrix is not definite";
    return out;
  }
  if (fam.d < codim) {
    out.verdict = Verdict::NotCovered;
    out.reason = "parameter dimension below the stratum codimension s(nu)";
  } else {
    out.verdict = Verdict::Borderline;
    out.reason = "complement dimension is not 1";
  }
  return out;
}

namespace {

json poly_coeffs(const IntPoly& p) {
  json arr = json::array();
  for (int i = 0; i <= p.degree(); ++i) arr.push_back(p.coeff(i));
  return arr;
}

json complex_matrix_json(const MatrixXcd& M) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (int j = 0; j < M.cols(); ++j) {
      rrow.push_back(M(i, j).real());
      irow.push_back(M(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

}  // namespace

std::string Classification::to_json() const {
  json j;
  j["verdict"] = to_string(verdict);
  j["k"] = k;
  j["nu"] = nu;
  j["i"] = rel_index;
  j["mu"] = mu;
  j["tangent_dim"] = tangent_dim;
  j["nondegenerate"] = nondegenerate;
  j["extremum"] = to_string(extremum);
  j["contribution"] = poly_coeffs(contribution);
  j["z2"] = poly_coeffs(z2);
  if (witness) j["witness"] = std::vector<double>(witness->data(), witness->data() + witness->size());
  if (complement) j["complement"] = complex_matrix_json(*complement);
  if (!reason.empty()) j["reason"] = reason;
  j["diagnostics"] = json{{"rank", rank}, {"complement_dim", complement_dim}, {"margin", margin}};
  return j.dump(2);
}

}  // namespace morseig
