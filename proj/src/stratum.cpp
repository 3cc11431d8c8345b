#include "morseig/stratum.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "morseig/grassmann.hpp"
#include "morseig/numdiff.hpp"

namespace morseig {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double effective_cluster_tol(const StratumOptions& opts) {
  return opts.cluster_tol < 0 ? cluster_default_tol : opts.cluster_tol;
}

// Gap from the branch range [lo..hi] to the rest of the spectrum.
double outside_gap(const VectorXd& lam, int lo, int hi) {
  double gap = std::numeric_limits<double>::infinity();
  if (lo - 2 >= 0) gap = std::min(gap, lam[lo - 1] - lam[lo - 2]);
  if (hi < lam.size()) gap = std::min(gap, lam[hi] - lam[hi - 1]);
  return gap;
}

double torus_dist(const VectorXd& a, const VectorXd& b) {
  double s = 0;
  for (int j = 0; j < a.size(); ++j) {
    double d = std::remainder(a[j] - b[j], 2 * M_PI);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

StratumChart make_chart(const MatrixFamily& fam, const VectorXd& x, int k,
                        const StratumOptions& opts) {
  SpectralData s = eig_sorted(fam.eval(x));
  EigenCluster c = cluster_at(s, k, effective_cluster_tol(opts));
  const double width = s.eigenvalues[c.hi - 1] - s.eigenvalues[c.lo - 1];
  const double gap = outside_gap(s.eigenvalues, c.lo, c.hi);
  const double floor = 1e-12 * (1 + s.eigenvalues.cwiseAbs().maxCoeff());
  if (gap <= std::max(10 * width, floor)) {
    std::ostringstream msg;
    msg << "cluster [" << c.lo << ".." << c.hi << "] is not isolated (width " << width << ", gap "
        << gap << ")";
    throw std::runtime_error(msg.str());
  }
  StratumChart ch;
  ch.k = k;
  ch.lo = c.lo;
  ch.hi = c.hi;
  ch.field = fam.field;
  ch.U_ref = c.U;
  ch.isolation_gap = gap;
  return ch;
}

MatrixXcd continued_isometry(const MatrixFamily& fam, const VectorXd& x, const StratumChart& ch) {
  SpectralData s = eig_sorted(fam.eval(x));
  const int nu = ch.nu();
  const double width = s.eigenvalues[ch.hi - 1] - s.eigenvalues[ch.lo - 1];
  const double gap = outside_gap(s.eigenvalues, ch.lo, ch.hi);
  const double floor = 1e-12 * (1 + s.eigenvalues.cwiseAbs().maxCoeff());
  if (gap <= std::max(2 * width, floor))
    throw std::runtime_error("cluster lost isolation during continuation");
  MatrixXcd V = s.eigenvectors.middleCols(ch.lo - 1, nu);
  // Polar factor of V*U_ref: the unitary closest to carrying V onto the
  // reference gauge. Kills the U(nu) ambiguity of the eigenbasis.
  Eigen::JacobiSVD<MatrixXcd> svd(V.adjoint() * ch.U_ref,
                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
  return V * (svd.matrixU() * svd.matrixV().adjoint());
}

VectorXd stratum_residual(const MatrixFamily& fam, const VectorXd& x, const StratumChart& ch) {
  MatrixXcd U = continued_isometry(fam, x, ch);
  return traceless_coords(compress(fam.eval(x), U), ch.field);
}

MatrixXd residual_jacobian(const MatrixFamily& fam, const VectorXd& x, const StratumChart& ch) {
  MatrixXcd U = continued_isometry(fam, x, ch);
  auto diff = differential(fam, x);
  MatrixXd J(s_codim(ch.nu(), ch.field), fam.d);
  for (int j = 0; j < fam.d; ++j) J.col(j) = traceless_coords(compress(diff[j], U), ch.field);
  return J;
}

Projection project_to_stratum(const MatrixFamily& fam, const VectorXd& x0, const StratumChart& ch,
                              const StratumOptions& opts) {
  const double scale = 1 + fam.eval(x0).norm();
  Projection out;
  out.x = x0;
  VectorXd R = stratum_residual(fam, x0, ch);
  double r = R.norm();
  while (out.iterations < opts.max_iter && r > 1e-15 * scale) {
    MatrixXd J = residual_jacobian(fam, out.x, ch);
    Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    VectorXd delta = svd.solve(R);
    bool improved = false;
    double alpha = 1.0;
    for (int halvings = 0; halvings < 7 && !improved; ++halvings, alpha /= 2) {
      VectorXd xn = out.x - alpha * delta;
      try {
        VectorXd Rn = stratum_residual(fam, xn, ch);
        if (Rn.norm() < r) {
          out.x = xn;
          R = Rn;
          r = Rn.norm();
          improved = true;
        }
      } catch (const std::runtime_error&) {
        // isolation lost along the trial step; shorten and retry
      }
    }
    ++out.iterations;
    if (!improved) break;  // numerical floor reached
  }
  out.residual_norm = r;
  out.converged = r <= opts.tau_res * scale;
  return out;
}

namespace {

struct SplitBases {
  Eigen::MatrixXd tangent;  // d x (d - s)
  Eigen::MatrixXd normal;   // d x s, row space of the Jacobian
};

SplitBases split_bases(const MatrixFamily& fam, const VectorXd& x, const StratumChart& ch) {
  const int want = s_codim(ch.nu(), ch.field);
  if (want == 0)
    return {MatrixXd::Identity(fam.d, fam.d), MatrixXd(fam.d, 0)};
  MatrixXd J = residual_jacobian(fam, x, ch);
  Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeFullV);
  int rank = 0;
  if (svd.singularValues().size() > 0 && svd.singularValues()[0] > 0) {
    const double cut = 1e-8 * svd.singularValues()[0];
    while (rank < svd.singularValues().size() && svd.singularValues()[rank] > cut) ++rank;
  }
  if (rank != want) {
    std::ostringstream msg;
    msg << "stratum Jacobian rank " << rank << ", expected " << want << " (non-transverse point)";
    throw std::runtime_error(msg.str());
  }
  return {svd.matrixV().rightCols(fam.d - want), svd.matrixV().leftCols(want)};
}

}  // namespace

MatrixXd tangent_basis(const MatrixFamily& fam, const VectorXd& x, const StratumChart& ch) {
  return split_bases(fam, x, ch).tangent;
}

RestrictedHessian restricted_hessian(const MatrixFamily& fam, const VectorXd& x, int k,
                                     const StratumChart& ch, const StratumOptions& opts) {
  MatrixXd T = tangent_basis(fam, x, ch);
  RestrictedHessian out;
  const int m = static_cast<int>(T.cols());
  if (m == 0) {
    out.hessian = MatrixXd(0, 0);
    out.eigs = VectorXd(0);
    return out;
  }
  auto value_on_stratum = [&](const VectorXd& u) {
    Projection p = project_to_stratum(fam, x + T * u, ch, opts);
    if (!p.converged) throw std::runtime_error("stratum projection failed in Hessian stencil");
    return eig_sorted(fam.eval(p.x)).eigenvalues[k - 1];
  };
  const double h = opts.hess_step * (1 + x.norm());
  out.hessian = fd_hessian(value_on_stratum, VectorXd::Zero(m), h);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(out.hessian);
  out.eigs = es.eigenvalues();
  const double tau = opts.tau_hess * (1 + out.hessian.norm());
  out.mu = 0;
  out.nondegenerate = true;
  for (int i = 0; i < m; ++i) {
    if (out.eigs[i] < -tau) ++out.mu;
    if (std::abs(out.eigs[i]) <= tau) out.nondegenerate = false;
  }
  return out;
}

TraceResult trace_stratum(const MatrixFamily& fam, const VectorXd& x0, int k, double step,
                          int max_steps, const StratumOptions& opts) {
  if (step <= 0 || max_steps < 1) throw std::invalid_argument("trace_stratum: bad step budget");
  StratumChart ch = make_chart(fam, x0, k, opts);
  if (fam.d - s_codim(ch.nu(), ch.field) != 1)
    throw std::invalid_argument("trace_stratum: stratum is not one-dimensional here");

  TraceResult out;
  Projection p0 = project_to_stratum(fam, x0, ch, opts);
  if (!p0.converged) return out;
  out.points.push_back(p0.x);

  VectorXd prev_dir = VectorXd::Zero(fam.d);
  for (int i = 0; i < max_steps; ++i) {
    const VectorXd& cur = out.points.back();
    VectorXd t;
    try {
      ch = make_chart(fam, cur, k, opts);
      t = tangent_basis(fam, cur, ch).col(0);
    } catch (const std::runtime_error&) {
      return out;  // open trace, frame lost
    }
    if (i > 0 && t.dot(prev_dir) < 0) t = -t;
    prev_dir = t;

    Projection p = project_to_stratum(fam, cur + step * t, ch, opts);
    if (!p.converged) return out;

    // Non-degeneracy along the curve is condition (N) transverse to it:
    // the compressed derivatives in the normal directions must leave a
    // one-dimensional definite complement. (At the point itself the
    // tangent slope usually puts the identity into the range, so the
    // pointwise test would reject every non-critical stratum point.)
    try {
      StratumChart chp = make_chart(fam, p.x, k, opts);
      SplitBases bases = split_bases(fam, p.x, chp);
      HOperator full = h_operator(fam, p.x, cluster_at(eig_sorted(fam.eval(p.x)), k,
                                                       effective_cluster_tol(opts)));
      HOperator normal;
      normal.field = full.field;
      for (int j = 0; j < bases.normal.cols(); ++j)
        normal.images.push_back(apply_h(full, bases.normal.col(j)));
      ConditionN n = check_condition_N(normal, opts.tau_def);
      if (n.status != ConditionN::Status::Holds) {
        out.hit_condition_boundary = true;
        return out;
      }
    } catch (const std::runtime_error&) {
      out.hit_condition_boundary = true;
      return out;
    }

    double seg = fam.domain == Domain::Torus ? torus_dist(p.x, cur) : (p.x - cur).norm();
    out.length += seg;
    out.points.push_back(p.x);

    if (i >= 2) {
      double back = fam.domain == Domain::Torus ? torus_dist(p.x, out.points.front())
                                                : (p.x - out.points.front()).norm();
      if (back <= step / 2) {
        out.length += back;
        out.closed = true;
        return out;
      }
    }
  }
  return out;
}

Extremum extremum_classify(int nu, int rel_index, int mu, int tangent_dim) {
  if (rel_index == nu && mu == tangent_dim) return Extremum::Max;
  if (rel_index == 1 && mu == 0) return Extremum::Min;
  return Extremum::Neither;
}

}  // namespace morseig
