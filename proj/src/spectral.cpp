#include "morseig/spectral.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "morseig/grassmann.hpp"

namespace morseig {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXcd require_self_adjoint(const MatrixXcd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("matrix is not square");
  const double dev = (A - A.adjoint()).cwiseAbs().maxCoeff();
  if (dev > 1e-12 * (1 + A.norm())) {
    std::ostringstream msg;
    msg << "matrix is not self-adjoint (deviation " << dev << ")";
    throw std::invalid_argument(msg.str());
  }
  return 0.5 * (A + A.adjoint().eval());
}

SpectralData eig_sorted(const MatrixXcd& A) {
  const MatrixXcd H = require_self_adjoint(A);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(H);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("self-adjoint eigensolver did not converge");
  SpectralData out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  return out;
}

EigenCluster cluster_at(const SpectralData& s, int k, double tol) {
  const int n = s.n();
  if (k < 1 || k > n) throw std::invalid_argument("branch index out of range");
  if (tol <= 0) throw std::invalid_argument("cluster tolerance must be positive");
  const double width = tol * (1 + s.eigenvalues.cwiseAbs().maxCoeff());

  int lo = k - 1, hi = k - 1;  // 0-based
  while (lo > 0 && s.eigenvalues[lo] - s.eigenvalues[lo - 1] <= width) --lo;
  while (hi + 1 < n && s.eigenvalues[hi + 1] - s.eigenvalues[hi] <= width) ++hi;

  EigenCluster c;
  c.k = k;
  c.lo = lo + 1;
  c.hi = hi + 1;
  c.mean = s.eigenvalues.segment(lo, hi - lo + 1).mean();
  // Re-orthonormalize the cluster columns; near-degenerate eigenvectors
  // from the solver can lose orthogonality in the last digits.
  MatrixXcd block = s.eigenvectors.middleCols(lo, hi - lo + 1);
  Eigen::HouseholderQR<MatrixXcd> qr(block);
  c.U = qr.householderQ() * MatrixXcd::Identity(n, hi - lo + 1);
  return c;
}

MatrixXcd compress(const MatrixXcd& X, const MatrixXcd& U) {
  if (X.rows() != X.cols() || U.rows() != X.rows())
    throw std::invalid_argument("compress: dimension mismatch");
  const int nu = static_cast<int>(U.cols());
  const double dev = (U.adjoint() * U - MatrixXcd::Identity(nu, nu)).cwiseAbs().maxCoeff();
  if (dev > 1e-8) {
    std::ostringstream msg;
    msg << "compress: U is not an isometry (deviation " << dev << ")";
    throw std::invalid_argument(msg.str());
  }
  MatrixXcd Y = U.adjoint() * X * U;
  return 0.5 * (Y + Y.adjoint().eval());
}

std::vector<MatrixXcd> differential(const MatrixFamily& fam, const VectorXd& x) {
  if (x.size() != fam.d) throw std::invalid_argument("differential: point has wrong dimension");
  std::vector<MatrixXcd> out;
  out.reserve(fam.d);
  if (fam.deriv) {
    for (int j = 0; j < fam.d; ++j) {
      MatrixXcd D = fam.deriv(x, j);
      out.push_back(0.5 * (D + D.adjoint().eval()));
    }
    return out;
  }
  const double scale = std::max(1.0, x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
  const double h = std::max(1e-5, 1e-4 * scale);
  for (int j = 0; j < fam.d; ++j) {
    VectorXd e = VectorXd::Zero(fam.d);
    e[j] = 1.0;
    MatrixXcd D = (-fam.eval(x + 2 * h * e) + 8 * fam.eval(x + h * e) -
                   8 * fam.eval(x - h * e) + fam.eval(x - 2 * h * e)) /
                  (12 * h);
    out.push_back(0.5 * (D + D.adjoint().eval()));
  }
  return out;
}

HOperator h_operator(const MatrixFamily& fam, const VectorXd& x, const EigenCluster& c) {
  HOperator h;
  h.field = fam.field;
  for (const MatrixXcd& D : differential(fam, x)) h.images.push_back(compress(D, c.U));
  return h;
}

MatrixXcd apply_h(const HOperator& h, const VectorXd& v) {
  if (v.size() != h.d()) throw std::invalid_argument("apply_h: direction has wrong dimension");
  const int nu = h.nu();
  MatrixXcd sum = MatrixXcd::Zero(nu, nu);
  for (int j = 0; j < h.d(); ++j) sum += v[j] * h.images[j];
  return sum;
}

VectorXd sym_coords(const MatrixXcd& X, Field f) {
  const int nu = static_cast<int>(X.rows());
  const double r2 = std::sqrt(2.0);
  VectorXd c(sym_dim(nu, f));
  int p = 0;
  for (int i = 0; i < nu; ++i) c[p++] = X(i, i).real();
  for (int i = 0; i < nu; ++i)
    for (int j = i + 1; j < nu; ++j) {
      c[p++] = r2 * X(i, j).real();
      if (f == Field::Complex) c[p++] = r2 * X(i, j).imag();
    }
  return c;
}

MatrixXcd sym_uncoords(const VectorXd& c, int nu, Field f) {
  if (c.size() != sym_dim(nu, f)) throw std::invalid_argument("sym_uncoords: wrong length");
  const double r2 = std::sqrt(2.0);
  MatrixXcd X = MatrixXcd::Zero(nu, nu);
  int p = 0;
  for (int i = 0; i < nu; ++i) X(i, i) = c[p++];
  for (int i = 0; i < nu; ++i)
    for (int j = i + 1; j < nu; ++j) {
      double re = c[p++] / r2;
      double im = f == Field::Complex ? c[p++] / r2 : 0.0;
      X(i, j) = std::complex<double>(re, im);
      X(j, i) = std::complex<double>(re, -im);
    }
  return X;
}

VectorXd traceless_coords(const MatrixXcd& X, Field f) {
  const int nu = static_cast<int>(X.rows());
  const double r2 = std::sqrt(2.0);
  VectorXd c(s_codim(nu, f));
  int p = 0;
  // Orthonormal basis of the traceless diagonal: partial-sum combos.
  double partial = 0.0;
  for (int i = 1; i < nu; ++i) {
    partial += X(i - 1, i - 1).real();
    c[p++] = (partial - i * X(i, i).real()) / std::sqrt(double(i) * (i + 1));
  }
  for (int i = 0; i < nu; ++i)
    for (int j = i + 1; j < nu; ++j) {
      c[p++] = r2 * X(i, j).real();
      if (f == Field::Complex) c[p++] = r2 * X(i, j).imag();
    }
  return c;
}

namespace {

// Rows = sym coordinates of the images; the SVD of this matrix carries
// both the rank and the complement basis.
MatrixXd image_coord_matrix(const HOperator& h) {
  const int nu = h.nu();
  const int D = sym_dim(nu, h.field);
  MatrixXd M(h.d(), D);
  for (int j = 0; j < h.d(); ++j) M.row(j) = sym_coords(h.images[j], h.field).transpose();
  return M;
}

int svd_rank(const Eigen::JacobiSVD<MatrixXd>& svd) {
  if (svd.singularValues().size() == 0) return 0;
  const double cut = 1e-8 * svd.singularValues()[0];
  if (cut <= 0) return 0;
  int r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()[r] > cut) ++r;
  return r;
}

}  // namespace

int h_rank(const HOperator& h) {
  if (h.d() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(image_coord_matrix(h));
  return svd_rank(svd);
}

std::vector<MatrixXcd> complement_basis(const HOperator& h) {
  const int nu = h.nu();
  const int D = sym_dim(nu, h.field);
  std::vector<MatrixXcd> basis;
  if (h.d() == 0) {
    for (int i = 0; i < D; ++i) {
      VectorXd e = VectorXd::Zero(D);
      e[i] = 1.0;
      basis.push_back(sym_uncoords(e, nu, h.field));
    }
    return basis;
  }
  Eigen::JacobiSVD<MatrixXd> svd(image_coord_matrix(h), Eigen::ComputeFullV);
  const int rank = svd_rank(svd);
  for (int i = rank; i < D; ++i)
    basis.push_back(sym_uncoords(svd.matrixV().col(i), nu, h.field));
  return basis;
}

VectorXd hf_slopes(const HOperator& h, const VectorXd& v) {
  if (v.norm() <= 0) throw std::invalid_argument("hf_slopes: zero direction");
  return eig_sorted(apply_h(h, v)).eigenvalues;
}

VectorXd hf_slopes(const MatrixFamily& fam, const VectorXd& x, const VectorXd& v,
                   const EigenCluster& c) {
  return hf_slopes(h_operator(fam, x, c), v);
}

}  // namespace morseig
