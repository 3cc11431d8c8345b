#pragma once

#include <Eigen/Dense>

#include <vector>

#include "morseig/families.hpp"

namespace morseig {

// Validates that A equals its conjugate transpose within
// 1e-12*(1+||A||_F) and returns the symmetrized matrix (A+A*)/2.
// Throws std::invalid_argument otherwise.
Eigen::MatrixXcd require_self_adjoint(const Eigen::MatrixXcd& A);

struct SpectralData {
  Eigen::VectorXd eigenvalues;    // ascending
  Eigen::MatrixXcd eigenvectors;  // orthonormal columns, same order
  int n() const { return static_cast<int>(eigenvalues.size()); }
};

// Dense self-adjoint eigendecomposition, eigenvalues ascending.
// Deterministic for fixed input bits; throws std::runtime_error if the
// solver fails to converge.
SpectralData eig_sorted(const Eigen::MatrixXcd& A);

// Maximal run of eigenvalue indices around branch k whose consecutive
// gaps stay below tol*(1+max|lambda|). Indices are 1-based to match
// lambda_1 <= ... <= lambda_n.
struct EigenCluster {
  int k = 1;
  int lo = 1;
  int hi = 1;
  double mean = 0.0;
  Eigen::MatrixXcd U;  // n x nu, orthonormal columns spanning the cluster space

  int nu() const { return hi - lo + 1; }
  // Position of lambda_k counted from the top of the cluster (1 = topmost).
  int rel_index() const { return hi - k + 1; }
};

inline constexpr double cluster_default_tol = 1e-6;

EigenCluster cluster_at(const SpectralData& s, int k, double tol = cluster_default_tol);

// U* X U with an isometry check (||U*U - I||_max <= 1e-8); result is
// symmetrized.
Eigen::MatrixXcd compress(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& U);

// Partial derivatives of the family at x, one self-adjoint n x n matrix
// per coordinate. Analytic when the family provides derivatives,
// otherwise 4th-order central differences with step
// h = max(1e-5, 1e-4*max(1, ||x||_inf)).
std::vector<Eigen::MatrixXcd> differential(const MatrixFamily& fam, const Eigen::VectorXd& x);

// The compressed differential: images[j] = U*(d_j F)(x)U on the cluster
// eigenspace. Entries are meaningful up to simultaneous unitary
// conjugation by the choice of U; eigenvalues and definiteness verdicts
// are invariant.
struct HOperator {
  std::vector<Eigen::MatrixXcd> images;
  Field field = Field::Real;

  int d() const { return static_cast<int>(images.size()); }
  int nu() const { return images.empty() ? 0 : static_cast<int>(images.front().rows()); }
};

HOperator h_operator(const MatrixFamily& fam, const Eigen::VectorXd& x, const EigenCluster& c);

// sum_j v_j images[j].
Eigen::MatrixXcd apply_h(const HOperator& h, const Eigen::VectorXd& v);

// Orthonormal real coordinates on Sym_nu (Frobenius inner product):
// diagonal entries, then sqrt(2)*Re of each strict upper entry, and for
// the complex field also sqrt(2)*Im. Length sym_dim(nu, f).
Eigen::VectorXd sym_coords(const Eigen::MatrixXcd& X, Field f);
Eigen::MatrixXcd sym_uncoords(const Eigen::VectorXd& c, int nu, Field f);

// Coordinates of the traceless part only: s(nu) reals, zero exactly when
// X is a real multiple of the identity.
Eigen::VectorXd traceless_coords(const Eigen::MatrixXcd& X, Field f);

// Rank of span{images} inside Sym_nu as a real vector space, singular
// values thresholded at 1e-8*sigma_max.
int h_rank(const HOperator& h);

// Orthonormal basis of (Ran H)^perp in Sym_nu (real span, Frobenius
// pairing). Size = sym_dim(nu) - h_rank.
std::vector<Eigen::MatrixXcd> complement_basis(const HOperator& h);

// First-order slopes of the nu branches splitting from the cluster in
// direction v: eigenvalues of H(v), ascending.
Eigen::VectorXd hf_slopes(const HOperator& h, const Eigen::VectorXd& v);
Eigen::VectorXd hf_slopes(const MatrixFamily& fam, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& v, const EigenCluster& c);

}  // namespace morseig
