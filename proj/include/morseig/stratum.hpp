#pragma once

#include <Eigen/Dense>

#include <vector>

#include "morseig/classify.hpp"

namespace morseig {

struct StratumOptions {
  double cluster_tol = -1;  // < 0: cluster_default_tol
  double tau_res = 1e-10;   // residual acceptance, scaled by (1+||F||)
  int max_iter = 50;
  double hess_step = 1e-3;  // scaled by (1+||x||)
  double tau_hess = 1e-6;
  double tau_def = 1e-7;
};

// Frozen frame for locating the constant-multiplicity stratum near a
// reference point: the zero set of the traceless compressed residual in
// a smoothly continued eigenprojector basis.
struct StratumChart {
  int k = 1;
  int lo = 1, hi = 1;
  Field field = Field::Real;
  Eigen::MatrixXcd U_ref;    // n x nu frozen isometry
  double isolation_gap = 0;  // spectral gap to the rest at creation

  int nu() const { return hi - lo + 1; }
  int rel_index() const { return hi - k + 1; }
};

// Builds the frame at x; requires the cluster to be isolated (outside
// gap > 10x the cluster width). Throws std::runtime_error otherwise.
StratumChart make_chart(const MatrixFamily& fam, const Eigen::VectorXd& x, int k,
                        const StratumOptions& opts = {});

// Eigenbasis of the chart's branch range at x, gauge-aligned to U_ref by
// the polar factor of V*U_ref. Throws if the cluster loses isolation.
Eigen::MatrixXcd continued_isometry(const MatrixFamily& fam, const Eigen::VectorXd& x,
                                    const StratumChart& ch);

// Traceless coordinates of the compressed family at x: s(nu) reals that
// vanish exactly on the stratum.
Eigen::VectorXd stratum_residual(const MatrixFamily& fam, const Eigen::VectorXd& x,
                                 const StratumChart& ch);

// Columns j = traceless coordinates of the compressed j-th partial
// derivative; exact on the stratum (the projector-derivative terms
// cancel there against the compressed family being a multiple of I).
Eigen::MatrixXd residual_jacobian(const MatrixFamily& fam, const Eigen::VectorXd& x,
                                  const StratumChart& ch);

struct Projection {
  bool converged = false;
  Eigen::VectorXd x;
  double residual_norm = 0;
  int iterations = 0;
};

// Gauss-Newton with minimal-norm steps and step halving; iterates past
// the acceptance tolerance down to the numerical floor so downstream
// finite differences see a clean stratum.
Projection project_to_stratum(const MatrixFamily& fam, const Eigen::VectorXd& x0,
                              const StratumChart& ch, const StratumOptions& opts = {});

// Orthonormal null space of the residual Jacobian, d x (d - s(nu)).
// Throws std::runtime_error if the Jacobian rank is not s(nu).
Eigen::MatrixXd tangent_basis(const MatrixFamily& fam, const Eigen::VectorXd& x,
                              const StratumChart& ch);

struct RestrictedHessian {
  Eigen::MatrixXd hessian;  // in tangent coordinates
  Eigen::VectorXd eigs;     // ascending
  int mu = 0;               // eigenvalues below -tau_hess*(1+||H||)
  bool nondegenerate = true;
};

// Second differences of lambda_k along projected tangent steps, with one
// Richardson halving. Empty tangent space returns mu = 0, nondegenerate.
RestrictedHessian restricted_hessian(const MatrixFamily& fam, const Eigen::VectorXd& x, int k,
                                     const StratumChart& ch, const StratumOptions& opts = {});

struct TraceResult {
  std::vector<Eigen::VectorXd> points;
  bool closed = false;
  bool hit_condition_boundary = false;  // (N) margin fell below tau_def
  double length = 0;
};

// Predictor-corrector continuation of a one-dimensional stratum
// (requires d - s(nu) = 1). The frame is reseated at every accepted
// vertex; stops on closure (torus metric for torus families), corrector
// failure, the (N) margin dropping below tau_def, or max_steps.
TraceResult trace_stratum(const MatrixFamily& fam, const Eigen::VectorXd& x0, int k, double step,
                          int max_steps, const StratumOptions& opts = {});

// Max iff rel_index = nu (the branch is the bottom of its cluster, so
// the split bends it downward) and the restriction has full Morse index;
// Min iff rel_index = 1 with index 0.
Extremum extremum_classify(int nu, int rel_index, int mu, int tangent_dim);

}  // namespace morseig
