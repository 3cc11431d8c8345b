#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "morseig/poly.hpp"
#include "morseig/spectral.hpp"

namespace morseig {

struct ClassifyOptions {
  double cluster_tol = -1;  // < 0: cluster_default_tol
  double tau_def = 1e-7;    // definiteness margin
  double tau_hess = 1e-6;   // Hessian degeneracy margin, scaled by (1+||H||)
  double tol_grad = -1;     // < 0: 1e-6*(1+scale_hint)
  double hess_step = 1e-3;  // scaled by (1+||x||)
  std::uint64_t seed = 1;
};

enum class Verdict { Regular, SmoothCritical, NonDegenerateCritical, Borderline, NotCovered };
std::string to_string(Verdict v);

enum class Extremum { Max, Min, Neither };
std::string to_string(Extremum e);

struct DefiniteSearch {
  bool found = false;
  Eigen::VectorXd combo;  // unit coefficient vector over the basis
  double margin = 0.0;    // best lambda_min achieved at unit coefficients
};

// Maximizes lambda_min(sum_j c_j B_j) over the unit sphere of real
// coefficients by multi-start projected subgradient ascent (8*dim
// deterministic starts). Since c and -c are both feasible, a negative
// definite combination is found through its negation; found iff the
// optimum exceeds tau_def.
DefiniteSearch definite_in_span(const std::vector<Eigen::MatrixXcd>& basis,
                                double tau_def = 1e-7, std::uint64_t seed = 1);

struct RegularCheck {
  bool certified = false;
  Eigen::VectorXd witness;  // direction with H(witness) definite
  double margin = 0.0;
};

// Certifies topological regularity: some direction v has H(v) definite.
RegularCheck check_regular(const HOperator& h, double tau_def = 1e-7, std::uint64_t seed = 1);

struct ConditionN {
  enum class Status { Holds, ComplementDimNot1, ComplementNotDefinite };
  Status status = Status::ComplementDimNot1;
  Eigen::MatrixXcd B;  // complement matrix, trace-positive and unit Frobenius norm
  double margin = 0.0;  // lambda_min(B)
  int complement_dim = 0;
};

// (Ran H)^perp must be one-dimensional and spanned by a definite matrix.
ConditionN check_condition_N(const HOperator& h, double tau_def = 1e-7);

// True iff span{I} + Ran H equals all of Sym_nu (as a real space).
bool check_transversality(const HOperator& h);

// lambda_max(H(v)): upper bound for the Clarke directional derivative of
// lambda_k at x in direction v. Diagnostic only.
double clarke_bound(const HOperator& h, const Eigen::VectorXd& v);

struct Classification {
  Verdict verdict = Verdict::NotCovered;
  int k = 1;
  int nu = 1;
  int rel_index = 1;
  int mu = 0;
  int tangent_dim = 0;
  bool nondegenerate = false;
  Extremum extremum = Extremum::Neither;
  IntPoly contribution;  // t^mu * T_nu^i (t^mu for the smooth case)
  IntPoly z2;            // Z/2-coefficient contribution, real field only
  std::optional<Eigen::VectorXd> witness;       // regular certificate
  std::optional<Eigen::MatrixXcd> complement;   // borderline complement matrix
  std::string reason;  // Borderline / NotCovered explanation
  // diagnostics
  int rank = 0;
  int complement_dim = 0;
  double margin = 0.0;

  std::string to_json() const;
};

// Full decision tree for one parameter point: smooth branch analysis for
// nu = 1, regularity / condition (N) / transversality plus the stratum
// Morse data for nu >= 2.
Classification classify_point(const MatrixFamily& fam, const Eigen::VectorXd& x, int k,
                              const ClassifyOptions& opts = {});

}  // namespace morseig
