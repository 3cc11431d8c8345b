#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morseig/classify.hpp"
#include "morseig/grassmann.hpp"
#include "morseig/stratum.hpp"

namespace morseig {

struct ScanOptions {
  double cluster_tol = -1;   // < 0: cluster_default_tol
  double tau_def = 1e-7;
  double tau_hess = 1e-6;
  double tau_res = 1e-10;
  double grad_tol = 1e-8;    // Newton polish target, scaled by (1+scale_hint)
  double seed_factor = 4.0;  // candidate thresholds in units of grid spacing
  std::uint64_t seed = 1;
  std::optional<IntPoly> manifold_poincare;  // default: torus_poincare(d)
};

// Eigenvalues of the family on the uniform grid (2*pi/grid spacing),
// shared between branch indices k. values(cell, j) = lambda_{j+1}.
struct GridCache {
  int d = 0;
  int grid = 0;
  Eigen::MatrixXd values;

  int cells() const { return static_cast<int>(values.rows()); }
  int index(const std::vector<int>& coord) const;
  Eigen::VectorXd point(int cell) const;
};
GridCache grid_eigenvalues(const MatrixFamily& fam, int grid);

// Frozen-frame projection from a rough seed: the cluster window around
// branch k is read off the spectrum at x0 (branches within a few
// multiples of the observed gap), then Gauss-Newton projects onto the
// stratum it brackets. Throws std::runtime_error when the window fails
// to separate from the rest of the spectrum or the branch is simple;
// converged = false means no stratum nearby (avoided crossing).
Projection project_near(const MatrixFamily& fam, const Eigen::VectorXd& x0, int k,
                        const StratumOptions& opts = {});

struct CriticalPointReport {
  Eigen::VectorXd x;  // each coordinate wrapped into [0, 2*pi)
  double value = 0;   // lambda_k(x)
  Classification cls;
  int basin = -1;  // grid cell that seeded the point
};

struct MorseReport {
  std::string family;
  int k = 1;
  int d = 0;
  int n = 0;
  int grid = 0;
  std::uint64_t seed = 1;
  std::vector<CriticalPointReport> points;  // critical points, sorted by location
  // stratum points whose restriction is critical but which are
  // topologically regular; they enter the submanifold-sum check only
  std::vector<CriticalPointReport> regular_strata;
  IntPoly p_morse;
  IntPoly p_manifold;
  MorseDivision division;
  std::map<int, int> c_mu;  // smooth nondegenerate critical points by index
  IntPoly d_contrib;        // total contribution of nu >= 2 points
  double lambda_min = 0;
  double lambda_max = 0;
  bool inconclusive = false;
  std::vector<std::string> notices;

  std::string to_json() const;
  std::string markdown() const;
};

// Finds and classifies all critical points of lambda_k on the torus:
// cluster-gap dips seed stratum projection (plus a Newton polish along
// the stratum tangent), small-gradient cells seed smooth Newton; the
// merged, deduplicated set is classified and assembled into the Morse
// polynomial, then tested against the manifold Poincare polynomial.
// Deterministic for fixed inputs and seed. Pass a cache to share the
// grid eigendecomposition across branch indices.
MorseReport scan(const MatrixFamily& fam, int k, int grid, const ScanOptions& opts = {},
                 const GridCache* cache = nullptr);

struct BoundCheck {
  std::string label;
  long lhs = 0;
  long rhs = 0;
  bool pass = false;
};

struct VanHoveTable {
  int d = 0;
  int n = 0;
  std::vector<std::map<int, int>> c_mu;  // per k (0-based k-1)
  std::vector<BoundCheck> checks;
  bool all_pass = false;
  bool inconclusive = false;

  std::string to_json() const;
  std::string markdown() const;
};

// Saddle-count lower bounds on T^2 / T^3: c_1(k) >= 2 in d = 2;
// c_1(1) >= 3, c_1(k) + c_2(k-1) >= 4, c_2(n) >= 3 in d = 3.
// Requires one report per k = 1..n on the same family and grid.
VanHoveTable van_hove_table(const std::vector<MorseReport>& reports, int d);

struct MinMaxRow {
  int k = 2;  // compares k-1 against k
  double max_prev = 0, max_cur = 0;
  double min_prev = 0, min_cur = 0;
  bool pass = false;
};

struct MinMaxCheck {
  std::vector<MinMaxRow> rows;
  bool all_pass = false;

  std::string to_json() const;
  std::string markdown() const;
};

// Strict interlacing of global extrema of consecutive ordered
// eigenvalues, margin 1e-9.
MinMaxCheck minmax_separation(const std::vector<MorseReport>& reports);

struct ConseqCheck {
  bool applicable = false;  // false when stratum Morse data is incomplete
  IntPoly left;             // sum over strata of T * restricted Morse data
  bool left_dominates = false;   // left >= p_morse coefficientwise
  bool morse_dominates = false;  // p_morse >= p_manifold coefficientwise
  bool pass = false;
  std::string note;

  std::string to_json() const;
};

// Submanifold-sum refinement of the Morse inequality for one branch:
// the restricted Morse data, weighted by the transverse contributions,
// must dominate the Morse polynomial, which dominates the manifold.
ConseqCheck conseq_check(const MorseReport& report);

struct HfCheck {
  int trials = 0;
  double max_rel_err = 0;
  double tol = 1e-5;
  bool pass = false;

  std::string to_json() const;
};

// First-order slope audit: compressed-derivative eigenvalues against
// Richardson-extrapolated one-sided secants of the sorted branches,
// over seeded random families (d <= 3, n <= 6, both fields) plus the
// builtin degeneracies.
HfCheck hf_check(int trials = 200, std::uint64_t seed = 20260819, double tol = 1e-5);

// 0 = clean pass, 2 = inequality violated, 3 = inconclusive (flagged).
int exit_code(bool violated, bool inconclusive);
int exit_code(const MorseReport& report);

// Grid samples of lambda_k as "x1,x2,lambda_k" rows (d = 2 only).
std::string contour_csv(const MatrixFamily& fam, int k, int grid);

// One point per row, coordinates comma-separated.
std::string polyline_csv(const TraceResult& trace);

}  // namespace morseig
