#pragma once

#include <string>
#include <vector>

#include "morseig/field.hpp"
#include "morseig/poly.hpp"

namespace morseig {

// Dimension of Sym_nu(F) as a real vector space: nu(nu+1)/2 over the
// reals, nu^2 over the complexes.
int sym_dim(int nu, Field f);

// Codimension s(nu) = dim Sym_nu(F) - 1 of the set of matrices with a
// nu-fold degenerate eigenvalue; equals the number of independent
// conditions that pin the traceless part of the compressed family.
int s_codim(int nu, Field f);

// Gaussian binomial coefficient [n k]_q written as a polynomial in t
// with q = t^t_power.  Computed by the Pascal-type recursion
//   [n k] = [n-1 k-1] + q^k [n-1 k]
// in exact integers.  Returns 0 outside 0 <= k <= n.
IntPoly qbinom(int n, int k, int t_power = 1);

// Poincare polynomial (rational coefficients field) of the Grassmannian
// of k-planes in F^n; `oriented` selects the oriented double cover and
// is accepted only for the real field.  Gr(0,n) and Gr(n,n) are points
// and yield 1 under both flags.
IntPoly poincare_grassmannian(int k, int n, Field f, bool oriented = false);

// Difference oriented-minus-plain for real Grassmannians.  The
// coefficients are nonnegative; a negative one indicates a transcription
// bug and throws std::logic_error.
IntPoly twisted_poincare(int k, int n);

// Transverse contribution T_nu^i(t) of a multiplicity-nu critical point
// with relative index i (1-based, counted from the top of the cluster).
// The caller multiplies by t^mu for the Morse index mu of the restriction
// to the stratum.  i=1 gives 1; i=nu gives t^{s(nu)}.
IntPoly nonsmooth_contribution(int nu, int i, Field f);

// Z2-homology contribution t^{mu+s(i)} [nu-1 i-1]_t of a real
// multiplicity-nu point; never the zero polynomial, so it certifies
// topological criticality even when nonsmooth_contribution vanishes.
IntPoly z2_contribution(int nu, int i, int mu);

// Poincare polynomial (1+t)^d of the d-torus.
IntPoly torus_poincare(int d);

// Divisibility test behind the Morse inequalities: P - Q must equal
// (1+t) R with R coefficientwise nonnegative.
struct MorseDivision {
  bool satisfied = false;
  IntPoly remainder;         // R when satisfied
  int violation_degree = -1; // smallest degree where the test fails
};
MorseDivision morse_division(const IntPoly& p_morse, const IntPoly& p_manifold);

// Triangular table of nonsmooth_contribution values, rows nu = 1..max_nu,
// columns i = 1..nu.
struct ContributionTable {
  int max_nu = 0;
  Field field = Field::Real;
  std::vector<std::vector<IntPoly>> rows;

  const IntPoly& cell(int nu, int i) const;  // 1-based
  std::string markdown() const;
  std::string csv() const;
};
ContributionTable emit_table(int max_nu, Field f);

}  // namespace morseig
