#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "morseig/field.hpp"

namespace morseig {

enum class Domain { Torus, Chart };

inline const char* to_string(Domain d) {
  return d == Domain::Torus ? "torus" : "chart";
}

// One-sided harmonic term of a trigonometric-polynomial family.  The
// evaluated contribution is (C e^{i m.x} + C* e^{-i m.x}) / 2, which is
// self-adjoint for any complex coefficient matrix C; writing C = P + iQ
// it equals P cos(m.x) - Q sin(m.x).
struct TrigTerm {
  Eigen::VectorXi m;
  Eigen::MatrixXcd coeff;
};

struct TrigPolySpec {
  int d = 0;
  int n = 0;
  Field field = Field::Real;
  Domain domain = Domain::Torus;
  Eigen::MatrixXcd constant;  // self-adjoint (real symmetric for Field::Real)
  std::vector<TrigTerm> terms;

  // Folds mirrored harmonics into canonical one-sided form (first nonzero
  // component of m positive), merges duplicates, absorbs m = 0 terms into
  // the constant.  Then checks the field constraints.  Throws
  // std::invalid_argument on violations.
  void canonicalize_and_validate();

  static TrigPolySpec from_json_text(const std::string& text);
  std::string to_json_text() const;
};

// A smooth family of self-adjoint matrices over a chart of R^d or the
// torus T^d (period 2*pi per coordinate).
struct MatrixFamily {
  std::string name;
  int d = 0;
  int n = 0;
  Field field = Field::Real;
  Domain domain = Domain::Chart;
  // Evaluator; output is n x n self-adjoint (real entries when field is
  // Real, stored as complex with zero imaginary part).
  std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)> eval;
  // Analytic partial derivative in coordinate j; empty when the family
  // only supports finite differencing.
  std::function<Eigen::MatrixXcd(const Eigen::VectorXd&, int)> deriv;
  // Rough bound on sup-norm of the family; drives relative tolerances.
  double scale_hint = 1.0;
  // Present for trig-polynomial families; enables JSON round trips.
  std::optional<TrigPolySpec> spec;
};

// Built-in families:
//   cone-symmetric  [[x1, x2], [x2, -x1]]             Chart(2), real
//   cone-tilted     [[x1, x2], [x2, 2 x1]]            Chart(2), real
//   borderline      [[x1, x2], [x2, x1 x2 + x1^2]]    Chart(2), real
//   sym2-identity   [[x+y, z], [z, x-y]]              Chart(3), real
//   real2band-t2    sin(x1) sz + sin(x2) sx           Torus(2), real
//   weyl-t3         sum sin(xj) s_j                   Torus(3), complex
//   nodal-ring-t3   sin(x1) sz + sin(x2) sx + cos(x3) I   Torus(3), real
//   graphene-t2     offdiag 1 + e^{i x1} + e^{i x2}   Torus(2), complex
MatrixFamily builtin(const std::string& name);
const std::vector<std::string>& builtin_names();

MatrixFamily from_spec(TrigPolySpec spec);

// Deterministic random trig family: harmonics with |m|_inf <= max_harmonic
// (one-sided), coefficient entries i.i.d. uniform in [-amplitude, amplitude].
MatrixFamily random_family(std::uint64_t seed, int d, int n, Field field,
                           int max_harmonic, double amplitude);

// Resolves a builtin name or a path to a JSON family spec.
MatrixFamily load_family(const std::string& name_or_path);

}  // namespace morseig
