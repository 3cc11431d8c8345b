#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "morseig/grassmann.hpp"
#include "morseig/stratum.hpp"

using namespace morseig;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec2(double a, double b) {
  VectorXd x(2);
  x << a, b;
  return x;
}
VectorXd vec3(double a, double b, double c) {
  VectorXd x(3);
  x << a, b, c;
  return x;
}

// 3x3 family whose degenerate pair couples to the far eigenvalue, so the
// eigenprojector genuinely rotates with x. Stratum = {0}.
MatrixFamily coupled3() {
  MatrixFamily fam;
  fam.name = "coupled3";
  fam.d = 2;
  fam.n = 3;
  fam.field = Field::Real;
  fam.domain = Domain::Chart;
  fam.eval = [](const VectorXd& x) {
    MatrixXcd A(3, 3);
    A << x[0], x[1], 0.7 * x[0], x[1], -x[0], 0, 0.7 * x[0], 0, 3;
    return A;
  };
  fam.deriv = [](const VectorXd&, int j) {
    MatrixXcd A = MatrixXcd::Zero(3, 3);
    if (j == 0) {
      A(0, 0) = 1;
      A(1, 1) = -1;
      A(0, 2) = A(2, 0) = 0.7;
    } else {
      A(0, 1) = A(1, 0) = 1;
    }
    return A;
  };
  fam.scale_hint = 3;
  return fam;
}

// Two-band family with a straight degeneracy line along x3 whose normal
// data loses definiteness at tan(x3) = 1/2: the range of the normal
// compressed derivatives is span{sz, sin(x3) sx + cos(x3) diag(1,0)},
// whose complement is definite iff 2|sin(x3)| > |cos(x3)|.
MatrixFamily fading_line() {
  MatrixFamily fam;
  fam.name = "fading-line";
  fam.d = 3;
  fam.n = 2;
  fam.field = Field::Real;
  fam.domain = Domain::Chart;
  fam.eval = [](const VectorXd& x) {
    MatrixXcd A(2, 2);
    double s = std::sin(x[2]), c = std::cos(x[2]);
    A << x[0] + x[1] * c, x[1] * s, x[1] * s, -x[0];
    return A;
  };
  fam.deriv = [](const VectorXd& x, int j) {
    MatrixXcd A = MatrixXcd::Zero(2, 2);
    double s = std::sin(x[2]), c = std::cos(x[2]);
    if (j == 0) {
      A(0, 0) = 1;
      A(1, 1) = -1;
    } else if (j == 1) {
      A(0, 0) = c;
      A(0, 1) = A(1, 0) = s;
    } else {
      A(0, 0) = -x[1] * s;
      A(0, 1) = A(1, 0) = x[1] * c;
    }
    return A;
  };
  return fam;
}

MatrixFamily constant_diag3(double a, double b, double c) {
  MatrixFamily fam;
  fam.name = "constant-diag3";
  fam.d = 1;
  fam.n = 3;
  fam.field = Field::Real;
  fam.domain = Domain::Chart;
  Eigen::Vector3d v(a, b, c);
  fam.eval = [v](const VectorXd&) {
    MatrixXcd A = MatrixXcd::Zero(3, 3);
    A(0, 0) = v[0];
    A(1, 1) = v[1];
    A(2, 2) = v[2];
    return A;
  };
  fam.deriv = [](const VectorXd&, int) { return MatrixXcd::Zero(3, 3); };
  return fam;
}

}  // namespace

TEST_CASE("make_chart isolation guard") {
  // gap 2.5e-6 vs cluster width 1.5e-6: inside the 10x exclusion zone
  MatrixFamily crowd = constant_diag3(0, 1.5e-6, 4e-6);
  StratumOptions opts;
  opts.cluster_tol = 2e-6;
  CHECK_THROWS_AS(make_chart(crowd, VectorXd::Zero(1), 1, opts), std::runtime_error);

  // same cluster but a healthy gap
  MatrixFamily fine = constant_diag3(0, 1.5e-6, 1);
  StratumChart ch = make_chart(fine, VectorXd::Zero(1), 1, opts);
  CHECK(ch.nu() == 2);
  CHECK(ch.lo == 1);
  CHECK(ch.hi == 2);
  CHECK(ch.isolation_gap == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(ch.U_ref.rows() == 3);
  CHECK(ch.U_ref.cols() == 2);
}

TEST_CASE("continued isometry: gauge and guard") {
  // full-size cluster (n = nu): the aligned frame is exactly U_ref
  MatrixFamily cone = builtin("cone-symmetric");
  StratumChart ch = make_chart(cone, VectorXd::Zero(2), 1);
  for (double r : {0.05, 0.3}) {
    MatrixXcd U = continued_isometry(cone, vec2(r, -r / 2), ch);
    CHECK((U - ch.U_ref).norm() < 1e-12);
  }

  // proper sub-cluster: isometry columns span the branch range
  MatrixFamily c3 = coupled3();
  StratumChart ch3 = make_chart(c3, VectorXd::Zero(2), 1);
  MatrixXcd U = continued_isometry(c3, vec2(0.01, 0.02), ch3);
  CHECK((U.adjoint() * U - MatrixXcd::Identity(2, 2)).norm() < 1e-12);
  SpectralData s = eig_sorted(c3.eval(vec2(0.01, 0.02)));
  MatrixXcd V = s.eigenvectors.leftCols(2);
  // same column span: projectors agree
  CHECK((U * U.adjoint() - V * V.adjoint()).norm() < 1e-10);

  // cluster width grows until the far eigenvalue is inside 2x width
  CHECK_THROWS_AS(continued_isometry(c3, vec2(2.0, 0), ch3), std::runtime_error);
}

TEST_CASE("stratum residual: exact law on the symmetric cone") {
  MatrixFamily cone = builtin("cone-symmetric");
  StratumChart ch = make_chart(cone, VectorXd::Zero(2), 1);
  CHECK(stratum_residual(cone, VectorXd::Zero(2), ch).norm() == doctest::Approx(0));
  for (double phi : {0.0, 0.7, 2.1, 4.0}) {
    for (double r : {0.01, 0.2, 0.8}) {
      VectorXd x = vec2(r * std::cos(phi), r * std::sin(phi));
      double got = stratum_residual(cone, x, ch).norm();
      CHECK(got == doctest::Approx(std::sqrt(2.0) * r).epsilon(1e-10));
    }
  }
}

TEST_CASE("residual jacobian matches finite differences on the stratum") {
  MatrixFamily c3 = coupled3();
  VectorXd x0 = VectorXd::Zero(2);
  StratumChart ch = make_chart(c3, x0, 1);
  MatrixXd J = residual_jacobian(c3, x0, ch);
  CHECK(J.rows() == s_codim(2, Field::Real));
  CHECK(J.cols() == 2);

  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    VectorXd e = VectorXd::Unit(2, j);
    VectorXd fd = (stratum_residual(c3, x0 + h * e, ch) - stratum_residual(c3, x0 - h * e, ch)) /
                  (2 * h);
    CHECK((fd - J.col(j)).norm() < 1e-6);
  }

  // the nodal ring's jacobian kills exactly the ring direction
  MatrixFamily ring = builtin("nodal-ring-t3");
  StratumChart rch = make_chart(ring, vec3(0, 0, 0.4), 1);
  MatrixXd Jr = residual_jacobian(ring, vec3(0, 0, 0.4), rch);
  CHECK(Jr.col(2).norm() < 1e-12);
  CHECK(Jr.leftCols(2).colPivHouseholderQr().rank() == 2);
}

TEST_CASE("projection onto the stratum") {
  MatrixFamily cone = builtin("cone-symmetric");
  StratumChart ch = make_chart(cone, VectorXd::Zero(2), 1);
  Projection p = project_to_stratum(cone, vec2(0.1, -0.05), ch);
  CHECK(p.converged);
  CHECK(p.x.norm() < 1e-9);
  CHECK(p.residual_norm < 1e-12);

  MatrixFamily weyl = builtin("weyl-t3");
  StratumChart wch = make_chart(weyl, VectorXd::Zero(3), 1);
  Projection pw = project_to_stratum(weyl, vec3(0.05, -0.03, 0.08), wch);
  CHECK(pw.converged);
  CHECK(pw.x.norm() < 1e-9);

  MatrixFamily c3 = coupled3();
  StratumChart ch3 = make_chart(c3, VectorXd::Zero(2), 1);
  Projection p3 = project_to_stratum(c3, vec2(0.02, -0.01), ch3);
  CHECK(p3.converged);
  CHECK(p3.x.norm() < 1e-8);
  CHECK(p3.residual_norm < 1e-12);

  // idempotency
  Projection p3b = project_to_stratum(c3, p3.x, ch3);
  CHECK(p3b.converged);
  CHECK((p3b.x - p3.x).norm() < 1e-10);
  CHECK(p3b.iterations <= 3);

  // the ring: projection moves transversally, not along the ring
  MatrixFamily ring = builtin("nodal-ring-t3");
  StratumOptions wide;
  wide.cluster_tol = 0.05;
  StratumChart rch = make_chart(ring, vec3(0.01, -0.01, 0.4), 1, wide);
  Projection pr = project_to_stratum(ring, vec3(0.01, -0.01, 0.4), rch, wide);
  CHECK(pr.converged);
  CHECK(std::abs(std::sin(pr.x[0])) < 1e-12);
  CHECK(std::abs(std::sin(pr.x[1])) < 1e-12);
  CHECK(std::abs(pr.x[2] - 0.4) < 1e-3);
}

TEST_CASE("tangent basis") {
  // zero-dimensional stratum: empty tangent
  MatrixFamily cone = builtin("cone-symmetric");
  StratumChart ch = make_chart(cone, VectorXd::Zero(2), 1);
  MatrixXd T = tangent_basis(cone, VectorXd::Zero(2), ch);
  CHECK(T.rows() == 2);
  CHECK(T.cols() == 0);

  // ring: tangent is the x3 axis
  MatrixFamily ring = builtin("nodal-ring-t3");
  StratumChart rch = make_chart(ring, vec3(0, 0, 0.4), 1);
  MatrixXd Tr = tangent_basis(ring, vec3(0, 0, 0.4), rch);
  CHECK(Tr.cols() == 1);
  CHECK(std::abs(Tr.col(0)[2]) == doctest::Approx(1.0).epsilon(1e-12));

  // band crossing with too few parameters: jacobian rank falls short
  MatrixFamily gra = builtin("graphene-t2");
  VectorXd dirac = vec2(2 * M_PI / 3, 4 * M_PI / 3);
  StratumChart gch = make_chart(gra, dirac, 1);
  CHECK_THROWS_AS(tangent_basis(gra, dirac, gch), std::runtime_error);
}

TEST_CASE("restricted hessian against closed forms") {
  MatrixFamily ring = builtin("nodal-ring-t3");

  // lambda|_S = cos(x3): curvature -1 at the node x3 = 0, for both branches
  for (int k : {1, 2}) {
    StratumChart ch = make_chart(ring, VectorXd::Zero(3), k);
    RestrictedHessian rh = restricted_hessian(ring, VectorXd::Zero(3), k, ch);
    CHECK(rh.eigs.size() == 1);
    CHECK(rh.eigs[0] == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK(rh.mu == 1);
    CHECK(rh.nondegenerate);
  }

  // +1 at the antipode x3 = pi
  StratumChart chp = make_chart(ring, vec3(0, 0, M_PI), 2);
  RestrictedHessian rhp = restricted_hessian(ring, vec3(0, 0, M_PI), 2, chp);
  CHECK(rhp.eigs[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(rhp.mu == 0);
  CHECK(rhp.nondegenerate);

  // zero-dimensional stratum: trivially nondegenerate with mu = 0
  MatrixFamily cone = builtin("cone-symmetric");
  StratumChart cch = make_chart(cone, VectorXd::Zero(2), 1);
  RestrictedHessian rhc = restricted_hessian(cone, VectorXd::Zero(2), 1, cch);
  CHECK(rhc.mu == 0);
  CHECK(rhc.nondegenerate);
  CHECK(rhc.eigs.size() == 0);

  // flat restriction (lambda|_S linear): degenerate, honest about it
  MatrixFamily sym2 = builtin("sym2-identity");
  StratumChart sch = make_chart(sym2, vec3(0.3, 0, 0), 1);
  RestrictedHessian rhs = restricted_hessian(sym2, vec3(0.3, 0, 0), 1, sch);
  CHECK_FALSE(rhs.nondegenerate);
  CHECK(rhs.mu == 0);
}

TEST_CASE("trace_stratum closes the nodal ring") {
  MatrixFamily ring = builtin("nodal-ring-t3");
  TraceResult t = trace_stratum(ring, vec3(0, 0, 0.4), 1, 0.1, 200);
  CHECK(t.closed);
  CHECK_FALSE(t.hit_condition_boundary);
  CHECK(t.length == doctest::Approx(2 * M_PI).epsilon(0.01));
  CHECK(t.points.size() > 60);
  for (const auto& p : t.points) {
    CHECK(std::abs(std::sin(p[0])) < 1e-10);
    CHECK(std::abs(std::sin(p[1])) < 1e-10);
  }

  // off-stratum seed with a generous cluster window: corrector pulls in
  StratumOptions wide;
  wide.cluster_tol = 0.05;
  TraceResult t2 = trace_stratum(ring, vec3(0.01, -0.01, 0.4), 1, 0.1, 200, wide);
  CHECK(t2.closed);
  CHECK(t2.length == doctest::Approx(2 * M_PI).epsilon(0.01));
}

TEST_CASE("trace_stratum on a chart line: step budget, no closure") {
  MatrixFamily sym2 = builtin("sym2-identity");
  TraceResult t = trace_stratum(sym2, vec3(0.0, 0, 0), 1, 0.05, 40);
  CHECK_FALSE(t.closed);
  CHECK_FALSE(t.hit_condition_boundary);
  CHECK(t.points.size() == 41);
  CHECK(t.length == doctest::Approx(40 * 0.05).epsilon(1e-6));
  for (const auto& p : t.points) {
    CHECK(std::abs(p[1]) < 1e-10);
    CHECK(std::abs(p[2]) < 1e-10);
  }
}

TEST_CASE("trace_stratum stops where the normal data loses definiteness") {
  MatrixFamily fam = fading_line();
  TraceResult t = trace_stratum(fam, vec3(0, 0, M_PI / 2), 1, 0.05, 200);
  CHECK(t.hit_condition_boundary);
  CHECK_FALSE(t.closed);
  // boundary sits at |tan(x3)| = 1/2, symmetric about pi/2
  double expected = M_PI / 2 - std::atan(0.5);
  CHECK(std::abs(t.length - expected) <= 0.11);
  for (const auto& p : t.points) {
    CHECK(std::abs(p[0]) < 1e-10);
    CHECK(std::abs(p[1]) < 1e-10);
    CHECK(2 * std::abs(std::sin(p[2])) > std::abs(std::cos(p[2])) - 1e-9);
  }
}

TEST_CASE("trace_stratum rejects strata of the wrong dimension") {
  CHECK_THROWS_AS(trace_stratum(builtin("cone-symmetric"), VectorXd::Zero(2), 1, 0.1, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(trace_stratum(builtin("weyl-t3"), VectorXd::Zero(3), 1, 0.1, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(trace_stratum(builtin("nodal-ring-t3"), vec3(0, 0, 0.4), 1, -1, 10),
                  std::invalid_argument);
}

TEST_CASE("extremum_classify decision table") {
  CHECK(extremum_classify(2, 2, 0, 0) == Extremum::Max);
  CHECK(extremum_classify(2, 1, 0, 0) == Extremum::Min);
  CHECK(extremum_classify(2, 2, 1, 1) == Extremum::Max);
  CHECK(extremum_classify(2, 1, 1, 1) == Extremum::Neither);
  CHECK(extremum_classify(2, 2, 0, 1) == Extremum::Neither);
  CHECK(extremum_classify(3, 2, 0, 0) == Extremum::Neither);
  CHECK(extremum_classify(1, 1, 0, 3) == Extremum::Min);
  CHECK(extremum_classify(1, 1, 3, 3) == Extremum::Max);
  CHECK(extremum_classify(1, 1, 1, 3) == Extremum::Neither);
}
