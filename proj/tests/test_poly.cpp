#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "morseig/grassmann.hpp"
#include "morseig/poly.hpp"

using namespace morseig;

namespace {

// Independent oracle for the Gaussian binomial: expands the product
//   [n k]_q = prod_{j=1..k} (1 - q^{n-k+j}) / (1 - q^j)
// with exact integer power-series division (all denominators have unit
// constant term, so the division terminates exactly).  Deliberately does
// not reuse IntPoly.
std::vector<std::int64_t> oracle_qbinom(int n, int k) {
  auto mul = [](const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    std::vector<std::int64_t> out(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  };
  std::vector<std::int64_t> num{1}, den{1};
  for (int j = 1; j <= k; ++j) {
    std::vector<std::int64_t> f1(static_cast<std::size_t>(n - k + j) + 1, 0);
    f1[0] = 1;
    f1.back() = -1;
    num = mul(num, f1);
    std::vector<std::int64_t> f2(static_cast<std::size_t>(j) + 1, 0);
    f2[0] = 1;
    f2.back() = -1;
    den = mul(den, f2);
  }
  // Ascending division num/den; quotient degree is k(n-k).
  std::vector<std::int64_t> q(static_cast<std::size_t>(k * (n - k)) + 1, 0);
  std::vector<std::int64_t> rem = num;
  rem.resize(std::max(rem.size(), q.size() + den.size()), 0);
  for (std::size_t j = 0; j < q.size(); ++j) {
    q[j] = rem[j];  // den[0] == 1
    for (std::size_t i = 0; i < den.size(); ++i) rem[j + i] -= q[j] * den[i];
  }
  for (auto r : rem) REQUIRE(r == 0);
  while (q.size() > 1 && q.back() == 0) q.pop_back();
  return q;
}

IntPoly P(std::vector<std::int64_t> c) { return IntPoly(std::move(c)); }

}  // namespace

TEST_CASE("ring operations") {
  const IntPoly one_plus_t({1, 1});
  CHECK(one_plus_t * one_plus_t == P({1, 2, 1}));
  CHECK(P({1, 1}).scale_exponent(4) == P({1, 0, 0, 0, 1}));
  CHECK(IntPoly() + P({3, 0, 2}) == P({3, 0, 2}));
  CHECK(P({1, 2}) - P({1, 2}) == IntPoly());
  CHECK(P({0, 0, 0}) == IntPoly());
  CHECK(IntPoly().degree() == -1);
  CHECK(P({5}).degree() == 0);
  CHECK(IntPoly::monomial(1, 3).shift(2) == IntPoly::monomial(1, 5));
  CHECK(P({4, 8, 4}).eval(1) == 16);
  CHECK(P({1, -1}).dominates(IntPoly()) == false);
  CHECK(P({2, 1}).dominates(P({1, 1})));
}

TEST_CASE("string rendering") {
  CHECK(IntPoly().str() == "0");
  CHECK(P({1}).str() == "1");
  CHECK(P({0, 1}).str() == "t");
  CHECK(P({4, 8, 4}).str() == "4+8t+4t^2");
  CHECK(IntPoly::monomial(1, 5).str() == "t^5");
  CHECK((IntPoly::monomial(1, 5) + IntPoly::monomial(1, 9)).str() == "t^5+t^9");
  CHECK(P({1, -2}).str() == "1-2t");
}

TEST_CASE("checked arithmetic fails loudly") {
  const IntPoly big = IntPoly::constant((std::int64_t{1} << 62));
  CHECK_THROWS_AS(big * IntPoly::constant(4), std::overflow_error);
  CHECK_THROWS_AS(P({1, 1, 1}).eval(std::int64_t{1} << 40), std::overflow_error);
}

TEST_CASE("divide_exact") {
  CHECK(divide_exact(P({1, 2, 1}), P({1, 1})) == P({1, 1}));
  CHECK_THROWS_AS(divide_exact(P({1, 1, 1}), P({1, 1})), std::domain_error);
  CHECK_THROWS_AS(divide_exact(P({1}), IntPoly()), std::domain_error);
}

TEST_CASE("qbinom against product-formula oracle") {
  for (int n = 0; n <= 12; ++n)
    for (int k = 0; k <= n; ++k) {
      auto expect = oracle_qbinom(n, k);
      CHECK(qbinom(n, k) == IntPoly(expect));
    }
  // Frozen named values.
  CHECK(qbinom(5, 0) == IntPoly::one());
  CHECK(qbinom(2, 1) == P({1, 1}));
  CHECK(qbinom(4, 2) == P({1, 1, 2, 1, 1}));
  CHECK(qbinom(3, 5) == IntPoly());  // k > n
}

TEST_CASE("qbinom symmetry and counting identities") {
  for (int n = 0; n <= 12; ++n) {
    std::int64_t binom = 1;
    for (int k = 0; k <= n; ++k) {
      CHECK(qbinom(n, k) == qbinom(n, n - k));
      CHECK(qbinom(n, k).eval(1) == binom);
      CHECK(qbinom(n, k).nonneg());
      binom = binom * (n - k) / (k + 1);
    }
  }
  // substitution consistency
  CHECK(qbinom(4, 2, 4) == qbinom(4, 2).scale_exponent(4));
}

TEST_CASE("s_codim") {
  CHECK(s_codim(1, Field::Real) == 0);
  CHECK(s_codim(2, Field::Real) == 2);
  CHECK(s_codim(2, Field::Complex) == 3);
  CHECK(s_codim(3, Field::Real) == 5);
  const int real_s[] = {0, 2, 5, 9, 14, 20, 27, 35};
  for (int nu = 1; nu <= 8; ++nu) {
    CHECK(s_codim(nu, Field::Real) == real_s[nu - 1]);
    CHECK(s_codim(nu, Field::Complex) == nu * nu - 1);
  }
  CHECK_THROWS_AS(s_codim(0, Field::Real), std::invalid_argument);
}

TEST_CASE("Grassmannian Poincare polynomials") {
  // CP^1 is the 2-sphere.
  CHECK(poincare_grassmannian(1, 2, Field::Complex) == P({1, 0, 1}));
  // Real Gr(2,4), first case of the real formula.
  CHECK(poincare_grassmannian(2, 4, Field::Real) == P({1, 0, 0, 0, 1}));
  // Oriented Gr(1,3) = S^2.
  CHECK(poincare_grassmannian(1, 3, Field::Real, true) == P({1, 0, 1}));
  // Gr(1,2) = RP^1 = S^1 and its orientation double cover S^1.
  CHECK(poincare_grassmannian(1, 2, Field::Real) == P({1, 1}));
  CHECK(poincare_grassmannian(1, 2, Field::Real, true) == P({1, 1}));
  // Oriented Gr(2,4) = S^2 x S^2 (even/even case with exact division).
  CHECK(poincare_grassmannian(2, 4, Field::Real, true) == P({1, 0, 2, 0, 1}));
  // Points.
  for (int n = 0; n <= 9; ++n) {
    CHECK(poincare_grassmannian(0, n, Field::Real) == IntPoly::one());
    CHECK(poincare_grassmannian(n, n, Field::Real) == IntPoly::one());
    if (n > 0) CHECK(poincare_grassmannian(0, n, Field::Real, true) == IntPoly::one());
  }
  CHECK_THROWS_AS(poincare_grassmannian(1, 2, Field::Complex, true), std::invalid_argument);
  CHECK_THROWS_AS(poincare_grassmannian(3, 2, Field::Real), std::invalid_argument);

  // Complex Grassmannians restate the q-binomial in t^2.
  for (int n = 0; n <= 9; ++n)
    for (int k = 0; k <= n; ++k)
      CHECK(poincare_grassmannian(k, n, Field::Complex) == qbinom(n, k, 2));

  // Euler characteristic of the oriented real Grassmannian vanishes in
  // odd dimension k(n-k).
  for (int n = 1; n <= 9; ++n)
    for (int k = 1; k < n; ++k)
      if ((k * (n - k)) % 2 == 1)
        CHECK(poincare_grassmannian(k, n, Field::Real, true).eval(-1) == 0);
}

TEST_CASE("twisted Poincare polynomials") {
  for (int m = 0; m <= 9; ++m) CHECK(twisted_poincare(0, m) == IntPoly());
  CHECK(twisted_poincare(1, 2) == IntPoly());
  CHECK(twisted_poincare(1, 3) == IntPoly::monomial(1, 2));  // S^2 minus RP^2
  for (int n = 0; n <= 9; ++n)
    for (int k = 0; k <= n; ++k) CHECK(twisted_poincare(k, n).nonneg());
}

TEST_CASE("nonsmooth contributions") {
  CHECK(nonsmooth_contribution(2, 2, Field::Real) == IntPoly::monomial(1, 2));
  CHECK(nonsmooth_contribution(5, 3, Field::Real) ==
        IntPoly::monomial(1, 5) + IntPoly::monomial(1, 9));
  CHECK(nonsmooth_contribution(3, 2, Field::Real) == IntPoly());
  CHECK(nonsmooth_contribution(2, 2, Field::Complex) == IntPoly::monomial(1, 3));
  CHECK_THROWS_AS(nonsmooth_contribution(2, 3, Field::Real), std::invalid_argument);
  CHECK_THROWS_AS(nonsmooth_contribution(0, 0, Field::Real), std::invalid_argument);

  for (Field f : {Field::Real, Field::Complex})
    for (int nu = 1; nu <= 8; ++nu) {
      CHECK(nonsmooth_contribution(nu, 1, f) == IntPoly::one());
      CHECK(nonsmooth_contribution(nu, nu, f) == IntPoly::monomial(1, s_codim(nu, f)));
      for (int i = 1; i <= nu; ++i) CHECK(nonsmooth_contribution(nu, i, f).nonneg());
    }
}

TEST_CASE("z2 contributions") {
  CHECK(z2_contribution(3, 2, 0) == P({0, 0, 1, 1}));
  CHECK(z2_contribution(2, 1, 0) == IntPoly::one());
  CHECK(z2_contribution(2, 2, 1) == IntPoly::monomial(1, 3));
  for (int nu = 1; nu <= 8; ++nu)
    for (int i = 1; i <= nu; ++i)
      for (int mu = 0; mu <= 3; ++mu) {
        CHECK(!z2_contribution(nu, i, mu).is_zero());
        CHECK(z2_contribution(nu, i, mu).nonneg());
      }
}

TEST_CASE("morse_division") {
  auto r1 = morse_division(P({1, 2, 1}), P({1, 2, 1}));
  CHECK(r1.satisfied);
  CHECK(r1.remainder == IntPoly());

  auto r2 = morse_division(P({4, 8, 4}), P({1, 2, 1}));
  CHECK(r2.satisfied);
  CHECK(r2.remainder == P({3, 3}));

  auto r3 = morse_division(P({1}), P({1, 2, 1}));
  CHECK(!r3.satisfied);
  CHECK(r3.violation_degree == 1);

  // Non-divisible difference with nonnegative partial quotient: the
  // final carry of t^2 / (1+t) does not close.
  auto r4 = morse_division(P({0, 0, 1}), IntPoly());
  CHECK(!r4.satisfied);
  CHECK(r4.violation_degree == 2);

  // Randomized consistency: p = p_M + (1+t) R reproduces R.
  std::mt19937_64 rng(20260819);
  for (int trial = 0; trial < 200; ++trial) {
    auto rand_poly = [&](int maxdeg, int maxc) {
      std::vector<std::int64_t> c(static_cast<std::size_t>(rng() % (maxdeg + 1)) + 1);
      for (auto& x : c) x = static_cast<std::int64_t>(rng() % (maxc + 1));
      return IntPoly(std::move(c));
    };
    IntPoly pm = rand_poly(5, 4), r = rand_poly(5, 4);
    IntPoly p = pm + P({1, 1}) * r;
    auto res = morse_division(p, pm);
    CHECK(res.satisfied);
    CHECK(res.remainder == r);
    CHECK(morse_division(p, p).satisfied);
    // Dropping one unit below p_M at degree 0 must violate at 0 or 1.
    if (p.coeff(0) > pm.coeff(0)) continue;
    auto bad = morse_division(p - IntPoly::one(), pm);
    if (!bad.satisfied) CHECK(bad.violation_degree <= 1);
  }
}

TEST_CASE("torus Poincare polynomials") {
  CHECK(torus_poincare(1) == P({1, 1}));
  CHECK(torus_poincare(2) == P({1, 2, 1}));
  CHECK(torus_poincare(3) == P({1, 3, 3, 1}));
}

TEST_CASE("contribution table") {
  auto t2 = emit_table(2, Field::Real);
  REQUIRE(t2.rows.size() == 2);
  CHECK(t2.cell(1, 1).str() == "1");
  CHECK(t2.cell(2, 1).str() == "1");
  CHECK(t2.cell(2, 2).str() == "t^2");

  auto t4 = emit_table(4, Field::Real);
  CHECK(t4.cell(4, 1).str() == "1");
  CHECK(t4.cell(4, 2).str() == "t^4");
  CHECK(t4.cell(4, 3).str() == "t^5");
  CHECK(t4.cell(4, 4).str() == "t^9");

  auto t8 = emit_table(8, Field::Real);
  const char* row7[] = {"1", "0", "t^5+t^9+t^13", "0", "t^14+t^18+t^22", "0", "t^27"};
  for (int i = 1; i <= 7; ++i) CHECK(t8.cell(7, i).str() == row7[i - 1]);

  // Rendering sanity.
  CHECK(t8.markdown().find("t^5+t^9+t^13") != std::string::npos);
  CHECK(t8.csv().find("t^22+t^26+t^30") != std::string::npos);
}
