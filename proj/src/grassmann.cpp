#include "morseig/grassmann.hpp"

#include <sstream>
#include <stdexcept>

namespace morseig {

int sym_dim(int nu, Field f) {
  if (nu < 0) throw std::invalid_argument("sym_dim: negative dimension");
  return f == Field::Real ? nu * (nu + 1) / 2 : nu * nu;
}

int s_codim(int nu, Field f) {
  if (nu < 1) throw std::invalid_argument("s_codim: nu must be >= 1");
  return sym_dim(nu, f) - 1;
}

IntPoly qbinom(int n, int k, int t_power) {
  if (t_power < 1) throw std::invalid_argument("qbinom: t_power must be >= 1");
  if (k < 0 || n < 0 || k > n) return IntPoly();
  // row[j] = [m j]_q built row by row; q = t^t_power.
  std::vector<IntPoly> row(static_cast<std::size_t>(k) + 1);
  row[0] = IntPoly::one();
  for (int m = 1; m <= n; ++m) {
    for (int j = std::min(m, k); j >= 1; --j) {
      IntPoly upper = (j <= m - 1) ? row[static_cast<std::size_t>(j)] : IntPoly();
      row[static_cast<std::size_t>(j)] =
          row[static_cast<std::size_t>(j - 1)] + upper.shift(j * t_power);
    }
  }
  return row[static_cast<std::size_t>(k)];
}

IntPoly poincare_grassmannian(int k, int n, Field f, bool oriented) {
  if (k < 0 || n < 0 || k > n)
    throw std::invalid_argument("poincare_grassmannian: need 0 <= k <= n");
  if (oriented && f == Field::Complex)
    throw std::invalid_argument("poincare_grassmannian: oriented flag is real-only");
  if (k == 0 || k == n) return IntPoly::one();  // a point, oriented or not

  if (f == Field::Complex) return qbinom(n, k, 2);

  if (!oriented) {
    if ((k * (n - k)) % 2 == 0) return qbinom(n / 2, k / 2, 4);
    // k odd, n even
    return (IntPoly::one() + IntPoly::monomial(1, n - 1)) * qbinom(n / 2 - 1, (k - 1) / 2, 4);
  }

  // Oriented real cases; (k even, n odd) is routed through the
  // complementary dimension where it becomes (k odd, n odd).
  if (k % 2 == 0 && n % 2 == 1) return poincare_grassmannian(n - k, n, f, true);
  if (k % 2 == 1 && n % 2 == 1)
    return (IntPoly::one() + IntPoly::monomial(1, n - k)) * qbinom((n - 1) / 2, (k - 1) / 2, 4);
  if (k % 2 == 1 && n % 2 == 0)
    return (IntPoly::one() + IntPoly::monomial(1, n - 1)) * qbinom(n / 2 - 1, (k - 1) / 2, 4);
  // k even, n even: (1+t^k)(1+t^{n-k})/(1+t^n) [n/2 k/2]_{t^4};
  // the division is exact because the q-binomial supplies the factor.
  IntPoly num = (IntPoly::one() + IntPoly::monomial(1, k)) *
                (IntPoly::one() + IntPoly::monomial(1, n - k)) * qbinom(n / 2, k / 2, 4);
  return divide_exact(num, IntPoly::one() + IntPoly::monomial(1, n));
}

IntPoly twisted_poincare(int k, int n) {
  IntPoly d = poincare_grassmannian(k, n, Field::Real, true) -
              poincare_grassmannian(k, n, Field::Real, false);
  if (!d.nonneg())
    throw std::logic_error("twisted_poincare: negative coefficient at k=" +
                           std::to_string(k) + ", n=" + std::to_string(n));
  return d;
}

IntPoly nonsmooth_contribution(int nu, int i, Field f) {
  if (nu < 1 || i < 1 || i > nu)
    throw std::invalid_argument("nonsmooth_contribution: need 1 <= i <= nu");
  const int s_i = s_codim(i, f);
  if (f == Field::Complex) return qbinom(nu - 1, i - 1, 2).shift(s_i);
  if (i % 2 == 1) return qbinom((nu - 1) / 2, (i - 1) / 2, 4).shift(s_i);
  if (nu % 2 == 1) return IntPoly();  // i even, nu odd: rational contribution vanishes
  return qbinom(nu / 2 - 1, i / 2 - 1, 4).shift(s_i + nu - i);
}

IntPoly z2_contribution(int nu, int i, int mu) {
  if (nu < 1 || i < 1 || i > nu)
    throw std::invalid_argument("z2_contribution: need 1 <= i <= nu");
  if (mu < 0) throw std::invalid_argument("z2_contribution: negative mu");
  return qbinom(nu - 1, i - 1, 1).shift(mu + s_codim(i, Field::Real));
}

IntPoly torus_poincare(int d) {
  if (d < 1) throw std::invalid_argument("torus_poincare: d must be >= 1");
  IntPoly p = IntPoly::one();
  const IntPoly onet({1, 1});
  for (int j = 0; j < d; ++j) p = p * onet;
  return p;
}

MorseDivision morse_division(const IntPoly& p_morse, const IntPoly& p_manifold) {
  MorseDivision out;
  const IntPoly d = p_morse - p_manifold;
  if (d.is_zero()) {
    out.satisfied = true;
    return out;
  }
  // Synthetic division by (1+t) from the bottom: r_j = d_j - r_{j-1}.
  // The r_j are the candidate coefficients of R; the final carry must
  // close to zero for the division to be exact.
  std::vector<std::int64_t> r(static_cast<std::size_t>(d.degree()) + 1, 0);
  std::int64_t carry = 0;
  for (int j = 0; j <= d.degree(); ++j) {
    std::int64_t rj = d.coeff(j) - carry;
    if (j < d.degree()) {
      if (rj < 0) {
        out.satisfied = false;
        out.violation_degree = j;
        return out;
      }
      r[static_cast<std::size_t>(j)] = rj;
      carry = rj;
    } else if (rj != 0) {
      out.satisfied = false;
      out.violation_degree = d.degree();
      return out;
    }
  }
  r.pop_back();
  out.satisfied = true;
  out.remainder = IntPoly(std::move(r));
  return out;
}

const IntPoly& ContributionTable::cell(int nu, int i) const {
  return rows.at(static_cast<std::size_t>(nu - 1)).at(static_cast<std::size_t>(i - 1));
}

std::string ContributionTable::markdown() const {
  std::ostringstream os;
  os << "| nu \\ i |";
  for (int i = 1; i <= max_nu; ++i) os << " " << i << " |";
  os << "\n|---|";
  for (int i = 1; i <= max_nu; ++i) os << "---|";
  os << "\n";
  for (int nu = 1; nu <= max_nu; ++nu) {
    os << "| " << nu << " |";
    for (int i = 1; i <= max_nu; ++i) {
      if (i <= nu) os << " " << cell(nu, i).str() << " |";
      else os << "  |";
    }
    os << "\n";
  }
  return os.str();
}

std::string ContributionTable::csv() const {
  std::ostringstream os;
  os << "nu";
  for (int i = 1; i <= max_nu; ++i) os << ",i=" << i;
  os << "\n";
  for (int nu = 1; nu <= max_nu; ++nu) {
    os << nu;
    for (int i = 1; i <= max_nu; ++i) os << "," << (i <= nu ? cell(nu, i).str() : "");
    os << "\n";
  }
  return os.str();
}

ContributionTable emit_table(int max_nu, Field f) {
  if (max_nu < 1) throw std::invalid_argument("emit_table: max_nu must be >= 1");
  ContributionTable t;
  t.max_nu = max_nu;
  t.field = f;
  t.rows.resize(static_cast<std::size_t>(max_nu));
  for (int nu = 1; nu <= max_nu; ++nu)
    for (int i = 1; i <= nu; ++i)
      t.rows[static_cast<std::size_t>(nu - 1)].push_back(nonsmooth_contribution(nu, i, f));
  return t;
}

}  // namespace morseig
