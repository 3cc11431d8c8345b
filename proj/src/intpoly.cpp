#include "morseig/poly.hpp"

#include <sstream>
#include <stdexcept>

namespace morseig {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("IntPoly: coefficient addition overflow");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("IntPoly: coefficient multiplication overflow");
  return r;
}

}  // namespace

IntPoly::IntPoly(std::vector<std::int64_t> coeffs) : coeffs_(std::move(coeffs)) {
  trim();
}

IntPoly IntPoly::constant(std::int64_t c) {
  return c == 0 ? IntPoly() : IntPoly({c});
}

IntPoly IntPoly::monomial(std::int64_t c, int degree) {
  if (degree < 0) throw std::invalid_argument("IntPoly::monomial: negative degree");
  if (c == 0) return IntPoly();
  std::vector<std::int64_t> v(static_cast<std::size_t>(degree) + 1, 0);
  v.back() = c;
  return IntPoly(std::move(v));
}

std::int64_t IntPoly::coeff(int deg) const {
  if (deg < 0 || deg > degree()) return 0;
  return coeffs_[static_cast<std::size_t>(deg)];
}

void IntPoly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

IntPoly& IntPoly::operator+=(const IntPoly& rhs) {
  if (coeffs_.size() < rhs.coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0);
  for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j)
    coeffs_[j] = checked_add(coeffs_[j], rhs.coeffs_[j]);
  trim();
  return *this;
}

IntPoly& IntPoly::operator-=(const IntPoly& rhs) {
  if (coeffs_.size() < rhs.coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0);
  for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j)
    coeffs_[j] = checked_add(coeffs_[j], checked_mul(-1, rhs.coeffs_[j]));
  trim();
  return *this;
}

IntPoly operator+(IntPoly lhs, const IntPoly& rhs) { return lhs += rhs; }
IntPoly operator-(IntPoly lhs, const IntPoly& rhs) { return lhs -= rhs; }

IntPoly operator*(const IntPoly& lhs, const IntPoly& rhs) {
  if (lhs.is_zero() || rhs.is_zero()) return IntPoly();
  std::vector<std::int64_t> out(lhs.coeffs_.size() + rhs.coeffs_.size() - 1, 0);
  for (std::size_t a = 0; a < lhs.coeffs_.size(); ++a) {
    if (lhs.coeffs_[a] == 0) continue;
    for (std::size_t b = 0; b < rhs.coeffs_.size(); ++b)
      out[a + b] = checked_add(out[a + b], checked_mul(lhs.coeffs_[a], rhs.coeffs_[b]));
  }
  return IntPoly(std::move(out));
}

IntPoly IntPoly::scale_exponent(int m) const {
  if (m < 1) throw std::invalid_argument("IntPoly::scale_exponent: m must be >= 1");
  if (is_zero()) return IntPoly();
  std::vector<std::int64_t> out(coeffs_.size() * static_cast<std::size_t>(m), 0);
  out.resize((coeffs_.size() - 1) * static_cast<std::size_t>(m) + 1, 0);
  for (std::size_t j = 0; j < coeffs_.size(); ++j)
    out[j * static_cast<std::size_t>(m)] = coeffs_[j];
  return IntPoly(std::move(out));
}

IntPoly IntPoly::shift(int k) const {
  if (k < 0) throw std::invalid_argument("IntPoly::shift: negative exponent");
  if (is_zero() || k == 0) return *this;
  std::vector<std::int64_t> out(coeffs_.size() + static_cast<std::size_t>(k), 0);
  for (std::size_t j = 0; j < coeffs_.size(); ++j) out[j + static_cast<std::size_t>(k)] = coeffs_[j];
  return IntPoly(std::move(out));
}

std::int64_t IntPoly::eval(std::int64_t t) const {
  std::int64_t acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = checked_add(checked_mul(acc, t), *it);
  return acc;
}

bool IntPoly::nonneg() const {
  for (auto c : coeffs_)
    if (c < 0) return false;
  return true;
}

bool IntPoly::dominates(const IntPoly& rhs) const {
  int top = std::max(degree(), rhs.degree());
  for (int j = 0; j <= top; ++j)
    if (coeff(j) < rhs.coeff(j)) return false;
  return true;
}

std::string IntPoly::str() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int j = 0; j <= degree(); ++j) {
    std::int64_t c = coeff(j);
    if (c == 0) continue;
    if (!first) os << (c > 0 ? "+" : "-");
    else if (c < 0) os << "-";
    std::int64_t a = c > 0 ? c : -c;
    if (j == 0) {
      os << a;
    } else {
      if (a != 1) os << a;
      os << "t";
      if (j > 1) os << "^" << j;
    }
    first = false;
  }
  return os.str();
}

IntPoly divide_exact(const IntPoly& num, const IntPoly& den) {
  if (den.is_zero()) throw std::domain_error("divide_exact: division by zero polynomial");
  if (num.is_zero()) return IntPoly();
  if (num.degree() < den.degree())
    throw std::domain_error("divide_exact: not divisible (degree)");

  // Long division from the top; every step must divide exactly.
  std::vector<std::int64_t> rem(num.coeffs());
  const std::int64_t lead = den.coeff(den.degree());
  std::vector<std::int64_t> quot(static_cast<std::size_t>(num.degree() - den.degree()) + 1, 0);
  for (int j = num.degree() - den.degree(); j >= 0; --j) {
    std::int64_t top = rem[static_cast<std::size_t>(j + den.degree())];
    if (top % lead != 0) throw std::domain_error("divide_exact: not divisible (leading coefficient)");
    std::int64_t q = top / lead;
    quot[static_cast<std::size_t>(j)] = q;
    for (int i = 0; i <= den.degree(); ++i) {
      auto& r = rem[static_cast<std::size_t>(j + i)];
      std::int64_t prod;
      if (__builtin_mul_overflow(q, den.coeff(i), &prod) ||
          __builtin_sub_overflow(r, prod, &r))
        throw std::overflow_error("divide_exact: coefficient overflow");
    }
  }
  for (auto r : rem)
    if (r != 0) throw std::domain_error("divide_exact: nonzero remainder");
  return IntPoly(std::move(quot));
}

}  // namespace morseig
