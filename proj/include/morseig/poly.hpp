#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace morseig {

// Polynomial in one variable t with exact 64-bit integer coefficients.
// All arithmetic is overflow-checked and throws std::overflow_error
// instead of wrapping; degrees stay below ~100 in this code base, so
// 64 bits are ample once wrapping is ruled out.
//
// The zero polynomial is stored as an empty coefficient vector and has
// degree() == -1.
class IntPoly {
 public:
  IntPoly() = default;
  explicit IntPoly(std::vector<std::int64_t> coeffs);

  static IntPoly constant(std::int64_t c);
  // c * t^degree
  static IntPoly monomial(std::int64_t c, int degree);
  static IntPoly one() { return constant(1); }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  // Coefficient of t^deg; zero outside the stored range.
  std::int64_t coeff(int deg) const;
  const std::vector<std::int64_t>& coeffs() const { return coeffs_; }

  IntPoly& operator+=(const IntPoly& rhs);
  IntPoly& operator-=(const IntPoly& rhs);
  friend IntPoly operator+(IntPoly lhs, const IntPoly& rhs);
  friend IntPoly operator-(IntPoly lhs, const IntPoly& rhs);
  friend IntPoly operator*(const IntPoly& lhs, const IntPoly& rhs);
  bool operator==(const IntPoly& rhs) const { return coeffs_ == rhs.coeffs_; }

  // Substitution t -> t^m, m >= 1.
  IntPoly scale_exponent(int m) const;
  // Multiplication by t^k, k >= 0.
  IntPoly shift(int k) const;

  std::int64_t eval(std::int64_t t) const;
  bool nonneg() const;
  // Coefficientwise *this >= rhs.
  bool dominates(const IntPoly& rhs) const;

  // Human-readable form: "0", "1", "t", "4+8t+4t^2", "t^5+t^9".
  std::string str() const;

 private:
  void trim();
  std::vector<std::int64_t> coeffs_;  // coeffs_[j] multiplies t^j
};

// Exact polynomial division; throws std::domain_error if num is not a
// polynomial multiple of den.
IntPoly divide_exact(const IntPoly& num, const IntPoly& den);

}  // namespace morseig
