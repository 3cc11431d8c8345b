#pragma once

#include <stdexcept>
#include <string>

namespace morseig {

// Scalar field of the self-adjoint matrices: real symmetric or complex
// Hermitian.  Everything downstream (stratum codimensions, Grassmannian
// polynomials, complement dimensions) branches on this tag.
enum class Field { Real, Complex };

inline const char* to_string(Field f) {
  return f == Field::Real ? "real" : "complex";
}

inline Field field_from_string(const std::string& s) {
  if (s == "real") return Field::Real;
  if (s == "complex") return Field::Complex;
  throw std::invalid_argument("unknown field: " + s);
}

}  // namespace morseig
