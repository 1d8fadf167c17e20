#pragma once

#include <stdexcept>
#include <string>

namespace spdgyro {

// Error taxonomy. The CLI maps these onto exit codes: usage/IO/parse/shape
// problems exit 2, math domain and numerical failures exit 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-conformable shapes, non-triangular vector lengths, vocab mismatches.
struct DimensionError : Error {
  using Error::Error;
};

// Input outside the mathematical domain of an operation (e.g. log of a
// non-positive eigenvalue).
struct DomainError : Error {
  using Error::Error;
};

// An algorithm broke down numerically (singular pivot, eigensolver did not
// converge). Carries a residual where one is meaningful.
struct NumericalError : Error {
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : Error(what), residual(residual) {}
  double residual;
};

// Malformed text input (triple files, config files, checkpoint headers).
struct ParseError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// API misuse (backward before forward, reading adjoints of an empty tape).
struct UsageError : Error {
  using Error::Error;
};

}  // namespace spdgyro
