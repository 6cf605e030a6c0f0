#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace birkhoff {

// Base of all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input: bad spec fields, basis/dimension mismatches, bad files.
struct ValidationError : Error {
  using Error::Error;
};

// A mathematical precondition failed on well-formed input
// (labeling collisions, single-h structure estimation, unscaled input
// where scaled is required, ...).
struct MathError : Error {
  using Error::Error;
};

// Non-resonance violated: carries the offending integer vector.
// For check_nonresonance the witness is m with sum m_j omega_j = 0;
// for solve_homological it is b - a of the small-divisor monomial.
struct ResonanceError : MathError {
  explicit ResonanceError(const std::string& msg) : MathError(msg) {}
  ResonanceError(const std::string& msg, std::vector<long long> m)
      : MathError(msg), witness(std::move(m)) {}
  std::vector<long long> witness;
};

// Numerical failure: eigensolver breakdown, rank-deficient fit,
// realness check violated beyond tolerance.
struct NumericalError : Error {
  using Error::Error;
};

// Resource guard tripped (BNF_MAX_TERMS).
struct LimitError : Error {
  using Error::Error;
};

}  // namespace birkhoff
