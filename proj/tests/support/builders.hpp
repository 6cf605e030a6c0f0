// Canned potential specs shared across suites.
#pragma once

#include <birkhoff/birkhoff.hpp>

namespace builders {

using birkhoff::MultiIndex;
using birkhoff::PotentialSpec;
using birkhoff::Rational;
using birkhoff::rational_from_string;

// V = x^2 + (1/10) x^4, single well.
inline PotentialSpec<Rational> quartic_1d() {
  PotentialSpec<Rational> s;
  s.n = 1;
  s.d = 0;
  s.E0 = Rational(0);
  s.u = {Rational(1)};
  s.coeffs[MultiIndex{2}] = rational_from_string("1/10");
  return s;
}

// V = 1 - x^2 + (1/5) x^4, barrier top at E0 = 1.
inline PotentialSpec<Rational> barrier_1d() {
  PotentialSpec<Rational> s;
  s.n = 1;
  s.d = 1;
  s.E0 = Rational(1);
  s.u = {Rational(1)};
  s.coeffs[MultiIndex{2}] = rational_from_string("1/5");
  return s;
}

// V = x1^2 - x2^2 + (1/10) x1^4 + (1/20) x1^2 x2^2 + (1/10) x2^4, saddle.
inline PotentialSpec<Rational> mixed_2d() {
  PotentialSpec<Rational> s;
  s.n = 2;
  s.d = 1;
  s.E0 = Rational(0);
  s.u = {Rational(1), Rational(1)};
  s.coeffs[MultiIndex{2, 0}] = rational_from_string("1/10");
  s.coeffs[MultiIndex{1, 1}] = rational_from_string("1/20");
  s.coeffs[MultiIndex{0, 2}] = rational_from_string("1/10");
  return s;
}

}  // namespace builders
