#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace birkhoff {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Rational scalar helpers
// ---------------------------------------------------------------------------

inline Rational rational_pow(const Rational& base, long exp) {
  if (exp == 0) return Rational(1);
  if (base == 0) {
    if (exp < 0) throw ValidationError("rational_pow: zero base, negative exponent");
    return Rational(0);
  }
  const unsigned long k = static_cast<unsigned long>(exp < 0 ? -exp : exp);
  Integer num = boost::multiprecision::pow(boost::multiprecision::numerator(base), k);
  Integer den = boost::multiprecision::pow(boost::multiprecision::denominator(base), k);
  Rational r(num, den);
  if (exp < 0) r = Rational(1) / r;
  return r;
}

// Accepts "p/q", integers, plain decimals and exponent notation ("0.1",
// "-3", "5/8", "2.5e-3"); all are parsed exactly.
inline Rational rational_from_string(std::string_view s) {
  auto fail = [&] { throw ValidationError("cannot parse rational: '" + std::string(s) + "'"); };
  std::size_t i = 0, len = s.size();
  while (i < len && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  while (len > i && std::isspace(static_cast<unsigned char>(s[len - 1]))) --len;
  if (i >= len) fail();

  bool neg = false;
  if (s[i] == '+' || s[i] == '-') neg = (s[i++] == '-');

  Integer num = 0;
  bool any_digit = false;
  while (i < len && std::isdigit(static_cast<unsigned char>(s[i]))) {
    num = num * 10 + (s[i++] - '0');
    any_digit = true;
  }

  if (i < len && s[i] == '/') {
    ++i;
    bool dneg = false;
    if (i < len && (s[i] == '+' || s[i] == '-')) dneg = (s[i++] == '-');
    Integer den = 0;
    bool dd = false;
    while (i < len && std::isdigit(static_cast<unsigned char>(s[i]))) {
      den = den * 10 + (s[i++] - '0');
      dd = true;
    }
    if (!any_digit || !dd || i != len || den == 0) fail();
    Rational r(num, den);
    if (neg != dneg) r = -r;
    return r;
  }

  long frac_digits = 0;
  if (i < len && s[i] == '.') {
    ++i;
    while (i < len && std::isdigit(static_cast<unsigned char>(s[i]))) {
      num = num * 10 + (s[i++] - '0');
      ++frac_digits;
      any_digit = true;
    }
  }
  long exp10 = 0;
  if (i < len && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < len && (s[i] == '+' || s[i] == '-')) eneg = (s[i++] == '-');
    bool ed = false;
    long e = 0;
    while (i < len && std::isdigit(static_cast<unsigned char>(s[i]))) {
      e = e * 10 + (s[i++] - '0');
      ed = true;
      if (e > 100000) fail();
    }
    if (!ed) fail();
    exp10 = eneg ? -e : e;
  }
  if (!any_digit || i != len) fail();

  Rational r(num);
  const long shift = exp10 - frac_digits;
  if (shift > 0)
    r *= Rational(boost::multiprecision::pow(Integer(10), static_cast<unsigned long>(shift)));
  else if (shift < 0)
    r /= Rational(boost::multiprecision::pow(Integer(10), static_cast<unsigned long>(-shift)));
  return neg ? -r : r;
}

// Canonical "p" / "p/q" form (denominator positive, gcd 1 — cpp_rational
// keeps that invariant), so equal values serialize to identical bytes.
inline std::string rational_to_string(const Rational& r) {
  const Integer num = boost::multiprecision::numerator(r);
  const Integer den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double rational_to_double(const Rational& r) { return r.convert_to<double>(); }

// Exact binary expansion of the double; NOT a decimal re-interpretation.
inline Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw ValidationError("non-finite value where rational expected");
  return Rational(v);
}

inline Integer binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  Integer r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= (n - k + i);
    r /= i;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Exact complex coefficient: Gaussian rational re + i*im
// ---------------------------------------------------------------------------

struct RationalComplex {
  Rational re, im;

  RationalComplex() = default;
  RationalComplex(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  explicit RationalComplex(Rational r) : re(std::move(r)) {}
  explicit RationalComplex(long v) : re(v) {}

  static RationalComplex i() { return {Rational(0), Rational(1)}; }

  bool is_zero() const { return re == 0 && im == 0; }

  RationalComplex operator-() const { return {-re, -im}; }
  RationalComplex& operator+=(const RationalComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  RationalComplex& operator-=(const RationalComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend RationalComplex operator+(RationalComplex a, const RationalComplex& b) { return a += b; }
  friend RationalComplex operator-(RationalComplex a, const RationalComplex& b) { return a -= b; }
  friend RationalComplex operator*(const RationalComplex& a, const RationalComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  RationalComplex& operator*=(const RationalComplex& o) { return *this = *this * o; }
  friend RationalComplex operator/(const RationalComplex& a, const RationalComplex& b) {
    Rational n2 = b.re * b.re + b.im * b.im;
    if (n2 == 0) throw MathError("division by zero coefficient");
    return {(a.re * b.re + a.im * b.im) / n2, (a.im * b.re - a.re * b.im) / n2};
  }
  RationalComplex& operator/=(const RationalComplex& o) { return *this = *this / o; }
  friend bool operator==(const RationalComplex& a, const RationalComplex& b) = default;

  std::string str() const { return rational_to_string(re) + (im == 0 ? "" : " + i*" + rational_to_string(im)); }
};

// ---------------------------------------------------------------------------
// Coefficient traits: the one place that knows the two coefficient modes
// (exact Gaussian-rational vs float complex) apart.
// ---------------------------------------------------------------------------

template <class C>
struct CoeffOps;

template <>
struct CoeffOps<RationalComplex> {
  using Coeff = RationalComplex;
  using Scalar = Rational;
  static constexpr bool exact = true;

  static Coeff zero() { return {}; }
  static Coeff one() { return Coeff(Rational(1)); }
  static Coeff imag_unit() { return Coeff::i(); }
  static Coeff from_int(long v) { return Coeff(Rational(v)); }
  static Coeff from_scalar(const Scalar& s) { return Coeff(s); }
  static Coeff from_parts(const Scalar& r, const Scalar& i) { return {r, i}; }
  static bool is_zero(const Coeff& c) { return c.is_zero(); }
  static Scalar real(const Coeff& c) { return c.re; }
  static Scalar imag(const Coeff& c) { return c.im; }
  static double abs_approx(const Coeff& c) {
    return std::hypot(rational_to_double(c.re), rational_to_double(c.im));
  }
  static std::complex<double> to_cd(const Coeff& c) {
    return {rational_to_double(c.re), rational_to_double(c.im)};
  }
  static Scalar scalar_pow(const Scalar& s, long e) { return rational_pow(s, e); }
  static double scalar_to_double(const Scalar& s) { return rational_to_double(s); }
  static Scalar scalar_from_string(std::string_view s) { return rational_from_string(s); }
  static Scalar scalar_from_double(double v) { return rational_from_double(v); }
  static bool scalar_is_zero(const Scalar& s) { return s == 0; }
};

template <>
struct CoeffOps<std::complex<double>> {
  using Coeff = std::complex<double>;
  using Scalar = double;
  static constexpr bool exact = false;

  static Coeff zero() { return {0.0, 0.0}; }
  static Coeff one() { return {1.0, 0.0}; }
  static Coeff imag_unit() { return {0.0, 1.0}; }
  static Coeff from_int(long v) { return {static_cast<double>(v), 0.0}; }
  static Coeff from_scalar(double s) { return {s, 0.0}; }
  static Coeff from_parts(double r, double i) { return {r, i}; }
  static bool is_zero(const Coeff& c) { return c.real() == 0.0 && c.imag() == 0.0; }
  static Scalar real(const Coeff& c) { return c.real(); }
  static Scalar imag(const Coeff& c) { return c.imag(); }
  static double abs_approx(const Coeff& c) { return std::abs(c); }
  static std::complex<double> to_cd(const Coeff& c) { return c; }
  static Scalar scalar_pow(double s, long e) { return std::pow(s, static_cast<double>(e)); }
  static double scalar_to_double(double s) { return s; }
  static Scalar scalar_from_string(std::string_view s) {
    return rational_to_double(rational_from_string(s));
  }
  static Scalar scalar_from_double(double v) { return v; }
  static bool scalar_is_zero(double s) { return s == 0.0; }
};

// i^k (k may be negative).
// Scalar type -> matching complex coefficient type.
template <class S>
struct ComplexFor;
template <>
struct ComplexFor<Rational> {
  using type = RationalComplex;
};
template <>
struct ComplexFor<double> {
  using type = std::complex<double>;
};
template <class S>
using ComplexForT = typename ComplexFor<S>::type;

template <class C>
C coeff_i_pow(long k) {
  const long m = ((k % 4) + 4) % 4;
  const C i = CoeffOps<C>::imag_unit();
  C r = CoeffOps<C>::one();
  for (long j = 0; j < m; ++j) r = r * i;
  return r;
}

template <class To, class From>
To coeff_convert(const From& c) {
  if constexpr (std::is_same_v<To, From>) {
    return c;
  } else if constexpr (std::is_same_v<To, std::complex<double>>) {
    return CoeffOps<From>::to_cd(c);
  } else {
    // float -> exact: exact binary expansion of both parts
    return RationalComplex(rational_from_double(c.real()), rational_from_double(c.imag()));
  }
}

}  // namespace birkhoff
