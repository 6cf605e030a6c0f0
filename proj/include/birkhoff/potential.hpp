#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "coeff.hpp"
#include "errors.hpp"
#include "multi_index.hpp"
#include "poly.hpp"

namespace birkhoff {

// Even potential near a non-degenerate critical point of signature (n-d, d):
//   V(x) = E0 + sum_{j<=n-d} u_j^2 x_j^2 - sum_{j>n-d} u_j^2 x_j^2
//        + sum_alpha c_alpha prod_j x_j^{2 alpha_j},   2 <= |alpha|.
// The hyperbolic directions are the last d coordinates.
template <class S>
struct PotentialSpec {
  using Scalar = S;

  int n = 0;
  int d = 0;
  S E0 = S(0);
  std::vector<S> u;
  std::map<MultiIndex, S, GradedLex> coeffs;

  int elliptic_count() const { return n - d; }
  bool is_hyperbolic(int j) const { return j >= n - d; }

  void validate() const {
    if (n < 1) throw ValidationError("potential: dimension n must be >= 1");
    if (d < 0 || d > n) throw ValidationError("potential: need 0 <= d <= n");
    if (static_cast<int>(u.size()) != n) throw ValidationError("potential: u must have n entries");
    for (const S& uj : u)
      if (!(uj > S(0))) throw ValidationError("potential: frequencies u_j must be positive");
    for (const auto& [alpha, c] : coeffs) {
      if (alpha.size() != static_cast<std::size_t>(n))
        throw ValidationError("potential: coefficient index must have n entries");
      if (!alpha.all_nonnegative()) throw ValidationError("potential: negative exponent");
      if (alpha.degree() < 2)
        throw ValidationError("potential: coefficients start at quartic order (|alpha| >= 2)");
    }
  }

  // Largest total degree 2|alpha| present, or 2 if no coefficients.
  int max_degree() const {
    int m = 2;
    for (const auto& [alpha, c] : coeffs) m = std::max(m, 2 * alpha.degree());
    return m;
  }
};

template <class To, class From>
PotentialSpec<To> spec_convert(const PotentialSpec<From>& s) {
  PotentialSpec<To> out;
  out.n = s.n;
  out.d = s.d;
  if constexpr (std::is_same_v<To, double>) {
    out.E0 = rational_to_double(s.E0);
    for (const auto& uj : s.u) out.u.push_back(rational_to_double(uj));
    for (const auto& [a, c] : s.coeffs) out.coeffs.emplace(a, rational_to_double(c));
  } else {
    out.E0 = rational_from_double(s.E0);
    for (const auto& uj : s.u) out.u.push_back(rational_from_double(uj));
    for (const auto& [a, c] : s.coeffs) out.coeffs.emplace(a, rational_from_double(c));
  }
  return out;
}

// omega_j = u_j on the elliptic block, u_j / i = -i u_j on the hyperbolic one.
template <class C>
struct Frequencies {
  std::vector<C> omega;
  int d = 0;

  int n() const { return static_cast<int>(omega.size()); }
};

template <class S>
Frequencies<ComplexForT<S>> frequencies(const std::vector<S>& u, int d) {
  using C = ComplexForT<S>;
  using Ops = CoeffOps<C>;
  const int n = static_cast<int>(u.size());
  if (d < 0 || d > n) throw ValidationError("frequencies: need 0 <= d <= n");
  Frequencies<C> f;
  f.d = d;
  f.omega.reserve(u.size());
  for (int j = 0; j < n; ++j) {
    if (!(u[static_cast<std::size_t>(j)] > S(0)))
      throw ValidationError("frequencies: u_j must be positive");
    C w = Ops::from_scalar(u[static_cast<std::size_t>(j)]);
    if (j >= n - d) w = w * (-Ops::imag_unit());
    f.omega.push_back(std::move(w));
  }
  return f;
}

// p - E0 = xi^2 + (V - E0), real basis, truncated at total degree maxdeg.
template <class S>
PhasePoly<ComplexForT<S>> build_symbol(const PotentialSpec<S>& spec, int maxdeg) {
  using C = ComplexForT<S>;
  using Ops = CoeffOps<C>;
  spec.validate();
  if (maxdeg < 2 || maxdeg % 2 != 0)
    throw ValidationError("build_symbol: maxdeg must be even and >= 2");
  if (maxdeg < spec.max_degree())
    throw ValidationError("build_symbol: maxdeg below the highest represented monomial");

  const int n = spec.n;
  const std::size_t nv = static_cast<std::size_t>(2 * n);
  PhasePoly<C> p(Basis::Real, n);
  for (int j = 0; j < n; ++j) {
    MultiIndex kxi(nv), kx(nv);
    kxi[static_cast<std::size_t>(j + n)] = 2;
    kx[static_cast<std::size_t>(j)] = 2;
    p.set_term(std::move(kxi), Ops::one());
    const C u2 = Ops::from_scalar(spec.u[static_cast<std::size_t>(j)] * spec.u[static_cast<std::size_t>(j)]);
    p.set_term(std::move(kx), spec.is_hyperbolic(j) ? -u2 : u2);
  }
  for (const auto& [alpha, c] : spec.coeffs) {
    std::vector<int> e(nv, 0);
    for (int j = 0; j < n; ++j) e[static_cast<std::size_t>(j)] = 2 * alpha[static_cast<std::size_t>(j)];
    p.set_term(MultiIndex(std::move(e)), Ops::from_scalar(c));
  }
  return p.truncated(maxdeg);
}

// Canonical rescale x_j -> x_j / sqrt(u_j), xi_j -> sqrt(u_j) xi_j.
// A monomial x^a xi^b picks up prod_j u_j^{(b_j - a_j)/2}; on the even
// symbols handled here every difference is even, so the factor is an exact
// rational power and no square roots appear.
template <class C>
PhasePoly<C> rescale(const PhasePoly<C>& p, const std::vector<typename CoeffOps<C>::Scalar>& u) {
  using Ops = CoeffOps<C>;
  using S = typename Ops::Scalar;
  if (p.basis() != Basis::Real) throw ValidationError("rescale: symbol must be in the real basis");
  const int n = p.n();
  if (static_cast<int>(u.size()) != n) throw ValidationError("rescale: u must have n entries");
  for (const S& uj : u)
    if (!(uj > S(0))) throw ValidationError("rescale: u_j must be positive");

  PhasePoly<C> out(Basis::Real, n);
  auto& acc = out.raw_terms();
  for (const auto& [k, c] : p.terms()) {
    C factor = Ops::one();
    for (int j = 0; j < n; ++j) {
      const int diff = k[static_cast<std::size_t>(j + n)] - k[static_cast<std::size_t>(j)];
      if (diff % 2 != 0)
        throw ValidationError("rescale: per-coordinate odd monomial (symbol must be even)");
      if (diff != 0)
        factor *= Ops::from_scalar(Ops::scalar_pow(u[static_cast<std::size_t>(j)], diff / 2));
    }
    acc.emplace(k, c * factor);
  }
  out.normalize();
  return out;
}

// Complex scaling of the last d coordinates: x_j = e^{i pi/4} X_j,
// xi_j = e^{-i pi/4} P_j.  A monomial gains i^{sum_hyp (a_j - b_j)/2};
// quadratic blocks xi_j^2 - x_j^2 become (X_j^2 + P_j^2)/i.
template <class C>
PhasePoly<C> complex_scale(const PhasePoly<C>& p, int d) {
  if (p.basis() != Basis::Real) throw ValidationError("complex_scale: symbol must be in the real basis");
  const int n = p.n();
  if (d < 0 || d > n) throw ValidationError("complex_scale: need 0 <= d <= n");
  if (d == 0) return p;

  PhasePoly<C> out(Basis::Real, n);
  auto& acc = out.raw_terms();
  for (const auto& [k, c] : p.terms()) {
    long half_sum = 0;
    for (int j = n - d; j < n; ++j) {
      const int diff = k[static_cast<std::size_t>(j)] - k[static_cast<std::size_t>(j + n)];
      if (diff % 2 != 0)
        throw ValidationError("complex_scale: per-coordinate odd monomial (symbol must be even)");
      half_sum += diff / 2;
    }
    acc.emplace(k, c * coeff_i_pow<C>(half_sum));
  }
  out.normalize();
  return out;
}

// ---------------------------------------------------------------------------
// Finite-order non-resonance: no integer vector m with 0 < |m|_1 <= 2*order
// may satisfy sum_j m_j omega_j = 0.  Elliptic contributions are real and
// hyperbolic ones imaginary, so the two blocks are tested independently and
// a reported witness is always supported on a single block.
// ---------------------------------------------------------------------------
struct NonresonanceResult {
  bool ok = true;
  std::vector<long long> witness;  // empty iff ok
};

namespace detail {

// Enumerates m on positions [pos, end) with |m|_1 == remaining exactly, in
// descending lexicographic order, so the first violation found has its first
// nonzero entry positive.
template <class S>
bool nonres_scan(const std::vector<S>& u, std::size_t pos, int remaining, S partial, double eps,
                 std::vector<long long>& m) {
  if (pos == u.size()) {
    if (remaining != 0) return false;
    if constexpr (std::is_same_v<S, double>)
      return std::abs(partial) <= eps;
    else
      return partial == S(0);
  }
  for (int mv = remaining; mv >= -remaining; --mv) {
    m[pos] = mv;
    if (nonres_scan(u, pos + 1, remaining - std::abs(mv), partial + S(mv) * u[pos], eps, m))
      return true;
  }
  m[pos] = 0;
  return false;
}

}  // namespace detail

template <class S>
NonresonanceResult check_nonresonance(const std::vector<S>& u, int d, int order,
                                      double eps = 1e-9) {
  const int n = static_cast<int>(u.size());
  if (d < 0 || d > n) throw ValidationError("check_nonresonance: need 0 <= d <= n");
  if (order < 2) throw ValidationError("check_nonresonance: order must be >= 2");
  for (const S& uj : u)
    if (!(uj > S(0))) throw ValidationError("check_nonresonance: u_j must be positive");

  const std::size_t ell_hi = static_cast<std::size_t>(n - d);
  const std::size_t nvars = static_cast<std::size_t>(n);

  for (int level = 1; level <= 2 * order; ++level) {
    for (int block = 0; block < 2; ++block) {
      const std::size_t lo = block == 0 ? 0 : ell_hi;
      const std::size_t hi = block == 0 ? ell_hi : nvars;
      if (lo == hi) continue;
      std::vector<S> usub(u.begin() + static_cast<std::ptrdiff_t>(lo),
                          u.begin() + static_cast<std::ptrdiff_t>(hi));
      std::vector<long long> m(hi - lo, 0);
      if (detail::nonres_scan(usub, 0, level, S(0), eps, m)) {
        std::vector<long long> full(nvars, 0);
        for (std::size_t i = 0; i < m.size(); ++i) full[lo + i] = m[i];
        return {false, full};
      }
    }
  }
  return {true, {}};
}

// rescale + complex_scale on the built symbol; degree-2 part becomes
// sum_j omega_j (xi_j^2 + x_j^2) exactly.
template <class S>
PhasePoly<ComplexForT<S>> prepare_scaled(const PotentialSpec<S>& spec, int maxdeg) {
  auto p = build_symbol(spec, maxdeg);
  p = rescale(p, spec.u);
  return complex_scale(p, spec.d);
}

}  // namespace birkhoff
