#pragma once

#include <string>
#include <utility>
#include <vector>

#include "coeff.hpp"
#include "errors.hpp"
#include "multi_index.hpp"
#include "poly.hpp"
#include "potential.hpp"

namespace birkhoff {

// Normal form through degree 2*order: actions[k] is h_{k+2}, a homogeneous
// polynomial of degree k+2 in the actions iota_j.  The linear part
// sum_j omega_j iota_j is implicit (carried by u and d).  scaled = true means
// the coefficients refer to the tilde actions of the complex-scaled picture;
// unscaled coefficients refer to iota_j = xi_j^2 + x_j^2 on the elliptic
// block and j_j = xi_j^2 - x_j^2 on the hyperbolic one.
template <class C>
struct NormalForm {
  using Ops = CoeffOps<C>;
  using Scalar = typename Ops::Scalar;

  int n = 0;
  int d = 0;
  Scalar E0 = Scalar(0);
  std::vector<Scalar> u;
  bool scaled = true;
  int order = 2;
  std::vector<ActionPoly<C>> actions;

  void validate() const {
    if (n < 1) throw ValidationError("normal form: dimension n must be >= 1");
    if (d < 0 || d > n) throw ValidationError("normal form: need 0 <= d <= n");
    if (static_cast<int>(u.size()) != n) throw ValidationError("normal form: u must have n entries");
    for (const Scalar& uj : u)
      if (!(uj > Scalar(0))) throw ValidationError("normal form: u_j must be positive");
    if (order < 2) throw ValidationError("normal form: order must be >= 2");
    if (static_cast<int>(actions.size()) != order - 1)
      throw ValidationError("normal form: expected one action polynomial per degree 2..order");
    for (int N = 2; N <= order; ++N) {
      const auto& h = actions[static_cast<std::size_t>(N - 2)];
      if (h.n() != n && !h.is_zero())
        throw ValidationError("normal form: action polynomial dimension mismatch");
      for (const auto& [alpha, c] : h.terms())
        if (alpha.degree() != N)
          throw ValidationError("normal form: h_N must be homogeneous of degree N");
    }
  }

  const ActionPoly<C>& action(int N) const { return actions.at(static_cast<std::size_t>(N - 2)); }
};

template <class C>
using CanonicalChain = std::vector<PhasePoly<C>>;  // G_N for N = 2..order

// Splits f (complex basis) into its torus average (monomials z^a zbar^a,
// rewritten in the actions) and the rest.
template <class C>
std::pair<ActionPoly<C>, PhasePoly<C>> torus_average(const PhasePoly<C>& f) {
  if (f.basis() != Basis::Complex)
    throw ValidationError("torus_average: polynomial must be in the complex basis");
  const int n = f.n();
  ActionPoly<C> avg(n);
  PhasePoly<C> rest(Basis::Complex, n);
  auto& rest_acc = rest.raw_terms();
  for (const auto& [k, c] : f.terms()) {
    bool diag = true;
    for (int j = 0; j < n && diag; ++j)
      diag = k[static_cast<std::size_t>(j)] == k[static_cast<std::size_t>(j + n)];
    if (diag) {
      std::vector<int> alpha(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) alpha[static_cast<std::size_t>(j)] = k[static_cast<std::size_t>(j)];
      avg.set_term(MultiIndex(std::move(alpha)), c);
    } else {
      rest_acc.emplace(k, c);
    }
  }
  rest.normalize();
  return {std::move(avg), std::move(rest)};
}

// H1 = sum_j omega_j z_j zbar_j in the complex basis.
template <class C>
PhasePoly<C> quadratic_flow_hamiltonian(const Frequencies<C>& omega) {
  const int n = omega.n();
  PhasePoly<C> h1(Basis::Complex, n);
  for (int j = 0; j < n; ++j) {
    std::vector<int> e(static_cast<std::size_t>(2 * n), 0);
    e[static_cast<std::size_t>(j)] = 1;
    e[static_cast<std::size_t>(j + n)] = 1;
    h1.set_term(MultiIndex(std::move(e)), omega.omega[static_cast<std::size_t>(j)]);
  }
  return h1;
}

// Solves {H1, G} = rest termwise: the monomial z^a zbar^b is an eigenvector
// of {H1, .} with eigenvalue 2i sum_j omega_j (b_j - a_j).
template <class C>
PhasePoly<C> solve_homological(const PhasePoly<C>& rest, const Frequencies<C>& omega,
                               double eps = 1e-9) {
  using Ops = CoeffOps<C>;
  if (rest.basis() != Basis::Complex)
    throw ValidationError("solve_homological: polynomial must be in the complex basis");
  const int n = rest.n();
  if (omega.n() != n) throw ValidationError("solve_homological: frequency count mismatch");

  PhasePoly<C> g(Basis::Complex, n);
  auto& acc = g.raw_terms();
  const C two_i = Ops::imag_unit() * Ops::from_int(2);
  for (const auto& [k, c] : rest.terms()) {
    C s = Ops::zero();
    std::vector<long long> m(static_cast<std::size_t>(n));
    bool diag = true;
    for (int j = 0; j < n; ++j) {
      const int diff = k[static_cast<std::size_t>(j + n)] - k[static_cast<std::size_t>(j)];
      m[static_cast<std::size_t>(j)] = diff;
      if (diff != 0) diag = false;
      s += Ops::from_int(diff) * omega.omega[static_cast<std::size_t>(j)];
    }
    if (diag) throw ValidationError("solve_homological: rest contains an average monomial");
    const C lambda = two_i * s;
    const bool resonant = Ops::exact ? Ops::is_zero(lambda) : Ops::abs_approx(lambda) <= eps;
    if (resonant) {
      ResonanceError e("resonant small divisor at monomial " + k.str());
      e.witness = std::move(m);
      throw e;
    }
    acc.emplace(k, c / lambda);
  }
  g.normalize();
  return g;
}

// exp(ad_G) f = sum_k ad_G^k(f)/k!, ad_G(f) = {G, f}, truncated at maxdeg.
// Terminates because each bracket with G raises degree by deg(G) - 2 >= 1.
template <class C>
PhasePoly<C> lie_transform(const PhasePoly<C>& f, const PhasePoly<C>& g, int maxdeg) {
  using Ops = CoeffOps<C>;
  if (maxdeg < 0) throw ValidationError("lie_transform: maxdeg must be nonnegative");
  if (g.is_zero()) return f.truncated(maxdeg);
  if (g.min_degree() < 3)
    throw ValidationError("lie_transform: generator must have degree >= 3");
  PhasePoly<C> result = f.truncated(maxdeg);
  PhasePoly<C> term = result;
  long k = 0;
  while (!term.is_zero()) {
    ++k;
    term = poisson_bracket(g, term, maxdeg);
    term *= Ops::one() / Ops::from_int(k);
    result += term;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Degree-by-degree normal form in the scaled picture.  Input is the
// real-basis scaled symbol with quadratic part sum_j omega_j (xi_j^2+x_j^2).
// ---------------------------------------------------------------------------
template <class C>
std::pair<NormalForm<C>, CanonicalChain<C>> compute_bnf(const PhasePoly<C>& p_scaled,
                                                        const Frequencies<C>& omega, int order,
                                                        double eps = 1e-9) {
  using Ops = CoeffOps<C>;
  if (order < 2) throw ValidationError("compute_bnf: order must be >= 2");
  const int n = p_scaled.n();
  if (omega.n() != n) throw ValidationError("compute_bnf: frequency count mismatch");
  if (!p_scaled.even_per_coordinate())
    throw ValidationError("compute_bnf: symbol must be even per coordinate");

  const int maxdeg = 2 * order;
  PhasePoly<C> current =
      p_scaled.basis() == Basis::Complex ? p_scaled.truncated(maxdeg) : to_complex(p_scaled.truncated(maxdeg));
  const PhasePoly<C> h1 = quadratic_flow_hamiltonian(omega);

  // The quadratic part must match H1 exactly (up to float noise).
  {
    PhasePoly<C> diff = current.homogeneous_part(2) - h1;
    bool ok;
    if constexpr (Ops::exact) {
      ok = diff.is_zero();
    } else {
      double m = 0.0, ref = 0.0;
      for (const auto& [k, c] : diff.terms()) m = std::max(m, Ops::abs_approx(c));
      for (const auto& [k, c] : h1.terms()) ref = std::max(ref, Ops::abs_approx(c));
      ok = m <= 1e-9 * (1.0 + ref);
    }
    if (!ok)
      throw ValidationError("compute_bnf: quadratic part is not sum omega_j (xi_j^2 + x_j^2)");
  }
  if (!current.homogeneous_part(0).is_zero() || !current.homogeneous_part(1).is_zero() ||
      !current.homogeneous_part(3).is_zero())
    throw ValidationError("compute_bnf: symbol must vanish to second order at the origin");

  NormalForm<C> nf;
  nf.n = n;
  nf.d = omega.d;
  nf.scaled = true;
  nf.order = order;
  nf.u.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const C& w = omega.omega[static_cast<std::size_t>(j)];
    nf.u.push_back(j < n - omega.d ? Ops::real(w) : -Ops::imag(w));
  }

  CanonicalChain<C> chain;
  for (int N = 2; N <= order; ++N) {
    const PhasePoly<C> r_n = current.homogeneous_part(2 * N);
    auto [h_n, rest] = torus_average(r_n);
    PhasePoly<C> g_n = solve_homological(rest, omega, eps);
    if (!g_n.is_zero()) current = lie_transform(current, g_n, maxdeg);

    // Post-step: degree-2N part must be exactly the average, parity intact.
    PhasePoly<C> achieved = current.homogeneous_part(2 * N) - h_n.as_phase();
    if constexpr (Ops::exact) {
      if (!achieved.is_zero()) throw MathError("compute_bnf: homological step failed to normalize");
    } else {
      double m = 0.0, ref = 0.0;
      for (const auto& [k, c] : achieved.terms()) m = std::max(m, Ops::abs_approx(c));
      for (const auto& [k, c] : r_n.terms()) ref = std::max(ref, Ops::abs_approx(c));
      if (m > 1e-8 * (1.0 + ref))
        throw NumericalError("compute_bnf: homological step lost precision");
    }
    if (!current.even_per_coordinate())
      throw MathError("compute_bnf: per-coordinate parity violated");

    nf.actions.push_back(std::move(h_n));
    chain.push_back(std::move(g_n));
  }
  return {std::move(nf), std::move(chain)};
}

// Substitutes the hyperbolic tilde actions back: tilde iota_j = i * j_j, so a
// coefficient gains i^{sum_hyp alpha_j}.  Symmetric real input makes the
// results real; the imaginary parts are checked and dropped.
template <class C>
NormalForm<C> unscale_normal_form(const NormalForm<C>& nf, double tol = 1e-9) {
  using Ops = CoeffOps<C>;
  if (!nf.scaled) throw ValidationError("unscale_normal_form: input already unscaled");
  NormalForm<C> out = nf;
  out.scaled = false;
  out.actions.clear();
  for (const auto& h : nf.actions) {
    ActionPoly<C> g(nf.n);
    for (const auto& [alpha, c] : h.terms()) {
      long hyp = 0;
      for (int j = nf.n - nf.d; j < nf.n; ++j) hyp += alpha[static_cast<std::size_t>(j)];
      C v = c * coeff_i_pow<C>(hyp);
      if constexpr (Ops::exact) {
        if (!(Ops::imag(v) == typename Ops::Scalar(0)))
          throw MathError("unscale_normal_form: nonreal coefficient (upstream inconsistency)");
      } else {
        const double re = std::abs(Ops::real(v)), im = std::abs(Ops::imag(v));
        if (im > tol * (1.0 + re))
          throw NumericalError("unscale_normal_form: residual imaginary part above tolerance");
        v = Ops::from_scalar(Ops::real(v));
      }
      g.set_term(alpha, v);
    }
    out.actions.push_back(std::move(g));
  }
  return out;
}

template <class To, class From>
NormalForm<To> normal_form_convert(const NormalForm<From>& nf) {
  NormalForm<To> out;
  out.n = nf.n;
  out.d = nf.d;
  out.scaled = nf.scaled;
  out.order = nf.order;
  if constexpr (std::is_same_v<To, From>) {
    out.E0 = nf.E0;
    out.u = nf.u;
    for (const auto& h : nf.actions) out.actions.push_back(h);
  } else if constexpr (CoeffOps<To>::exact) {
    out.E0 = rational_from_double(nf.E0);
    for (double uj : nf.u) out.u.push_back(rational_from_double(uj));
    for (const auto& h : nf.actions) out.actions.push_back(action_convert<To>(h));
  } else {
    out.E0 = rational_to_double(nf.E0);
    for (const auto& uj : nf.u) out.u.push_back(rational_to_double(uj));
    for (const auto& h : nf.actions) out.actions.push_back(action_convert<To>(h));
  }
  return out;
}

namespace detail {

// Inverse of unscale_normal_form: multiply each coefficient by the inverse
// hyperbolic phase so the actions refer to the tilde variables again.
template <class C>
NormalForm<C> as_scaled(const NormalForm<C>& nf) {
  if (nf.scaled) return nf;
  NormalForm<C> out = nf;
  out.scaled = true;
  out.actions.clear();
  for (const auto& h : nf.actions) {
    ActionPoly<C> g(nf.n);
    for (const auto& [alpha, c] : h.terms()) {
      long hyp = 0;
      for (int j = nf.n - nf.d; j < nf.n; ++j) hyp += alpha[static_cast<std::size_t>(j)];
      g.set_term(alpha, c * coeff_i_pow<C>(-hyp));
    }
    out.actions.push_back(std::move(g));
  }
  return out;
}

}  // namespace detail

// Full pipeline: validate, check non-resonance, scale, normalize.
template <class S>
std::pair<NormalForm<ComplexForT<S>>, CanonicalChain<ComplexForT<S>>> bnf_from_spec(
    const PotentialSpec<S>& spec, int order, double eps = 1e-9) {
  spec.validate();
  if (order < 2) throw ValidationError("bnf_from_spec: order must be >= 2");
  auto nonres = check_nonresonance(spec.u, spec.d, order, eps);
  if (!nonres.ok) {
    ResonanceError e("frequencies violate finite-order non-resonance");
    e.witness = nonres.witness;
    throw e;
  }
  auto p = prepare_scaled(spec, std::max(2 * order, spec.max_degree()));
  auto omega = frequencies(spec.u, spec.d);
  auto [nf, chain] = compute_bnf(p.truncated(2 * order), omega, order, eps);
  nf.E0 = spec.E0;
  nf.u = spec.u;
  return {std::move(nf), std::move(chain)};
}

}  // namespace birkhoff
