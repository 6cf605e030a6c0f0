#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "bnf.hpp"
#include "coeff.hpp"
#include "errors.hpp"
#include "multi_index.hpp"
#include "poly.hpp"
#include "potential.hpp"

namespace birkhoff {

// Torus average of prod_j x_j^{2 alpha_j} over the circles iota_j = 1:
// prod_j binom(2 alpha_j, alpha_j) / 4^{alpha_j}.
inline Rational averaging_coefficient(const MultiIndex& alpha) {
  if (!alpha.all_nonnegative()) throw ValidationError("averaging_coefficient: negative exponent");
  Rational r(1);
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    const int a = alpha[j];
    r *= Rational(binomial(2 * a, a));
    r /= rational_pow(Rational(4), a);
  }
  return r;
}

struct RecoverOptions {
  double eps = 1e-9;
  double realness_tol = 1e-6;
};

// Inverts the normal form degree by degree: at each degree N the potential
// coefficients with |alpha| = N enter h_N linearly through the averaging map
// (after scaling phases), on top of the artifact generated by the lower
// degrees.  Subtracting a forward run of the already-recovered part isolates
// them.  The result reproduces nf through degree N_target under the forward
// engine.
template <class C>
PotentialSpec<typename CoeffOps<C>::Scalar> recover_taylor(const NormalForm<C>& nf_in,
                                                           int n_target,
                                                           const RecoverOptions& opt = {}) {
  using Ops = CoeffOps<C>;
  using S = typename Ops::Scalar;
  nf_in.validate();
  if (n_target < 2) throw ValidationError("recover_taylor: target degree must be >= 2");
  if (n_target > nf_in.order)
    throw ValidationError("recover_taylor: target degree exceeds normal form order");
  const NormalForm<C> nf = detail::as_scaled(nf_in);

  PotentialSpec<S> spec;
  spec.n = nf.n;
  spec.d = nf.d;
  spec.E0 = nf.E0;
  spec.u = nf.u;

  for (int N = 2; N <= n_target; ++N) {
    // Artifact of the lower-degree coefficients at degree N.
    ActionPoly<C> artifact(nf.n);
    if (N == 2) {
      // First step is pure averaging: nothing recovered yet, no artifact.
    } else {
      auto [nf_partial, chain] = bnf_from_spec(spec, N, opt.eps);
      artifact = nf_partial.action(N);
    }

    ActionPoly<C> w_img = nf.action(N) - artifact;
    for (const auto& [alpha, w] : w_img.terms()) {
      long hyp = 0;
      for (int j = nf.n - nf.d; j < nf.n; ++j) hyp += alpha[static_cast<std::size_t>(j)];
      const Rational avg = averaging_coefficient(alpha);
      C c = w * coeff_i_pow<C>(-hyp);
      for (int j = 0; j < nf.n; ++j)
        c *= Ops::from_scalar(Ops::scalar_pow(nf.u[static_cast<std::size_t>(j)],
                                              alpha[static_cast<std::size_t>(j)]));
      if constexpr (Ops::exact) {
        c /= Ops::from_scalar(avg);
        if (!(Ops::imag(c) == S(0)))
          throw MathError("recover_taylor: nonreal Taylor coefficient (inconsistent normal form)");
      } else {
        c /= Ops::from_scalar(rational_to_double(avg));
        const double re = Ops::real(c), im = Ops::imag(c);
        if (std::abs(im) > opt.realness_tol * std::max(1.0, std::abs(re)))
          throw NumericalError("recover_taylor: residual imaginary part above tolerance");
        c = Ops::from_scalar(re);
      }
      spec.coeffs[alpha] = Ops::real(c);
    }
  }
  spec.validate();
  return spec;
}

}  // namespace birkhoff
