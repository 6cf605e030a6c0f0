#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>
#include <vector>

#include <birkhoff/coeff.hpp>
#include <birkhoff/multi_index.hpp>
#include <birkhoff/poly.hpp>

#include "support/oracles.hpp"

using birkhoff::Basis;
using birkhoff::GradedLex;
using birkhoff::MultiIndex;
using birkhoff::PhasePoly;
using birkhoff::Rational;
using birkhoff::RationalComplex;
using birkhoff::ValidationError;
using Cd = std::complex<double>;
using Pr = PhasePoly<RationalComplex>;
using Pd = PhasePoly<Cd>;

namespace {

RationalComplex rc(long re, long im = 0) {
  return RationalComplex{Rational(re), Rational(im)};
}

Pd random_poly(std::mt19937& rng, Basis basis, int n, int maxdeg, int nterms) {
  std::uniform_int_distribution<int> exp_dist(0, maxdeg);
  std::uniform_real_distribution<double> coef_dist(-1.0, 1.0);
  Pd f(basis, n);
  for (int t = 0; t < nterms; ++t) {
    std::vector<int> e(static_cast<std::size_t>(2 * n), 0);
    int budget = maxdeg;
    for (auto& ei : e) {
      ei = std::uniform_int_distribution<int>(0, budget)(rng);
      budget -= ei;
    }
    f.set_term(MultiIndex(std::move(e)), Cd(coef_dist(rng), coef_dist(rng)));
  }
  return f;
}

std::vector<Cd> random_point(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> d(-0.9, 0.9);
  std::vector<Cd> pt;
  for (int i = 0; i < 2 * n; ++i) pt.emplace_back(d(rng), d(rng));
  return pt;
}

}  // namespace

TEST_CASE("multi-index basics") {
  MultiIndex a{1, 2, 0, 3};
  REQUIRE(a.degree() == 6);
  REQUIRE(a[1] == 2);
  REQUIRE((a + MultiIndex{0, 1, 1, 0}) == MultiIndex{1, 3, 1, 3});
  REQUIRE(MultiIndex::unit(3, 1) == MultiIndex{0, 1, 0});

  GradedLex lt;
  REQUIRE(lt(MultiIndex{1, 0}, MultiIndex{0, 2}));   // lower degree first
  REQUIRE(lt(MultiIndex{0, 2}, MultiIndex{1, 1}));   // lex within a degree
  REQUIRE(!lt(MultiIndex{1, 1}, MultiIndex{1, 1}));
}

TEST_CASE("exact scalar arithmetic") {
  REQUIRE(birkhoff::rational_to_string(birkhoff::rational_from_string("-6/8")) == "-3/4");
  REQUIRE(birkhoff::rational_pow(Rational(2), 10) == Rational(1024));
  REQUIRE(birkhoff::rational_pow(Rational(2), -2) == birkhoff::rational_from_string("1/4"));
  REQUIRE(birkhoff::binomial(6, 3) == 20);
  REQUIRE(birkhoff::binomial(0, 0) == 1);

  const RationalComplex i = birkhoff::CoeffOps<RationalComplex>::imag_unit();
  REQUIRE(i * i == rc(-1));
  REQUIRE(birkhoff::coeff_i_pow<RationalComplex>(-1) == rc(0, -1));
  REQUIRE(birkhoff::coeff_i_pow<RationalComplex>(6) == rc(-1));
}

TEST_CASE("set_term validation") {
  Pr f(Basis::Real, 2);
  REQUIRE_THROWS_AS(f.set_term(MultiIndex{1, 2, 3}, rc(1)), ValidationError);
  REQUIRE_THROWS_AS(f.set_term(MultiIndex{1, -1, 0, 0}, rc(1)), ValidationError);
  f.set_term(MultiIndex{1, 0, 0, 2}, rc(5));
  REQUIRE(f.coeff(MultiIndex{1, 0, 0, 2}) == rc(5));
  REQUIRE(f.degree() == 3);
  REQUIRE(PhasePoly<RationalComplex>::zero(Basis::Real, 2).degree() == -1);
}

TEST_CASE("exact ring identities") {
  const auto x = Pr::variable(Basis::Real, 1, 0);
  const auto xi = Pr::variable(Basis::Real, 1, 1);
  const auto s = x + xi;
  const auto sq = s * s;
  REQUIRE(sq.coeff(MultiIndex{2, 0}) == rc(1));
  REQUIRE(sq.coeff(MultiIndex{1, 1}) == rc(2));
  REQUIRE(sq.coeff(MultiIndex{0, 2}) == rc(1));
  REQUIRE((sq - s * s).is_zero());

  // Truncated product drops every term above maxdeg.
  const auto cube = birkhoff::mul(sq, s, 2);
  REQUIRE(cube.is_zero());
  REQUIRE(birkhoff::mul(sq, s, 3).degree() == 3);
}

TEST_CASE("evaluate matches independent term sum") {
  std::mt19937 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + rep % 3;
    const auto f = random_poly(rng, Basis::Real, n, 4, 12);
    const auto pt = random_point(rng, n);
    const oracles::TermList<Cd> ref(f);
    REQUIRE(std::abs(f.evaluate(pt) - ref.eval(pt)) < 1e-12);
  }
}

TEST_CASE("differentiate matches termwise power rule") {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 1 + rep % 2;
    const auto f = random_poly(rng, Basis::Real, n, 5, 10);
    const oracles::TermList<Cd> ref(f);
    const auto pt = random_point(rng, n);
    for (int var = 0; var < 2 * n; ++var) {
      const auto df = birkhoff::differentiate(f, var);
      REQUIRE(std::abs(df.evaluate(pt) - ref.eval_partial(pt, var)) < 1e-12);
    }
  }
}

TEST_CASE("poisson bracket in the real basis") {
  const auto x = Pr::variable(Basis::Real, 1, 0);
  const auto xi = Pr::variable(Basis::Real, 1, 1);
  REQUIRE(birkhoff::poisson_bracket(xi, x) == Pr::constant(Basis::Real, 1, rc(1)));
  REQUIRE(birkhoff::poisson_bracket(x, xi) == Pr::constant(Basis::Real, 1, rc(-1)));

  // Pointwise agreement with the termwise-partials route.
  std::mt19937 rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 1 + rep % 2;
    const auto f = random_poly(rng, Basis::Real, n, 4, 8);
    const auto g = random_poly(rng, Basis::Real, n, 4, 8);
    const auto br = birkhoff::poisson_bracket(f, g);
    const auto pt = random_point(rng, n);
    REQUIRE(std::abs(br.evaluate(pt) - oracles::bracket_at(f, g, pt)) < 1e-10);
  }
}

TEST_CASE("bracket axioms, exact") {
  // Small exact polynomials in n=2.
  auto v = [](std::size_t i) { return Pr::variable(Basis::Real, 2, i); };
  const auto f = v(0) * v(0) + v(2) * v(3) * rc(2);
  const auto g = v(1) * v(2) - v(0) * v(3);
  const auto h = v(0) * v(1) * v(1) + v(2) * rc(3);
  auto pb = [](const Pr& a, const Pr& b) { return birkhoff::poisson_bracket(a, b); };

  REQUIRE((pb(f, g) + pb(g, f)).is_zero());
  REQUIRE((pb(f, g * h) - pb(f, g) * h - g * pb(f, h)).is_zero());
  REQUIRE((pb(f, pb(g, h)) + pb(g, pb(h, f)) + pb(h, pb(f, g))).is_zero());
}

TEST_CASE("complex basis round trip and bracket") {
  const auto x = Pr::variable(Basis::Real, 1, 0);
  const auto xi = Pr::variable(Basis::Real, 1, 1);

  // x^2 + xi^2 = z zbar.
  const auto iota = birkhoff::to_complex(x * x + xi * xi);
  REQUIRE(iota.coeff(MultiIndex{1, 1}) == rc(1));
  REQUIRE(iota.terms().size() == 1);

  // {z zbar, z} = -2i z.
  const auto z = Pr::variable(Basis::Complex, 1, 0);
  const auto zb = Pr::variable(Basis::Complex, 1, 1);
  REQUIRE(birkhoff::poisson_bracket(iota, z) == z * rc(0, -2));
  REQUIRE(birkhoff::poisson_bracket(iota, zb) == zb * rc(0, 2));

  // The exact-coefficient round trip is an identity on the nose.
  Pr g0(Basis::Real, 2);
  g0.set_term(MultiIndex{2, 1, 0, 3}, rc(3, -2));
  g0.set_term(MultiIndex{0, 0, 1, 1}, rc(0, 5));
  REQUIRE(birkhoff::to_real(birkhoff::to_complex(g0)) == g0);

  std::mt19937 rng(17);
  for (int rep = 0; rep < 8; ++rep) {
    const int n = 1 + rep % 2;
    const auto f = random_poly(rng, Basis::Real, n, 4, 8);

    // Float round trip is an identity up to rounding.
    const auto rt = birkhoff::to_real(birkhoff::to_complex(f)) - f;
    const oracles::TermList<Cd> rtl(rt);
    double rerr = 0.0;
    for (const auto& t : rtl.terms) rerr = std::max(rerr, std::abs(t.coeff));
    REQUIRE(rerr < 1e-12);

    // Bracket commutes with the change of basis.
    const auto g = random_poly(rng, Basis::Real, n, 4, 8);
    const auto via_real = birkhoff::to_complex(birkhoff::poisson_bracket(f, g));
    const auto via_complex =
        birkhoff::poisson_bracket(birkhoff::to_complex(f), birkhoff::to_complex(g));
    const auto diff = via_real - via_complex;
    const oracles::TermList<Cd> tl(diff);
    double mx = 0.0;
    for (const auto& t : tl.terms) mx = std::max(mx, std::abs(t.coeff));
    REQUIRE(mx < 1e-12);
  }
}

TEST_CASE("linear substitution") {
  // Invertible shear (x, xi) -> (x + xi, xi) composes and inverts.
  Pr f(Basis::Real, 1);
  f.set_term(MultiIndex{2, 1}, rc(3));
  const std::vector<std::vector<RationalComplex>> shear = {{rc(1), rc(1)}, {rc(0), rc(1)}};
  const std::vector<std::vector<RationalComplex>> unshear = {{rc(1), rc(-1)}, {rc(0), rc(1)}};
  const auto g = birkhoff::substitute_linear(f, shear);
  REQUIRE(birkhoff::substitute_linear(g, unshear) == f);

  const std::vector<std::vector<RationalComplex>> singular = {{rc(1), rc(2)}, {rc(2), rc(4)}};
  REQUIRE_THROWS_AS(birkhoff::substitute_linear(f, singular), ValidationError);
}

TEST_CASE("action polynomials") {
  birkhoff::ActionPoly<RationalComplex> a(2);
  a.set_term(MultiIndex{2, 1}, rc(5));
  a.set_term(MultiIndex{1, 0}, rc(-1));
  REQUIRE(a.degree() == 3);

  // as_phase maps iota^alpha to z^alpha zbar^alpha.
  const auto ph = a.as_phase();
  REQUIRE(ph.coeff(MultiIndex{2, 1, 2, 1}) == rc(5));
  REQUIRE(ph.coeff(MultiIndex{1, 0, 1, 0}) == rc(-1));
  REQUIRE(ph.terms().size() == 2);

  const auto ad = birkhoff::action_convert<Cd>(a);
  const std::vector<Cd> iota = {Cd(0.5, 0.0), Cd(2.0, 0.0)};
  REQUIRE(std::abs(ad.evaluate(iota) - Cd(0.25 * 2.0 * 5.0 - 0.5, 0.0)) < 1e-14);
}

TEST_CASE("conversion exact to float") {
  Pr f(Basis::Real, 1);
  f.set_term(MultiIndex{2, 0}, RationalComplex{birkhoff::rational_from_string("3/4"),
                                               birkhoff::rational_from_string("-1/8")});
  const auto fd = birkhoff::poly_convert<Cd>(f);
  REQUIRE(std::abs(fd.coeff(MultiIndex{2, 0}) - Cd(0.75, -0.125)) == 0.0);
}
