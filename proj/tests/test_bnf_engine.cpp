#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <vector>

#include <birkhoff/bnf.hpp>
#include <birkhoff/potential.hpp>

#include "support/builders.hpp"
#include "support/oracles.hpp"

using birkhoff::ActionPoly;
using birkhoff::Basis;
using birkhoff::MathError;
using birkhoff::MultiIndex;
using birkhoff::NormalForm;
using birkhoff::PhasePoly;
using birkhoff::Rational;
using birkhoff::RationalComplex;
using birkhoff::ResonanceError;
using birkhoff::ValidationError;
using birkhoff::rational_from_string;
using Cd = std::complex<double>;
using Pr = PhasePoly<RationalComplex>;

namespace {
RationalComplex rc(long re, long im = 0) {
  return RationalComplex{Rational(re), Rational(im)};
}
RationalComplex rq(const std::string& s) {
  return RationalComplex{rational_from_string(s), Rational(0)};
}
}  // namespace

TEST_CASE("torus average splits diagonal and oscillating parts") {
  Pr f(Basis::Complex, 2);
  f.set_term(MultiIndex{1, 0, 1, 0}, rc(2));   // z1 zbar1
  f.set_term(MultiIndex{2, 1, 2, 1}, rc(5));   // z1^2 z2 zbar1^2 zbar2
  f.set_term(MultiIndex{2, 0, 0, 0}, rc(7));   // z1^2, oscillating
  const auto [avg, rest] = birkhoff::torus_average(f);
  REQUIRE(avg.coeff(MultiIndex{1, 0}) == rc(2));
  REQUIRE(avg.coeff(MultiIndex{2, 1}) == rc(5));
  REQUIRE(rest.coeff(MultiIndex{2, 0, 0, 0}) == rc(7));
  REQUIRE(rest.terms().size() == 1);
  REQUIRE((avg.as_phase() + rest - f).is_zero());
}

TEST_CASE("homological equation is solved exactly") {
  const auto fr = birkhoff::frequencies<Rational>({Rational(2), Rational(3)}, 0);
  const auto h1 = birkhoff::quadratic_flow_hamiltonian(fr);
  REQUIRE(h1.coeff(MultiIndex{1, 0, 1, 0}) == rc(2));
  REQUIRE(h1.coeff(MultiIndex{0, 1, 0, 1}) == rc(3));

  Pr rest(Basis::Complex, 2);
  rest.set_term(MultiIndex{3, 0, 0, 1}, rc(1, 2));
  rest.set_term(MultiIndex{0, 2, 1, 0}, rc(-4));
  rest.set_term(MultiIndex{1, 0, 3, 0}, rq("7/3"));
  const auto g = birkhoff::solve_homological(rest, fr);
  REQUIRE((birkhoff::poisson_bracket(h1, g) - rest).is_zero());

  SECTION("diagonal right-hand side is rejected") {
    Pr bad(Basis::Complex, 2);
    bad.set_term(MultiIndex{1, 1, 1, 1}, rc(1));
    REQUIRE_THROWS_AS(birkhoff::solve_homological(bad, fr), ValidationError);
  }

  SECTION("resonant monomial carries its witness") {
    // 3 u1 - u2 = 0 for u = (1,3) at the degree-4 monomial zbar1^3 z2.
    const auto res = birkhoff::frequencies<Rational>({Rational(1), Rational(3)}, 0);
    Pr bad(Basis::Complex, 2);
    bad.set_term(MultiIndex{0, 1, 3, 0}, rc(1));
    try {
      birkhoff::solve_homological(bad, res);
      FAIL("expected ResonanceError");
    } catch (const ResonanceError& e) {
      REQUIRE(e.witness == std::vector<long long>{3, -1});
    }
  }
}

TEST_CASE("lie transform") {
  const auto fr = birkhoff::frequencies<Rational>({Rational(1)}, 0);
  const auto h1 = birkhoff::quadratic_flow_hamiltonian(fr);

  SECTION("zero generator is the identity up to truncation") {
    const auto g = Pr::zero(Basis::Complex, 1);
    REQUIRE(birkhoff::lie_transform(h1, g, 4) == h1);
  }

  SECTION("low-degree generators are rejected") {
    const auto g = Pr::variable(Basis::Complex, 1, 0) * Pr::variable(Basis::Complex, 1, 1);
    REQUIRE_THROWS_AS(birkhoff::lie_transform(h1, g, 4), ValidationError);
  }

  SECTION("series matches the integrated flow pointwise") {
    // Real-basis data: exp(ad_G) f equals f pulled back along the time-1 flow
    // of G, up to the truncation order.
    PhasePoly<Cd> G(Basis::Real, 2);
    G.set_term(MultiIndex{2, 1, 1, 0}, Cd(0.05, 0.0));
    G.set_term(MultiIndex{0, 3, 0, 1}, Cd(-0.03, 0.0));
    G.set_term(MultiIndex{1, 0, 2, 0}, Cd(0.04, 0.0));
    PhasePoly<Cd> f(Basis::Real, 2);
    f.set_term(MultiIndex{1, 0, 1, 0}, Cd(1.0, 0.0));
    f.set_term(MultiIndex{0, 2, 0, 1}, Cd(0.7, 0.0));
    const auto lt = birkhoff::lie_transform(f, G, 8);

    const oracles::TermList<Cd> fref(f);
    const std::vector<double> pt0 = {0.21, -0.13, 0.08, 0.17};
    const auto moved = oracles::flow_time_one(G, pt0, 400);
    std::vector<Cd> ptc(pt0.begin(), pt0.end());
    std::vector<Cd> movedc(moved.begin(), moved.end());
    const Cd series = lt.evaluate(ptc);
    const Cd direct = fref.eval(movedc);
    REQUIRE(std::abs(series - direct) < 1e-9);
  }
}

TEST_CASE("normal form of the quartic well") {
  const auto [nf, chain] = birkhoff::bnf_from_spec(builders::quartic_1d(), 3);
  nf.validate();
  REQUIRE(nf.scaled);
  REQUIRE(nf.order == 3);
  REQUIRE(chain.size() == 2);

  // Frozen values for V = x^2 + x^4/10: h2 = (3/80) iota^2, h3 = -(17/6400) iota^3.
  REQUIRE(nf.action(2).coeff(MultiIndex{2}) == rq("3/80"));
  REQUIRE(nf.action(3).coeff(MultiIndex{3}) == rq("-17/6400"));
  REQUIRE(nf.action(2).terms().size() == 1);

  // Independent reconstruction of the first step: averaging the transformed
  // symbol at degree 4 must give h2 back.
  const auto p = birkhoff::to_complex(birkhoff::prepare_scaled(builders::quartic_1d(), 6));
  const auto moved = birkhoff::lie_transform(p, chain[0], 4);
  const auto [avg, rest] = birkhoff::torus_average(moved.homogeneous_part(4));
  REQUIRE(rest.is_zero());
  REQUIRE(avg.coeff(MultiIndex{2}) == rq("3/80"));

  // The scaled chain generators keep the per-coordinate parity.
  for (const auto& g : chain) REQUIRE(g.even_per_coordinate());
}

TEST_CASE("normal form of the barrier and unscaling") {
  const auto [nf, chain] = birkhoff::bnf_from_spec(builders::barrier_1d(), 2);
  REQUIRE(nf.action(2).coeff(MultiIndex{2}) == rq("-3/40"));

  const auto un = birkhoff::unscale_normal_form(nf);
  REQUIRE(!un.scaled);
  REQUIRE(un.action(2).coeff(MultiIndex{2}) == rq("3/40"));
  REQUIRE(un.E0 == Rational(1));

  SECTION("unscaling enforces realness") {
    auto bad = nf;
    bad.actions[0].set_term(MultiIndex{2}, rc(0, 1));
    REQUIRE_THROWS_AS(birkhoff::unscale_normal_form(bad), MathError);
  }
}

TEST_CASE("mixed-signature quadratic averaging") {
  // With no cubic part, h2 is the plain torus average of the scaled quartic:
  // per coefficient, c_alpha i^{sum_hyp alpha} prod C(2a,a)/4^a.
  const auto [nf, chain] = birkhoff::bnf_from_spec(builders::mixed_2d(), 2);
  REQUIRE(nf.action(2).coeff(MultiIndex{2, 0}) == rq("3/80"));
  REQUIRE(nf.action(2).coeff(MultiIndex{1, 1}) == RationalComplex{Rational(0), rational_from_string("1/80")});
  REQUIRE(nf.action(2).coeff(MultiIndex{0, 2}) == rq("-3/80"));
}

TEST_CASE("resonant frequencies are rejected with a witness") {
  auto s = builders::quartic_1d();
  s.n = 2;
  s.d = 0;
  s.u = {Rational(1), Rational(2)};
  s.coeffs.clear();
  s.coeffs[MultiIndex{1, 1}] = Rational(1);
  try {
    birkhoff::bnf_from_spec(s, 3);
    FAIL("expected ResonanceError");
  } catch (const ResonanceError& e) {
    REQUIRE(e.witness == std::vector<long long>{2, -1});
  }
}

TEST_CASE("float mode tracks the exact computation") {
  const auto [nfe, ce] = birkhoff::bnf_from_spec(builders::quartic_1d(), 4);
  const auto sf = birkhoff::spec_convert<double>(builders::quartic_1d());
  const auto [nff, cf] = birkhoff::bnf_from_spec(sf, 4);
  for (int N = 2; N <= 4; ++N) {
    const auto he = birkhoff::action_convert<Cd>(nfe.action(N));
    for (const auto& [alpha, c] : nff.action(N).terms())
      REQUIRE(std::abs(c - he.coeff(alpha)) < 1e-12);
    REQUIRE(he.terms().size() == nff.action(N).terms().size());
  }
}

TEST_CASE("normal form conversion round trip") {
  const auto [nf, chain] = birkhoff::bnf_from_spec(builders::barrier_1d(), 3);
  const auto nd = birkhoff::normal_form_convert<Cd>(nf);
  REQUIRE(nd.order == 3);
  REQUIRE(nd.u[0] == 1.0);
  REQUIRE(std::abs(nd.action(2).coeff(MultiIndex{2}) - Cd(-0.075, 0.0)) < 1e-15);
  nd.validate();
}
