#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <birkhoff/bnf.hpp>
#include <birkhoff/recovery.hpp>
#include <birkhoff/resonance.hpp>

#include "support/builders.hpp"

using birkhoff::ActionPoly;
using birkhoff::MathError;
using birkhoff::MultiIndex;
using birkhoff::NormalForm;
using birkhoff::ResonanceList;
using birkhoff::ValidationError;
using Cd = std::complex<double>;

namespace {

// Purely quadratic synthetic normal form, canonical coordinate order.
NormalForm<Cd> quadratic_nf(double E0, std::vector<double> u, int d) {
  NormalForm<Cd> nf;
  nf.n = static_cast<int>(u.size());
  nf.d = d;
  nf.E0 = E0;
  nf.u = std::move(u);
  nf.order = 2;
  nf.scaled = true;
  nf.actions = {ActionPoly<Cd>(nf.n)};
  return nf;
}

}  // namespace

TEST_CASE("implied disc exponent") {
  REQUIRE(std::abs(birkhoff::implied_delta(0.01, 4) -
                   std::log(9.0 * 0.01) / std::log(0.01)) < 1e-15);
  REQUIRE(birkhoff::implied_delta(0.01, 0) > 0.99);  // ground state only: full power
}

TEST_CASE("lattice generation") {
  const auto [nf, chain] = birkhoff::bnf_from_spec(builders::quartic_1d(), 3);

  SECTION("elliptic values follow the action expansion") {
    const auto list = birkhoff::generate_resonances(nf, 0.01, 4);
    REQUIRE(list.values.size() == 5);
    REQUIRE(list.labeled());
    for (int k = 0; k <= 4; ++k) {
      const double iota = (2.0 * k + 1.0) * 0.01;
      const double expect = iota + 3.0 / 80.0 * iota * iota - 17.0 / 6400.0 * iota * iota * iota;
      REQUIRE(std::abs(list.values[static_cast<std::size_t>(k)] - Cd(expect, 0.0)) < 1e-15);
      REQUIRE(list.labels[static_cast<std::size_t>(k)] == MultiIndex{k});
    }
    list.validate(1);
  }

  SECTION("hyperbolic values fill the lower half plane") {
    const auto [bnf_res, c2] = birkhoff::bnf_from_spec(builders::barrier_1d(), 2);
    const auto list = birkhoff::generate_resonances(bnf_res, 0.01, 6);
    for (std::size_t i = 0; i < list.values.size(); ++i) {
      const double iota = (2.0 * i + 1.0) * 0.01;
      REQUIRE(list.values[i].imag() == -iota);
      REQUIRE(std::abs(list.values[i].real() - (1.0 - 0.075 * iota * iota)) < 1e-15);
    }
  }

  SECTION("product order over several coordinates") {
    const auto [mnf, mc] = birkhoff::bnf_from_spec(builders::mixed_2d(), 2);
    const auto list = birkhoff::generate_resonances(mnf, 0.01, 2);
    REQUIRE(list.values.size() == 9);
    REQUIRE(list.labels[0] == MultiIndex{0, 0});
    REQUIRE(list.labels[1] == MultiIndex{0, 1});
    REQUIRE(list.labels[3] == MultiIndex{1, 0});
  }
}

TEST_CASE("list validation") {
  ResonanceList l;
  l.h = 0.01;
  l.values = {Cd(1.0, 0.05)};
  l.labels = {MultiIndex{0}};
  REQUIRE_THROWS_AS(l.validate(), ValidationError);  // labeled value above the axis
  l.values = {Cd(1.0, -0.05)};
  REQUIRE_NOTHROW(l.validate());
  l.labels = {MultiIndex{0}, MultiIndex{1}};
  REQUIRE_THROWS_AS(l.validate(), ValidationError);  // label misalignment
}

TEST_CASE("structure estimation") {
  SECTION("purely quadratic data is read back exactly") {
    const auto nf = quadratic_nf(0.3, {1.0, 2.5}, 1);
    const auto l1 = birkhoff::generate_resonances(nf, 0.01, 2);
    const auto l2 = birkhoff::generate_resonances(nf, 0.005, 2);
    const auto st = birkhoff::estimate_structure({l1, l2});
    REQUIRE(st.n == 2);
    REQUIRE(st.d == 1);
    REQUIRE(std::abs(st.E0 - 0.3) < 1e-12);
    REQUIRE(std::abs(st.u[0] - 1.0) < 1e-10);
    REQUIRE(std::abs(st.u[1] - 2.5) < 1e-10);
    const auto w = st.lattice_omega();
    REQUIRE(std::abs(w[0] - Cd(1.0, 0.0)) < 1e-10);
    REQUIRE(std::abs(w[1] - Cd(0.0, -2.5)) < 1e-10);
  }

  SECTION("anharmonic corrections are extrapolated away") {
    const auto [nf, chain] = birkhoff::bnf_from_spec(builders::quartic_1d(), 3);
    const auto l1 = birkhoff::generate_resonances(nf, 0.02, 6);
    const auto l2 = birkhoff::generate_resonances(nf, 0.01, 6);
    const auto l3 = birkhoff::generate_resonances(nf, 0.005, 6);
    const auto st = birkhoff::estimate_structure({l1, l2, l3});
    REQUIRE(st.n == 1);
    REQUIRE(st.d == 0);
    REQUIRE(std::abs(st.E0) < 1e-6);
    REQUIRE(std::abs(st.u[0] - 1.0) < 1e-4);
    REQUIRE(st.hs == std::vector<double>{0.005, 0.01, 0.02});
  }

  SECTION("at least two distinct h are required") {
    const auto nf = quadratic_nf(0.0, {1.0}, 0);
    const auto l1 = birkhoff::generate_resonances(nf, 0.01, 3);
    REQUIRE_THROWS_AS(birkhoff::estimate_structure({l1}), ValidationError);
    REQUIRE_THROWS_AS(birkhoff::estimate_structure({l1, l1}), ValidationError);
  }

  SECTION("inconsistent signatures across h are rejected") {
    const auto well = quadratic_nf(0.0, {1.0}, 0);
    const auto saddle = quadratic_nf(0.0, {1.0}, 1);
    const auto l1 = birkhoff::generate_resonances(well, 0.01, 3);
    const auto l2 = birkhoff::generate_resonances(saddle, 0.005, 3);
    REQUIRE_THROWS_AS(birkhoff::estimate_structure({l1, l2}), MathError);
  }
}

TEST_CASE("labeling") {
  const auto [nf, chain] = birkhoff::bnf_from_spec(builders::quartic_1d(), 3);
  const auto labeled = birkhoff::generate_resonances(nf, 0.01, 3);
  const auto l2 = birkhoff::generate_resonances(nf, 0.005, 3);
  const auto st = birkhoff::estimate_structure({labeled, l2});

  ResonanceList raw;
  raw.h = labeled.h;
  raw.values = labeled.values;

  SECTION("round trip reproduces the generator labels") {
    const auto lr = birkhoff::label_resonances(raw, st);
    REQUIRE(lr.unmatched.empty());
    REQUIRE(lr.list.labels == labeled.labels);
    REQUIRE(lr.list.values == labeled.values);
  }

  SECTION("spurious deep value is reported unmatched") {
    auto noisy = raw;
    noisy.values.push_back(Cd(0.03, -0.4));  // far below the lattice line
    const auto lr = birkhoff::label_resonances(noisy, st);
    REQUIRE(lr.unmatched.size() == 1);
    REQUIRE(lr.unmatched[0] == Cd(0.03, -0.4));
    REQUIRE(lr.list.labels == labeled.labels);
  }

  SECTION("an interior hole is a hard failure") {
    auto holey = raw;
    holey.values.erase(holey.values.begin() + 1);  // drop k = 1
    REQUIRE_THROWS_AS(birkhoff::label_resonances(holey, st), MathError);
  }

  SECTION("two values on one lattice point collide") {
    auto doubled = raw;
    doubled.values.push_back(doubled.values[0] + Cd(1e-6, 0.0));
    REQUIRE_THROWS_AS(birkhoff::label_resonances(doubled, st), MathError);
  }
}

TEST_CASE("lattice model fit") {
  const auto [nf, chain] = birkhoff::bnf_from_spec(builders::quartic_1d(), 3);
  std::vector<ResonanceList> lists;
  for (double h : {0.02, 0.01, 0.005}) lists.push_back(birkhoff::generate_resonances(nf, h, 8));
  const auto st = birkhoff::estimate_structure(lists);

  SECTION("generator data is reproduced to rounding") {
    const auto [rep, fitted] = birkhoff::fit_normal_form(lists, 3, st);
    REQUIRE(rep.rank == static_cast<int>(rep.num_params));
    REQUIRE(rep.num_data == 27);
    REQUIRE(rep.residual_norm < 1e-10);
    REQUIRE(std::abs(rep.u[0] - 1.0) < 1e-9);
    bool saw2 = false, saw3 = false;
    for (const auto& c : rep.coeffs) {
      if (c.alpha == MultiIndex{2}) {
        REQUIRE(std::abs(c.value - Cd(3.0 / 80.0, 0.0)) < 1e-9);
        saw2 = true;
      }
      if (c.alpha == MultiIndex{3}) {
        REQUIRE(std::abs(c.value - Cd(-17.0 / 6400.0, 0.0)) < 1e-7);
        saw3 = true;
      }
    }
    REQUIRE(saw2);
    REQUIRE(saw3);
    // The per-h corrections absorb the O(h^3) error of the pinned critical
    // value; their contribution to the data stays at rounding scale.
    for (const auto& [h, g] : rep.gamma) REQUIRE(std::abs(g) * h * h < 1e-8);
    REQUIRE(rep.condition >= 1.0);

    fitted.validate();
    REQUIRE(fitted.scaled);
    const auto rec = birkhoff::recover_taylor(fitted, 2);
    REQUIRE(std::abs(rec.coeffs.at(MultiIndex{2}) - 0.1) < 1e-7);
  }

  SECTION("underdetermined fits are rejected") {
    std::vector<ResonanceList> tiny;
    for (double h : {0.02, 0.01}) tiny.push_back(birkhoff::generate_resonances(nf, h, 1));
    const auto st2 = birkhoff::estimate_structure(tiny);
    REQUIRE_THROWS_AS(birkhoff::fit_normal_form(tiny, 3, st2), ValidationError);
  }
}

TEST_CASE("full inversion from generated data") {
  SECTION("single well") {
    const auto [nf, chain] = birkhoff::bnf_from_spec(builders::quartic_1d(), 3);
    std::vector<ResonanceList> lists;
    for (double h : {0.02, 0.01, 0.005}) lists.push_back(birkhoff::generate_resonances(nf, h, 8));
    const auto res = birkhoff::invert_from_resonances(lists, 2);
    REQUIRE(res.spec.n == 1);
    REQUIRE(res.spec.d == 0);
    REQUIRE(std::abs(res.spec.E0) < 1e-7);
    REQUIRE(std::abs(res.spec.u[0] - 1.0) < 1e-7);
    REQUIRE(std::abs(res.spec.coeffs.at(MultiIndex{2}) - 0.1) < 1e-6);
    REQUIRE(res.unmatched_count == 0);
  }

  SECTION("barrier") {
    const auto [nf, chain] = birkhoff::bnf_from_spec(builders::barrier_1d(), 3);
    std::vector<ResonanceList> lists;
    for (double h : {0.02, 0.01, 0.005}) lists.push_back(birkhoff::generate_resonances(nf, h, 8));
    const auto res = birkhoff::invert_from_resonances(lists, 2);
    REQUIRE(res.spec.d == 1);
    REQUIRE(std::abs(res.spec.E0 - 1.0) < 1e-7);
    REQUIRE(std::abs(res.spec.u[0] - 1.0) < 1e-7);
    REQUIRE(std::abs(res.spec.coeffs.at(MultiIndex{2}) - 0.2) < 1e-6);
  }

  SECTION("mixed 2d saddle") {
    const auto [nf, chain] = birkhoff::bnf_from_spec(builders::mixed_2d(), 3);
    std::vector<ResonanceList> lists;
    for (double h : {0.02, 0.01, 0.005}) lists.push_back(birkhoff::generate_resonances(nf, h, 4));
    const auto res = birkhoff::invert_from_resonances(lists, 2);
    REQUIRE(res.spec.n == 2);
    REQUIRE(res.spec.d == 1);
    REQUIRE(std::abs(res.spec.coeffs.at(MultiIndex{2, 0}) - 0.1) < 1e-6);
    REQUIRE(std::abs(res.spec.coeffs.at(MultiIndex{1, 1}) - 0.05) < 1e-6);
    REQUIRE(std::abs(res.spec.coeffs.at(MultiIndex{0, 2}) - 0.1) < 1e-6);
  }
}
