#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bnf.hpp"
#include "coeff.hpp"
#include "errors.hpp"
#include "multi_index.hpp"
#include "poly.hpp"
#include "potential.hpp"
#include "resonance.hpp"

namespace birkhoff {

using Json = nlohmann::json;

namespace detail {

// Exact values travel as "p/q" strings; float values as JSON numbers.
// Readers accept either form in either mode.
template <class S>
Json scalar_to_json(const S& s) {
  if constexpr (std::is_same_v<S, Rational>)
    return rational_to_string(s);
  else
    return s;
}

template <class S>
S scalar_from_json(const Json& j, const std::string& what) {
  if (j.is_string()) {
    Rational r;
    try {
      r = rational_from_string(j.get<std::string>());
    } catch (const Error&) {
      throw ValidationError(what + ": malformed rational string '" + j.get<std::string>() + "'");
    }
    if constexpr (std::is_same_v<S, Rational>)
      return r;
    else
      return rational_to_double(r);
  }
  if (j.is_number()) {
    if constexpr (std::is_same_v<S, Rational>) {
      if (j.is_number_integer()) return Rational(j.get<long long>());
      return rational_from_double(j.get<double>());
    } else {
      return j.get<double>();
    }
  }
  throw ValidationError(what + ": expected a number or a rational string");
}

inline const Json& field(const Json& j, const char* key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(what + ": missing field '" + key + "'");
  return *it;
}

inline MultiIndex index_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + ": exponent list must be an array");
  std::vector<int> e;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ValidationError(what + ": exponents must be integers");
    e.push_back(v.get<int>());
  }
  return MultiIndex(std::move(e));
}

}  // namespace detail

// --- phase polynomials -------------------------------------------------

template <class C>
Json poly_to_json(const PhasePoly<C>& p) {
  using Ops = CoeffOps<C>;
  Json terms = Json::array();
  for (const auto& [k, c] : p.terms()) {
    terms.push_back({{"exp", k.exponents()},
                     {"re", detail::scalar_to_json(Ops::real(c))},
                     {"im", detail::scalar_to_json(Ops::imag(c))}});
  }
  return {{"basis", basis_name(p.basis())}, {"n", p.n()}, {"terms", std::move(terms)}};
}

template <class C>
PhasePoly<C> poly_from_json(const Json& j) {
  using Ops = CoeffOps<C>;
  const std::string what = "polynomial";
  const std::string b = detail::field(j, "basis", what).get<std::string>();
  Basis basis;
  if (b == "real")
    basis = Basis::Real;
  else if (b == "complex")
    basis = Basis::Complex;
  else
    throw ValidationError(what + ": basis must be 'real' or 'complex'");
  const int n = detail::field(j, "n", what).get<int>();
  PhasePoly<C> p(basis, n);
  for (const auto& t : detail::field(j, "terms", what)) {
    MultiIndex k = detail::index_from_json(detail::field(t, "exp", what), what);
    const auto re = detail::scalar_from_json<typename Ops::Scalar>(detail::field(t, "re", what), what);
    const auto im = detail::scalar_from_json<typename Ops::Scalar>(detail::field(t, "im", what), what);
    p.set_term(std::move(k), Ops::from_parts(re, im));
  }
  return p;
}

template <class C>
Json chain_to_json(const CanonicalChain<C>& chain) {
  Json out = Json::array();
  for (const auto& g : chain) out.push_back(poly_to_json(g));
  return out;
}

template <class C>
CanonicalChain<C> chain_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("generator chain: expected an array");
  CanonicalChain<C> chain;
  for (const auto& g : j) chain.push_back(poly_from_json<C>(g));
  return chain;
}

// --- potential specifications -------------------------------------------

template <class S>
Json spec_to_json(const PotentialSpec<S>& s) {
  Json coeffs = Json::array();
  for (const auto& [alpha, c] : s.coeffs)
    coeffs.push_back({{"alpha", alpha.exponents()}, {"c", detail::scalar_to_json(c)}});
  Json u = Json::array();
  for (const auto& uj : s.u) u.push_back(detail::scalar_to_json(uj));
  return {{"n", s.n},
          {"d", s.d},
          {"E0", detail::scalar_to_json(s.E0)},
          {"u", std::move(u)},
          {"coeffs", std::move(coeffs)}};
}

template <class S>
PotentialSpec<S> spec_from_json(const Json& j) {
  const std::string what = "potential spec";
  PotentialSpec<S> s;
  s.n = detail::field(j, "n", what).get<int>();
  s.d = detail::field(j, "d", what).get<int>();
  s.E0 = detail::scalar_from_json<S>(detail::field(j, "E0", what), what + ": E0");
  for (const auto& uj : detail::field(j, "u", what))
    s.u.push_back(detail::scalar_from_json<S>(uj, what + ": u"));
  for (const auto& t : detail::field(j, "coeffs", what)) {
    MultiIndex alpha = detail::index_from_json(detail::field(t, "alpha", what), what);
    const S c = detail::scalar_from_json<S>(detail::field(t, "c", what), what + ": c");
    if (s.coeffs.count(alpha)) throw ValidationError(what + ": duplicate coefficient index");
    s.coeffs.emplace(std::move(alpha), c);
  }
  s.validate();
  return s;
}

// --- normal forms ---------------------------------------------------------

template <class C>
Json normal_form_to_json(const NormalForm<C>& nf) {
  using Ops = CoeffOps<C>;
  Json actions = Json::array();
  for (int N = 2; N <= nf.order; ++N) {
    Json terms = Json::array();
    for (const auto& [alpha, c] : nf.action(N).terms())
      terms.push_back({{"alpha", alpha.exponents()},
                       {"re", detail::scalar_to_json(Ops::real(c))},
                       {"im", detail::scalar_to_json(Ops::imag(c))}});
    actions.push_back({{"N", N}, {"terms", std::move(terms)}});
  }
  Json u = Json::array();
  for (const auto& uj : nf.u) u.push_back(detail::scalar_to_json(uj));
  return {{"n", nf.n},
          {"d", nf.d},
          {"E0", detail::scalar_to_json(nf.E0)},
          {"u", std::move(u)},
          {"scaled", nf.scaled},
          {"actions", std::move(actions)}};
}

template <class C>
NormalForm<C> normal_form_from_json(const Json& j) {
  using Ops = CoeffOps<C>;
  using S = typename Ops::Scalar;
  const std::string what = "normal form";
  NormalForm<C> nf;
  nf.n = detail::field(j, "n", what).get<int>();
  nf.d = detail::field(j, "d", what).get<int>();
  nf.E0 = detail::scalar_from_json<S>(detail::field(j, "E0", what), what + ": E0");
  for (const auto& uj : detail::field(j, "u", what))
    nf.u.push_back(detail::scalar_from_json<S>(uj, what + ": u"));
  nf.scaled = detail::field(j, "scaled", what).get<bool>();
  const Json& actions = detail::field(j, "actions", what);
  nf.order = static_cast<int>(actions.size()) + 1;
  int expect = 2;
  for (const auto& a : actions) {
    if (detail::field(a, "N", what).get<int>() != expect)
      throw ValidationError(what + ": action degrees must run 2..order without holes");
    ActionPoly<C> h(nf.n);
    for (const auto& t : detail::field(a, "terms", what)) {
      MultiIndex alpha = detail::index_from_json(detail::field(t, "alpha", what), what);
      const auto re = detail::scalar_from_json<S>(detail::field(t, "re", what), what);
      const auto im = detail::scalar_from_json<S>(detail::field(t, "im", what), what);
      h.set_term(std::move(alpha), Ops::from_parts(re, im));
    }
    nf.actions.push_back(std::move(h));
    ++expect;
  }
  nf.validate();
  return nf;
}

// --- resonance lists --------------------------------------------------

inline Json resonances_to_json(const ResonanceList& list) {
  Json values = Json::array();
  for (const auto& v : list.values) values.push_back({{"re", v.real()}, {"im", v.imag()}});
  Json out = {{"h", list.h}, {"values", std::move(values)}};
  if (list.labeled()) {
    Json labels = Json::array();
    for (const auto& k : list.labels) labels.push_back(k.exponents());
    out["labels"] = std::move(labels);
  }
  return out;
}

inline ResonanceList resonances_from_json(const Json& j) {
  const std::string what = "resonance list";
  ResonanceList list;
  list.h = detail::scalar_from_json<double>(detail::field(j, "h", what), what + ": h");
  for (const auto& v : detail::field(j, "values", what)) {
    const double re = detail::scalar_from_json<double>(detail::field(v, "re", what), what);
    const double im = detail::scalar_from_json<double>(detail::field(v, "im", what), what);
    list.values.emplace_back(re, im);
  }
  if (j.count("labels"))
    for (const auto& k : j.at("labels")) list.labels.push_back(detail::index_from_json(k, what));
  list.validate();
  return list;
}

// --- fit reports ------------------------------------------------------

inline Json fit_report_to_json(const FitReport& r) {
  Json coeffs = Json::array();
  for (const auto& c : r.coeffs)
    coeffs.push_back({{"alpha", c.alpha.exponents()},
                      {"re", c.value.real()},
                      {"im", c.value.imag()},
                      {"se", c.se}});
  Json omega = Json::array();
  for (const auto& w : r.omega) omega.push_back({{"re", w.real()}, {"im", w.imag()}});
  Json gamma = Json::array();
  for (const auto& [h, g] : r.gamma)
    gamma.push_back({{"h", h}, {"re", g.real()}, {"im", g.imag()}});
  Json residuals = Json::array();
  for (const auto& block : r.residuals) {
    Json rb = Json::array();
    for (const auto& v : block) rb.push_back({{"re", v.real()}, {"im", v.imag()}});
    residuals.push_back(std::move(rb));
  }
  return {{"E0", r.E0},
          {"n", r.n},
          {"d", r.d},
          {"order", r.order},
          {"u", r.u},
          {"omega", std::move(omega)},
          {"omega_se", r.omega_se},
          {"coeffs", std::move(coeffs)},
          {"gamma", std::move(gamma)},
          {"residuals", std::move(residuals)},
          {"residual_norm", r.residual_norm},
          {"condition", r.condition},
          {"rank", r.rank},
          {"num_data", r.num_data},
          {"num_params", r.num_params}};
}

// --- files --------------------------------------------------------------

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open file for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace birkhoff
