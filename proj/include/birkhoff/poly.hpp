#pragma once

#include <algorithm>
#include <cstdlib>
#include <iterator>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coeff.hpp"
#include "errors.hpp"
#include "multi_index.hpp"

namespace birkhoff {

// Which coordinates a phase-space polynomial is written in.
//   Real:    variables 0..n-1 are x_j, variables n..2n-1 are xi_j.
//   Complex: variables 0..n-1 are z_j = x_j + i*xi_j, n..2n-1 are zbar_j.
enum class Basis { Real, Complex };

inline const char* basis_name(Basis b) { return b == Basis::Real ? "real" : "complex"; }

// Memory guard, overridable via the BNF_MAX_TERMS environment variable.
inline std::size_t term_limit() {
  static const std::size_t cap = [] {
    if (const char* s = std::getenv("BNF_MAX_TERMS")) {
      const long v = std::atol(s);
      if (v > 0) return static_cast<std::size_t>(v);
    }
    return static_cast<std::size_t>(4'000'000);
  }();
  return cap;
}

namespace detail {

// Relative pruning threshold for float coefficients.
inline constexpr double kFloatPrune = 1e-14;

template <class C>
void add_term_into(std::map<MultiIndex, C, GradedLex>& m, const MultiIndex& k, const C& c) {
  auto [it, inserted] = m.try_emplace(k, c);
  if (!inserted) it->second += c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sparse polynomial on phase space (2n variables), complex coefficients.
// Values are immutable in spirit: every operation returns a fresh polynomial
// and no stored zero coefficients survive normalize().
// ---------------------------------------------------------------------------
template <class C>
class PhasePoly {
 public:
  using Ops = CoeffOps<C>;
  using TermMap = std::map<MultiIndex, C, GradedLex>;

  PhasePoly() = default;
  PhasePoly(Basis basis, int n) : basis_(basis), n_(n) {
    if (n <= 0) throw ValidationError("PhasePoly: dimension must be positive");
  }

  static PhasePoly zero(Basis basis, int n) { return PhasePoly(basis, n); }

  static PhasePoly constant(Basis basis, int n, C c) {
    PhasePoly p(basis, n);
    p.set_term(MultiIndex(static_cast<std::size_t>(2 * n)), std::move(c));
    return p;
  }

  static PhasePoly variable(Basis basis, int n, std::size_t var) {
    PhasePoly p(basis, n);
    if (var >= static_cast<std::size_t>(2 * n)) throw ValidationError("PhasePoly: variable index out of range");
    p.set_term(MultiIndex::unit(static_cast<std::size_t>(2 * n), var), Ops::one());
    return p;
  }

  static PhasePoly monomial(Basis basis, int n, MultiIndex idx, C c) {
    PhasePoly p(basis, n);
    p.set_term(std::move(idx), std::move(c));
    return p;
  }

  Basis basis() const { return basis_; }
  int n() const { return n_; }
  std::size_t var_count() const { return static_cast<std::size_t>(2 * n_); }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

  // Total degree; -1 for the zero polynomial.
  int degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }
  int min_degree() const { return terms_.empty() ? -1 : terms_.begin()->first.degree(); }

  C coeff(const MultiIndex& idx) const {
    if (idx.size() != var_count()) throw ValidationError("PhasePoly: exponent length must be 2n");
    auto it = terms_.find(idx);
    return it == terms_.end() ? Ops::zero() : it->second;
  }

  // Accumulates; zero results are pruned lazily by normalize().
  void set_term(MultiIndex idx, C c) {
    if (idx.size() != var_count()) throw ValidationError("PhasePoly: exponent length must be 2n");
    if (!idx.all_nonnegative()) throw ValidationError("PhasePoly: negative exponent");
    detail::add_term_into(terms_, idx, c);
    normalize();
  }

  void normalize() {
    if constexpr (Ops::exact) {
      for (auto it = terms_.begin(); it != terms_.end();)
        it = Ops::is_zero(it->second) ? terms_.erase(it) : std::next(it);
    } else {
      double maxabs = 0.0;
      for (const auto& [k, c] : terms_) maxabs = std::max(maxabs, Ops::abs_approx(c));
      const double cutoff = detail::kFloatPrune * maxabs;
      for (auto it = terms_.begin(); it != terms_.end();)
        it = (Ops::abs_approx(it->second) <= cutoff) ? terms_.erase(it) : std::next(it);
    }
  }

  PhasePoly homogeneous_part(int deg) const {
    PhasePoly out(basis_, n_);
    for (const auto& [k, c] : terms_) {
      const int d = k.degree();
      if (d > deg) break;  // graded order
      if (d == deg) out.terms_.emplace(k, c);
    }
    return out;
  }

  PhasePoly truncated(int maxdeg) const {
    PhasePoly out(basis_, n_);
    for (const auto& [k, c] : terms_) {
      if (k.degree() > maxdeg) break;
      out.terms_.emplace(k, c);
    }
    return out;
  }

  // a_j + b_j even for every coordinate j (pairing variable j with j+n).
  bool even_per_coordinate() const {
    for (const auto& [k, c] : terms_)
      for (int j = 0; j < n_; ++j)
        if ((k[j] + k[j + n_]) % 2 != 0) return false;
    return true;
  }

  PhasePoly operator-() const {
    PhasePoly out(basis_, n_);
    for (const auto& [k, c] : terms_) out.terms_.emplace(k, -c);
    return out;
  }

  PhasePoly& operator+=(const PhasePoly& o) {
    check_compatible(o);
    for (const auto& [k, c] : o.terms_) detail::add_term_into(terms_, k, c);
    normalize();
    return *this;
  }
  PhasePoly& operator-=(const PhasePoly& o) {
    check_compatible(o);
    for (const auto& [k, c] : o.terms_) detail::add_term_into(terms_, k, -c);
    normalize();
    return *this;
  }
  friend PhasePoly operator+(PhasePoly a, const PhasePoly& b) { return a += b; }
  friend PhasePoly operator-(PhasePoly a, const PhasePoly& b) { return a -= b; }

  PhasePoly& operator*=(const C& s) {
    for (auto& [k, c] : terms_) c *= s;
    normalize();
    return *this;
  }
  friend PhasePoly operator*(PhasePoly p, const C& s) { return p *= s; }
  friend PhasePoly operator*(const C& s, PhasePoly p) { return p *= s; }

  bool operator==(const PhasePoly& o) const {
    return basis_ == o.basis_ && n_ == o.n_ && terms_ == o.terms_;
  }

  // Horner-style evaluation: nested single-variable Horner over a
  // lexicographic arrangement of the terms.
  C evaluate(const std::vector<C>& point) const {
    if (point.size() != var_count()) throw ValidationError("evaluate: point has wrong dimension");
    if (terms_.empty()) return Ops::zero();
    std::vector<const std::pair<const MultiIndex, C>*> ts;
    ts.reserve(terms_.size());
    for (const auto& t : terms_) ts.push_back(&t);
    std::sort(ts.begin(), ts.end(), [](const auto* a, const auto* b) {
      return a->first.exponents() < b->first.exponents();
    });
    return eval_rec(ts, 0, ts.size(), 0, point);
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [k, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += "(" + coeff_str(c) + ")";
      for (std::size_t v = 0; v < k.size(); ++v)
        if (k[v] != 0) s += "*" + var_name(v) + (k[v] == 1 ? "" : "^" + std::to_string(k[v]));
    }
    return s;
  }

  void check_compatible(const PhasePoly& o) const {
    if (basis_ != o.basis_ || n_ != o.n_)
      throw ValidationError("polynomial basis/dimension mismatch");
  }

  // Internal: bulk accumulation without re-validation (used by free ops).
  TermMap& raw_terms() { return terms_; }

 private:
  static std::string coeff_str(const C& c) {
    if constexpr (Ops::exact) {
      return c.str();
    } else {
      return std::to_string(c.real()) + (c.imag() == 0 ? "" : "+" + std::to_string(c.imag()) + "i");
    }
  }

  std::string var_name(std::size_t v) const {
    const bool second = v >= static_cast<std::size_t>(n_);
    const std::size_t j = second ? v - n_ : v;
    const char* base = basis_ == Basis::Real ? (second ? "xi" : "x") : (second ? "zb" : "z");
    return std::string(base) + std::to_string(j + 1);
  }

  static C pow_c(const C& x, int e, const C& one) {
    C r = one;
    for (int i = 0; i < e; ++i) r = r * x;
    return r;
  }

  C eval_rec(const std::vector<const std::pair<const MultiIndex, C>*>& ts, std::size_t lo,
             std::size_t hi, std::size_t var, const std::vector<C>& point) const {
    if (var == var_count()) return ts[lo]->second;
    C acc = Ops::zero();
    int prev_e = -1;
    std::size_t idx = hi;
    while (idx > lo) {
      const int e = ts[idx - 1]->first[var];
      std::size_t gs = idx;
      while (gs > lo && ts[gs - 1]->first[var] == e) --gs;
      const C part = eval_rec(ts, gs, idx, var + 1, point);
      if (prev_e < 0)
        acc = part;
      else
        acc = acc * pow_c(point[var], prev_e - e, Ops::one()) + part;
      prev_e = e;
      idx = gs;
    }
    return acc * pow_c(point[var], prev_e, Ops::one());
  }

  Basis basis_ = Basis::Real;
  int n_ = 0;
  TermMap terms_;
};

// ---------------------------------------------------------------------------
// Free operations
// ---------------------------------------------------------------------------

// Product truncated at total degree maxdeg (maxdeg < 0: no truncation).
template <class C>
PhasePoly<C> mul(const PhasePoly<C>& f, const PhasePoly<C>& g, int maxdeg = -1) {
  f.check_compatible(g);
  PhasePoly<C> out(f.basis(), f.n());
  auto& acc = out.raw_terms();
  for (const auto& [ka, ca] : f.terms()) {
    const int da = ka.degree();
    if (maxdeg >= 0 && da > maxdeg) break;
    for (const auto& [kb, cb] : g.terms()) {
      if (maxdeg >= 0 && da + kb.degree() > maxdeg) break;  // graded order
      detail::add_term_into(acc, ka + kb, ca * cb);
    }
    if (acc.size() > term_limit())
      throw LimitError("polynomial term limit exceeded (BNF_MAX_TERMS)");
  }
  out.normalize();
  return out;
}

template <class C>
PhasePoly<C> operator*(const PhasePoly<C>& f, const PhasePoly<C>& g) {
  return mul(f, g);
}

template <class C>
PhasePoly<C> differentiate(const PhasePoly<C>& f, std::size_t var) {
  if (var >= f.var_count()) throw ValidationError("differentiate: variable out of range");
  PhasePoly<C> out(f.basis(), f.n());
  auto& acc = out.raw_terms();
  for (const auto& [k, c] : f.terms()) {
    const int e = k[var];
    if (e == 0) continue;
    MultiIndex k2 = k;
    k2[var] = e - 1;
    acc.emplace(std::move(k2), c * CoeffOps<C>::from_int(e));
  }
  out.normalize();
  return out;
}

// Poisson bracket with the sign convention
//   {f,g} = sum_j (df/dxi_j dg/dx_j - df/dx_j dg/dxi_j),
// so {H, .} is the Hamiltonian vector field of H acting as a derivation and
// {xi_j, x_j} = +1.  In complex coordinates the same bracket reads
//   {f,g} = 2i sum_j (df/dz_j dg/dzbar_j - df/dzbar_j dg/dz_j).
template <class C>
PhasePoly<C> poisson_bracket(const PhasePoly<C>& f, const PhasePoly<C>& g, int maxdeg = -1) {
  f.check_compatible(g);
  const int n = f.n();
  PhasePoly<C> out(f.basis(), n);
  if (f.is_zero() || g.is_zero()) return out;
  for (int j = 0; j < n; ++j) {
    const std::size_t a = static_cast<std::size_t>(j);
    const std::size_t b = static_cast<std::size_t>(j + n);
    if (f.basis() == Basis::Real) {
      out += mul(differentiate(f, b), differentiate(g, a), maxdeg);
      out -= mul(differentiate(f, a), differentiate(g, b), maxdeg);
    } else {
      PhasePoly<C> t = mul(differentiate(f, a), differentiate(g, b), maxdeg);
      t -= mul(differentiate(f, b), differentiate(g, a), maxdeg);
      t *= CoeffOps<C>::from_parts(typename CoeffOps<C>::Scalar(0), typename CoeffOps<C>::Scalar(2));
      out += t;
    }
  }
  return out;
}

// Substitutes images[v] for variable v; images live in target_basis.
template <class C>
PhasePoly<C> compose_linear(const PhasePoly<C>& f, const std::vector<PhasePoly<C>>& images,
                            Basis target_basis, int maxdeg = -1) {
  if (images.size() != f.var_count())
    throw ValidationError("compose_linear: need one image per variable");
  const int n = f.n();
  // Powers of each image, up to the maximum exponent used.
  std::vector<int> maxe(f.var_count(), 0);
  for (const auto& [k, c] : f.terms())
    for (std::size_t v = 0; v < f.var_count(); ++v) maxe[v] = std::max(maxe[v], k[v]);
  std::vector<std::vector<PhasePoly<C>>> pows(f.var_count());
  for (std::size_t v = 0; v < f.var_count(); ++v) {
    pows[v].push_back(PhasePoly<C>::constant(target_basis, n, CoeffOps<C>::one()));
    for (int e = 1; e <= maxe[v]; ++e) pows[v].push_back(mul(pows[v].back(), images[v], maxdeg));
  }
  PhasePoly<C> out(target_basis, n);
  for (const auto& [k, c] : f.terms()) {
    PhasePoly<C> prod = PhasePoly<C>::constant(target_basis, n, c);
    for (std::size_t v = 0; v < f.var_count(); ++v)
      if (k[v] > 0) prod = mul(prod, pows[v][static_cast<std::size_t>(k[v])], maxdeg);
    out += prod;
    if (out.term_count() > term_limit())
      throw LimitError("polynomial term limit exceeded (BNF_MAX_TERMS)");
  }
  return out;
}

// Exact composition with an invertible linear map on the 2n variables:
// variable v is replaced by sum_w M[v][w] * variable_w.
template <class C>
PhasePoly<C> substitute_linear(const PhasePoly<C>& f, const std::vector<std::vector<C>>& m) {
  const std::size_t nv = f.var_count();
  if (m.size() != nv) throw ValidationError("substitute_linear: matrix must be 2n x 2n");
  for (const auto& row : m)
    if (row.size() != nv) throw ValidationError("substitute_linear: matrix must be 2n x 2n");

  // Invertibility via Gaussian elimination (exact in exact mode).
  {
    auto a = m;
    double maxabs = 0.0;
    for (const auto& row : a)
      for (const auto& c : row) maxabs = std::max(maxabs, CoeffOps<C>::abs_approx(c));
    for (std::size_t col = 0; col < nv; ++col) {
      std::size_t piv = col;
      double best = -1.0;
      for (std::size_t r = col; r < nv; ++r) {
        const double v = CoeffOps<C>::abs_approx(a[r][col]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      const bool singular = CoeffOps<C>::exact ? CoeffOps<C>::is_zero(a[piv][col])
                                               : best <= 1e-12 * std::max(maxabs, 1e-300);
      if (singular) throw ValidationError("substitute_linear: singular matrix");
      std::swap(a[piv], a[col]);
      for (std::size_t r = col + 1; r < nv; ++r) {
        if (CoeffOps<C>::is_zero(a[r][col])) continue;
        const C factor = a[r][col] / a[col][col];
        for (std::size_t cc = col; cc < nv; ++cc) a[r][cc] -= factor * a[col][cc];
      }
    }
  }

  std::vector<PhasePoly<C>> images;
  images.reserve(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    PhasePoly<C> img(f.basis(), f.n());
    for (std::size_t w = 0; w < nv; ++w)
      if (!CoeffOps<C>::is_zero(m[v][w])) img.set_term(MultiIndex::unit(nv, w), m[v][w]);
    images.push_back(std::move(img));
  }
  return compose_linear(f, images, f.basis());
}

// Exact substitution z_j = x_j + i xi_j, zbar_j = x_j - i xi_j (and inverse).
template <class C>
PhasePoly<C> to_complex(const PhasePoly<C>& f) {
  if (f.basis() != Basis::Real) throw ValidationError("to_complex: input must be in the real basis");
  using Ops = CoeffOps<C>;
  const int n = f.n();
  const std::size_t nv = f.var_count();
  const C half = Ops::one() / Ops::from_int(2);
  const C ihalf = Ops::imag_unit() * half;
  std::vector<PhasePoly<C>> images;
  images.reserve(nv);
  for (int j = 0; j < n; ++j) {  // x_j = (z_j + zbar_j)/2
    PhasePoly<C> img(Basis::Complex, n);
    img.set_term(MultiIndex::unit(nv, static_cast<std::size_t>(j)), half);
    img.set_term(MultiIndex::unit(nv, static_cast<std::size_t>(j + n)), half);
    images.push_back(std::move(img));
  }
  for (int j = 0; j < n; ++j) {  // xi_j = (z_j - zbar_j)/(2i) = -i/2 z_j + i/2 zbar_j
    PhasePoly<C> img(Basis::Complex, n);
    img.set_term(MultiIndex::unit(nv, static_cast<std::size_t>(j)), -ihalf);
    img.set_term(MultiIndex::unit(nv, static_cast<std::size_t>(j + n)), ihalf);
    images.push_back(std::move(img));
  }
  return compose_linear(f, images, Basis::Complex);
}

template <class C>
PhasePoly<C> to_real(const PhasePoly<C>& f) {
  if (f.basis() != Basis::Complex) throw ValidationError("to_real: input must be in the complex basis");
  using Ops = CoeffOps<C>;
  const int n = f.n();
  const std::size_t nv = f.var_count();
  const C i = Ops::imag_unit();
  std::vector<PhasePoly<C>> images;
  images.reserve(nv);
  for (int j = 0; j < n; ++j) {  // z_j = x_j + i xi_j
    PhasePoly<C> img(Basis::Real, n);
    img.set_term(MultiIndex::unit(nv, static_cast<std::size_t>(j)), Ops::one());
    img.set_term(MultiIndex::unit(nv, static_cast<std::size_t>(j + n)), i);
    images.push_back(std::move(img));
  }
  for (int j = 0; j < n; ++j) {  // zbar_j = x_j - i xi_j
    PhasePoly<C> img(Basis::Real, n);
    img.set_term(MultiIndex::unit(nv, static_cast<std::size_t>(j)), Ops::one());
    img.set_term(MultiIndex::unit(nv, static_cast<std::size_t>(j + n)), -i);
    images.push_back(std::move(img));
  }
  return compose_linear(f, images, Basis::Real);
}

template <class To, class From>
PhasePoly<To> poly_convert(const PhasePoly<From>& f) {
  PhasePoly<To> out(f.basis(), f.n());
  for (const auto& [k, c] : f.terms()) out.set_term(k, coeff_convert<To>(c));
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial in the n action variables iota_j = xi_j^2 + x_j^2.
// ---------------------------------------------------------------------------
template <class C>
class ActionPoly {
 public:
  using Ops = CoeffOps<C>;
  using TermMap = std::map<MultiIndex, C, GradedLex>;

  ActionPoly() = default;
  explicit ActionPoly(int n) : n_(n) {
    if (n <= 0) throw ValidationError("ActionPoly: dimension must be positive");
  }

  int n() const { return n_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

  C coeff(const MultiIndex& alpha) const {
    if (alpha.size() != static_cast<std::size_t>(n_))
      throw ValidationError("ActionPoly: exponent length must be n");
    auto it = terms_.find(alpha);
    return it == terms_.end() ? Ops::zero() : it->second;
  }

  void set_term(MultiIndex alpha, C c) {
    if (alpha.size() != static_cast<std::size_t>(n_))
      throw ValidationError("ActionPoly: exponent length must be n");
    if (!alpha.all_nonnegative()) throw ValidationError("ActionPoly: negative exponent");
    detail::add_term_into(terms_, alpha, c);
    normalize();
  }

  void normalize() {
    if constexpr (Ops::exact) {
      for (auto it = terms_.begin(); it != terms_.end();)
        it = Ops::is_zero(it->second) ? terms_.erase(it) : std::next(it);
    } else {
      double maxabs = 0.0;
      for (const auto& [k, c] : terms_) maxabs = std::max(maxabs, Ops::abs_approx(c));
      const double cutoff = detail::kFloatPrune * maxabs;
      for (auto it = terms_.begin(); it != terms_.end();)
        it = (Ops::abs_approx(it->second) <= cutoff) ? terms_.erase(it) : std::next(it);
    }
  }

  ActionPoly operator-() const {
    ActionPoly out(n_);
    for (const auto& [k, c] : terms_) out.terms_.emplace(k, -c);
    return out;
  }
  ActionPoly& operator+=(const ActionPoly& o) {
    if (n_ != o.n_) throw ValidationError("ActionPoly dimension mismatch");
    for (const auto& [k, c] : o.terms_) detail::add_term_into(terms_, k, c);
    normalize();
    return *this;
  }
  ActionPoly& operator-=(const ActionPoly& o) { return *this += -o; }
  friend ActionPoly operator+(ActionPoly a, const ActionPoly& b) { return a += b; }
  friend ActionPoly operator-(ActionPoly a, const ActionPoly& b) { return a -= b; }
  bool operator==(const ActionPoly& o) const { return n_ == o.n_ && terms_ == o.terms_; }

  C evaluate(const std::vector<C>& iota) const {
    if (iota.size() != static_cast<std::size_t>(n_))
      throw ValidationError("ActionPoly::evaluate: point has wrong dimension");
    C sum = Ops::zero();
    for (const auto& [k, c] : terms_) {
      C t = c;
      for (int j = 0; j < n_; ++j)
        for (int e = 0; e < k[static_cast<std::size_t>(j)]; ++e) t *= iota[static_cast<std::size_t>(j)];
      sum += t;
    }
    return sum;
  }

  // iota^alpha -> z^alpha zbar^alpha.
  PhasePoly<C> as_phase() const {
    PhasePoly<C> out(Basis::Complex, n_);
    for (const auto& [k, c] : terms_) {
      std::vector<int> e(static_cast<std::size_t>(2 * n_), 0);
      for (int j = 0; j < n_; ++j) {
        e[static_cast<std::size_t>(j)] = k[static_cast<std::size_t>(j)];
        e[static_cast<std::size_t>(j + n_)] = k[static_cast<std::size_t>(j)];
      }
      out.set_term(MultiIndex(std::move(e)), c);
    }
    return out;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [k, c] : terms_) {
      if (!s.empty()) s += " + ";
      if constexpr (Ops::exact)
        s += "(" + c.str() + ")";
      else
        s += "(" + std::to_string(c.real()) + "+" + std::to_string(c.imag()) + "i)";
      s += "*iota^" + k.str();
    }
    return s;
  }

 private:
  int n_ = 0;
  TermMap terms_;
};

template <class To, class From>
ActionPoly<To> action_convert(const ActionPoly<From>& f) {
  ActionPoly<To> out(f.n());
  for (const auto& [k, c] : f.terms()) out.set_term(k, coeff_convert<To>(c));
  return out;
}

}  // namespace birkhoff
