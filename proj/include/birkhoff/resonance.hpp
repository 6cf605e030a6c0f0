#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bnf.hpp"
#include "coeff.hpp"
#include "errors.hpp"
#include "multi_index.hpp"
#include "poly.hpp"
#include "potential.hpp"
#include "recovery.hpp"

namespace birkhoff {

using Complexd = std::complex<double>;

// One batch of resonance data at a fixed semiclassical parameter h; labels,
// when present, align with values and index the lattice k in N^n.
struct ResonanceList {
  double h = 0.0;
  std::vector<Complexd> values;
  std::vector<MultiIndex> labels;

  bool labeled() const { return !labels.empty(); }

  void validate(int n_expected = 0) const {
    if (!(h > 0.0)) throw ValidationError("resonance list: h must be positive");
    if (!labels.empty()) {
      if (labels.size() != values.size())
        throw ValidationError("resonance list: labels must align with values");
      std::set<std::vector<int>> seen;
      for (const auto& k : labels) {
        if (n_expected > 0 && k.size() != static_cast<std::size_t>(n_expected))
          throw ValidationError("resonance list: label dimension mismatch");
        if (!k.all_nonnegative()) throw ValidationError("resonance list: labels must be in N^n");
        if (!seen.insert(k.exponents()).second)
          throw ValidationError("resonance list: duplicate label");
      }
      const double imtol = 0.01 * h + 1e-9;
      for (const auto& v : values)
        if (v.imag() > imtol)
          throw ValidationError("resonance list: labeled value above the real axis");
    }
  }
};

// The disc radius |2k+1|h ~ h^delta implied by a K cutoff.
inline double implied_delta(double h, int kmax) {
  if (!(h > 0.0) || h >= 1.0 || kmax < 0) return 1.0;
  return std::log((2.0 * kmax + 1.0) * h) / std::log(h);
}

// value(k) = E0 + sum_j omega_j iota_j + sum_N h_N(iota) at iota_j = (2k_j+1)h,
// in the scaled picture (the classical part of the lattice formula).
template <class C>
ResonanceList generate_resonances(const NormalForm<C>& nf_in, double h, int kmax) {
  nf_in.validate();
  if (!(h > 0.0)) throw ValidationError("generate_resonances: h must be positive");
  if (kmax < 0) throw ValidationError("generate_resonances: K must be nonnegative");
  const NormalForm<Complexd> nf = detail::as_scaled(normal_form_convert<Complexd>(nf_in));
  const int n = nf.n;

  std::vector<Complexd> omega;
  omega.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double uj = nf.u[static_cast<std::size_t>(j)];
    omega.push_back(j < n - nf.d ? Complexd(uj, 0.0) : Complexd(0.0, -uj));
  }

  ResonanceList out;
  out.h = h;
  std::vector<int> k(static_cast<std::size_t>(n), 0);
  while (true) {
    std::vector<Complexd> iota(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) iota[static_cast<std::size_t>(j)] = (2.0 * k[static_cast<std::size_t>(j)] + 1.0) * h;
    Complexd v(nf.E0, 0.0);
    for (int j = 0; j < n; ++j) v += omega[static_cast<std::size_t>(j)] * iota[static_cast<std::size_t>(j)];
    for (const auto& hN : nf.actions) v += hN.evaluate(iota);
    out.values.push_back(v);
    out.labels.emplace_back(k);

    int j = n - 1;
    while (j >= 0 && k[static_cast<std::size_t>(j)] == kmax) k[static_cast<std::size_t>(j--)] = 0;
    if (j < 0) break;
    ++k[static_cast<std::size_t>(j)];
  }
  return out;
}

// Structure read off from raw lists: critical value, signature, frequencies,
// in the canonical coordinate order (elliptic ascending, then hyperbolic
// ascending).
struct StructureEstimate {
  double E0 = 0.0;
  int n = 0;
  int d = 0;
  std::vector<double> u;
  std::vector<Complexd> omega;        // extrapolated scaled frequencies
  std::vector<double> hs;             // the h values used, ascending
  std::vector<Complexd> grounds;      // ground value per h
  double E0_im_residual = 0.0;

  std::vector<Complexd> lattice_omega() const {
    std::vector<Complexd> w;
    for (int j = 0; j < n; ++j) {
      const double uj = u[static_cast<std::size_t>(j)];
      w.push_back(j < n - d ? Complexd(uj, 0.0) : Complexd(0.0, -uj));
    }
    return w;
  }
};

namespace detail {

// Least-squares polynomial fit in powers of x, complex values; returns the
// coefficient vector c_0..c_deg.
inline std::vector<Complexd> polyfit(const std::vector<double>& xs, const std::vector<Complexd>& ys,
                                     int deg) {
  const int m = static_cast<int>(xs.size());
  Eigen::MatrixXd v(m, deg + 1);
  Eigen::VectorXd br(m), bi(m);
  for (int i = 0; i < m; ++i) {
    double p = 1.0;
    for (int jd = 0; jd <= deg; ++jd) {
      v(i, jd) = p;
      p *= xs[static_cast<std::size_t>(i)];
    }
    br(i) = ys[static_cast<std::size_t>(i)].real();
    bi(i) = ys[static_cast<std::size_t>(i)].imag();
  }
  const auto qr = v.colPivHouseholderQr();
  Eigen::VectorXd cr = qr.solve(br), ci = qr.solve(bi);
  std::vector<Complexd> c;
  for (int jd = 0; jd <= deg; ++jd) c.emplace_back(cr(jd), ci(jd));
  return c;
}

// Is dv a nonnegative integer combination of the generators within tol?
inline bool representable(Complexd dv, const std::vector<Complexd>& gens, double tol,
                          std::size_t idx = 0) {
  if (idx == gens.size()) return std::abs(dv) <= tol;
  const double gm = std::abs(gens[idx]);
  const int mmax = gm > 0 ? static_cast<int>(std::abs(dv) / gm) + 2 : 0;
  for (int m = 0; m <= mmax; ++m)
    if (representable(dv - static_cast<double>(m) * gens[idx], gens, tol, idx + 1)) return true;
  return false;
}

// Ground value: all lattice increments raise Re (elliptic) or |Im|
// (hyperbolic) by 2 u_j h at leading order, so Re + |Im| is minimized at k=0.
inline std::size_t ground_index(const std::vector<Complexd>& values) {
  if (values.empty()) throw ValidationError("resonance list: no values");
  std::size_t best = 0;
  double score = values[0].real() + std::abs(values[0].imag());
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double s = values[i].real() + std::abs(values[i].imag());
    if (s < score) {
      score = s;
      best = i;
    }
  }
  return best;
}

// Smallest deviations from the ground that are not N-combinations of the
// already-accepted generators; tolerance widens with the deviation size to
// absorb O(h^2) lattice distortion.
inline std::vector<Complexd> find_generators(const std::vector<Complexd>& values,
                                             std::size_t ground) {
  std::vector<Complexd> devs;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (i != ground) devs.push_back(values[i] - values[ground]);
  std::sort(devs.begin(), devs.end(),
            [](Complexd a, Complexd b) { return std::abs(a) < std::abs(b); });
  std::vector<Complexd> gens;
  for (const Complexd& dv : devs) {
    if (gens.empty()) {
      if (std::abs(dv) > 0.0) gens.push_back(dv);
      continue;
    }
    double gmin = std::abs(gens[0]);
    for (const auto& g : gens) gmin = std::min(gmin, std::abs(g));
    const double tol = 0.2 * gmin + 0.05 * std::abs(dv);
    if (!representable(dv, gens, tol)) {
      gens.push_back(dv);
      if (gens.size() > 8)
        throw MathError("estimate_structure: could not identify a low-rank lattice");
    }
  }
  return gens;
}

struct GenClass {
  bool hyperbolic = false;
  double u = 0.0;
  Complexd omega;
};

inline GenClass classify_generator(Complexd w) {
  GenClass g;
  g.omega = w;
  g.hyperbolic = std::abs(w.imag()) > std::abs(w.real());
  g.u = g.hyperbolic ? -w.imag() : w.real();
  return g;
}

}  // namespace detail

// Reads (E0, d, u) off raw lists at several h: the ground value extrapolates
// to E0, the ground-to-first-excited gaps are 2 omega_j h.
inline StructureEstimate estimate_structure(const std::vector<ResonanceList>& lists_in) {
  std::vector<ResonanceList> lists = lists_in;
  for (const auto& l : lists) l.validate();
  std::sort(lists.begin(), lists.end(),
            [](const ResonanceList& a, const ResonanceList& b) { return a.h < b.h; });
  for (std::size_t i = 1; i < lists.size(); ++i)
    if (lists[i].h == lists[i - 1].h) throw ValidationError("estimate_structure: repeated h value");
  if (lists.size() < 2)
    throw ValidationError("estimate_structure: need at least two distinct h values");

  StructureEstimate st;
  std::vector<std::vector<detail::GenClass>> per_h;
  for (const auto& list : lists) {
    const std::size_t gi = detail::ground_index(list.values);
    st.hs.push_back(list.h);
    st.grounds.push_back(list.values[gi]);
    auto gens = detail::find_generators(list.values, gi);
    if (gens.empty())
      throw ValidationError("estimate_structure: data has no excited states (need k = e_j)");
    std::vector<detail::GenClass> cls;
    for (const auto& g : gens) cls.push_back(detail::classify_generator(g / (2.0 * list.h)));
    std::sort(cls.begin(), cls.end(), [](const detail::GenClass& a, const detail::GenClass& b) {
      if (a.hyperbolic != b.hyperbolic) return !a.hyperbolic;
      return a.u < b.u;
    });
    per_h.push_back(std::move(cls));
  }

  const std::size_t n = per_h[0].size();
  for (const auto& cls : per_h) {
    if (cls.size() != n)
      throw MathError("estimate_structure: inconsistent lattice rank across h values");
    for (std::size_t j = 0; j < n; ++j)
      if (cls[j].hyperbolic != per_h[0][j].hyperbolic)
        throw MathError("estimate_structure: inconsistent gap classification across h values");
  }

  const int deg = std::min(static_cast<int>(st.hs.size()) - 1, 2);
  const auto e0fit = detail::polyfit(st.hs, st.grounds, deg);
  st.E0 = e0fit[0].real();
  st.E0_im_residual = e0fit[0].imag();

  st.n = static_cast<int>(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Complexd> ys;
    for (std::size_t i = 0; i < per_h.size(); ++i) ys.push_back(per_h[i][j].omega);
    const Complexd w0 = detail::polyfit(st.hs, ys, deg)[0];
    const double re = std::abs(w0.real()), im = std::abs(w0.imag());
    if (std::min(re, im) > 0.25 * std::max(re, im))
      throw MathError("estimate_structure: ambiguous gap (comparable real and imaginary parts)");
    detail::GenClass g = detail::classify_generator(w0);
    if (!(g.u > 0.0))
      throw MathError("estimate_structure: gap has the wrong sign for a frequency");
    st.omega.push_back(g.hyperbolic ? Complexd(0.0, -g.u) : Complexd(g.u, 0.0));
    st.u.push_back(g.u);
    if (g.hyperbolic) ++st.d;
  }
  // Canonical order (elliptic block first) is guaranteed by the sort above.
  return st;
}

// Matches raw values to the leading-order lattice
// E0 + sum_j omega_j (2k_j+1) h by nearest neighbor within an h^2 radius.
struct LabelResult {
  ResonanceList list;
  std::vector<Complexd> unmatched;
};

inline LabelResult label_resonances(const ResonanceList& raw, const StructureEstimate& st,
                                    double tol_factor = 1.0) {
  raw.validate();
  if (st.n < 1 || static_cast<int>(st.u.size()) != st.n)
    throw ValidationError("label_resonances: invalid structure estimate");
  if (raw.values.empty()) throw ValidationError("label_resonances: empty list");
  const double h = raw.h;
  const auto omega = st.lattice_omega();

  double re_lo = raw.values[0].real(), re_hi = re_lo;
  double im_lo = raw.values[0].imag(), im_hi = im_lo;
  for (const auto& v : raw.values) {
    re_lo = std::min(re_lo, v.real());
    re_hi = std::max(re_hi, v.real());
    im_lo = std::min(im_lo, v.imag());
    im_hi = std::max(im_hi, v.imag());
  }

  double umin = st.u[0];
  for (double uj : st.u) umin = std::min(umin, uj);
  const double pad = 2.0 * h * (*std::max_element(st.u.begin(), st.u.end()));

  // Candidate lattice points reaching the padded data rectangle.
  std::vector<int> kcap(static_cast<std::size_t>(st.n), 0);
  for (int j = 0; j < st.n; ++j) {
    const double uj = st.u[static_cast<std::size_t>(j)];
    const double extent = (j < st.n - st.d ? (re_hi - st.E0) : (std::abs(im_lo))) + pad;
    kcap[static_cast<std::size_t>(j)] = std::max(0, static_cast<int>(extent / (2.0 * uj * h)) + 1);
  }
  struct Cand {
    MultiIndex k;
    Complexd value;
  };
  std::vector<Cand> cands;
  std::vector<int> k(static_cast<std::size_t>(st.n), 0);
  while (true) {
    Complexd v(st.E0, 0.0);
    for (int j = 0; j < st.n; ++j)
      v += omega[static_cast<std::size_t>(j)] * ((2.0 * k[static_cast<std::size_t>(j)] + 1.0) * h);
    if (v.real() >= re_lo - pad && v.real() <= re_hi + pad && v.imag() >= im_lo - pad &&
        v.imag() <= im_hi + pad)
      cands.push_back({MultiIndex(k), v});
    int j = st.n - 1;
    while (j >= 0 && k[static_cast<std::size_t>(j)] == kcap[static_cast<std::size_t>(j)])
      k[static_cast<std::size_t>(j--)] = 0;
    if (j < 0) break;
    ++k[static_cast<std::size_t>(j)];
  }
  if (cands.empty()) throw MathError("label_resonances: no lattice point near the data");

  LabelResult out;
  out.list.h = h;
  std::map<std::vector<int>, std::size_t> claimed;  // k -> raw index
  GradedLex less;
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    const Complexd v = raw.values[i];
    const Cand* best = nullptr;
    double bestd = 0.0;
    for (const auto& c : cands) {
      const double dist = std::abs(v - c.value);
      if (!best || dist < bestd || (dist == bestd && less(c.k, best->k))) {
        best = &c;
        bestd = dist;
      }
    }
    double k2 = 0.0;
    for (std::size_t j = 0; j < best->k.size(); ++j)
      k2 += static_cast<double>(best->k[j]) * best->k[j];
    const double radius = tol_factor * h * h * (1.0 + k2);
    if (bestd > radius) {
      out.unmatched.push_back(v);
      continue;
    }
    auto [it, inserted] = claimed.emplace(best->k.exponents(), i);
    if (!inserted)
      throw MathError("label_resonances: collision, two values map to k = " + best->k.str());
    out.list.values.push_back(v);
    out.list.labels.push_back(best->k);
  }

  // Gap check on the strict interior of the data rectangle; a flat axis
  // (all data on a line, e.g. d = 0) keeps its on-line candidates.
  const double margin = 0.25 * h * umin;
  auto inside = [margin](double v, double lo, double hi) {
    if (hi - lo > 2.0 * margin) return v >= lo + margin && v <= hi - margin;
    return std::abs(v - 0.5 * (lo + hi)) <= margin;
  };
  for (const auto& c : cands) {
    if (!inside(c.value.real(), re_lo, re_hi) || !inside(c.value.imag(), im_lo, im_hi)) continue;
    if (!claimed.count(c.k.exponents()))
      throw MathError("label_resonances: lattice gap, no value matches k = " + c.k.str());
  }
  out.list.validate(st.n);
  return out;
}

// ---------------------------------------------------------------------------
// Least-squares fit of the lattice model on labeled data:
//   value(k,h) = E0 + sum_j omega_j iota_j + sum_{2<=|alpha|<=M} theta_alpha iota^alpha
//              + gamma_h h^2,    iota_j = (2k_j+1)h.
// E0 is pinned to the structure estimate (a free E0 would be exactly
// collinear with the per-h nuisance intercepts).
// ---------------------------------------------------------------------------
struct FitCoefficient {
  MultiIndex alpha;
  Complexd value;
  double se = 0.0;
};

struct FitReport {
  double E0 = 0.0;
  int n = 0;
  int d = 0;
  int order = 2;
  std::vector<double> u;
  std::vector<Complexd> omega;
  std::vector<double> omega_se;
  std::vector<FitCoefficient> coeffs;
  std::vector<std::pair<double, Complexd>> gamma;
  std::vector<std::vector<Complexd>> residuals;
  double residual_norm = 0.0;
  double condition = 0.0;
  int rank = 0;
  std::size_t num_data = 0;
  std::size_t num_params = 0;
};

struct FitOptions {
  double rank_tol = 1e-10;
};

namespace detail {

inline void alphas_of_degree(int n, int deg, std::vector<int>& cur, std::size_t pos,
                             std::vector<MultiIndex>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = deg;
    out.emplace_back(cur);
    return;
  }
  for (int e = deg; e >= 0; --e) {
    cur[pos] = e;
    alphas_of_degree(n, deg - e, cur, pos + 1, out);
  }
}

inline std::vector<MultiIndex> action_monomials(int n, int deg_lo, int deg_hi) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  for (int deg = deg_lo; deg <= deg_hi; ++deg) alphas_of_degree(n, deg, cur, 0, out);
  return out;
}

}  // namespace detail

inline std::pair<FitReport, NormalForm<Complexd>> fit_normal_form(
    const std::vector<ResonanceList>& lists, int order, const StructureEstimate& st,
    const FitOptions& opt = {}) {
  if (order < 2) throw ValidationError("fit_normal_form: order must be >= 2");
  if (lists.empty()) throw ValidationError("fit_normal_form: no data");
  const int n = st.n;
  for (const auto& l : lists) {
    l.validate(n);
    if (!l.labeled()) throw ValidationError("fit_normal_form: lists must be labeled");
  }

  std::vector<double> hs;
  for (const auto& l : lists)
    if (std::find(hs.begin(), hs.end(), l.h) == hs.end()) hs.push_back(l.h);
  std::sort(hs.begin(), hs.end());

  const auto alphas = detail::action_monomials(n, 2, order);
  const std::size_t p_omega = static_cast<std::size_t>(n);
  const std::size_t p_theta = alphas.size();
  const std::size_t p_gamma = hs.size();
  const std::size_t p = p_omega + p_theta + p_gamma;

  std::size_t m = 0;
  for (const auto& l : lists) m += l.values.size();
  if (m < p + 1)
    throw ValidationError("fit_normal_form: not enough data for the requested degree");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
  Eigen::VectorXd br(static_cast<Eigen::Index>(m)), bi(static_cast<Eigen::Index>(m));
  std::size_t row = 0;
  for (const auto& l : lists) {
    const std::size_t hidx =
        static_cast<std::size_t>(std::find(hs.begin(), hs.end(), l.h) - hs.begin());
    for (std::size_t i = 0; i < l.values.size(); ++i, ++row) {
      std::vector<double> iota(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j)
        iota[static_cast<std::size_t>(j)] = (2.0 * l.labels[i][static_cast<std::size_t>(j)] + 1.0) * l.h;
      for (int j = 0; j < n; ++j) x(static_cast<Eigen::Index>(row), j) = iota[static_cast<std::size_t>(j)];
      for (std::size_t a = 0; a < p_theta; ++a) {
        double t = 1.0;
        for (int j = 0; j < n; ++j)
          for (int e = 0; e < alphas[a][static_cast<std::size_t>(j)]; ++e)
            t *= iota[static_cast<std::size_t>(j)];
        x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(p_omega + a)) = t;
      }
      for (std::size_t g = 0; g < p_gamma; ++g)
        x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(p_omega + p_theta + g)) =
            g == hidx ? l.h * l.h : 0.0;
      const Complexd yv = l.values[i] - Complexd(st.E0, 0.0);
      br(static_cast<Eigen::Index>(row)) = yv.real();
      bi(static_cast<Eigen::Index>(row)) = yv.imag();
    }
  }

  // Column equilibration, then SVD.
  std::vector<double> scale(p, 1.0);
  for (std::size_t jcol = 0; jcol < p; ++jcol) {
    const double s = x.col(static_cast<Eigen::Index>(jcol)).cwiseAbs().maxCoeff();
    scale[jcol] = s > 0.0 ? s : 1.0;
    x.col(static_cast<Eigen::Index>(jcol)) /= scale[jcol];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > opt.rank_tol * smax) ++rank;

  auto column_name = [&](std::size_t jcol) -> std::string {
    if (jcol < p_omega) return "omega_" + std::to_string(jcol + 1);
    if (jcol < p_omega + p_theta) return "theta_" + alphas[jcol - p_omega].str();
    return "gamma_h=" + std::to_string(hs[jcol - p_omega - p_theta]);
  };
  if (rank < static_cast<int>(p)) {
    std::string names;
    const auto& v = svd.matrixV();
    for (Eigen::Index nc = rank; nc < v.cols(); ++nc) {
      double mx = v.col(nc).cwiseAbs().maxCoeff();
      for (std::size_t jcol = 0; jcol < p; ++jcol)
        if (std::abs(v(static_cast<Eigen::Index>(jcol), nc)) > 0.5 * mx)
          names += (names.empty() ? "" : ", ") + column_name(jcol);
    }
    throw MathError("fit_normal_form: rank-deficient design, unidentifiable: " + names);
  }

  Eigen::VectorXd yr = svd.solve(br), yi = svd.solve(bi);
  Eigen::VectorXd rr = br - x * yr, ri = bi - x * yi;

  FitReport rep;
  rep.E0 = st.E0;
  rep.n = n;
  rep.d = st.d;
  rep.order = order;
  rep.rank = rank;
  rep.num_data = m;
  rep.num_params = p;
  rep.condition = smax / sv(sv.size() - 1);

  const double rss = rr.squaredNorm() + ri.squaredNorm();
  rep.residual_norm = std::sqrt(rss);
  const double dof = static_cast<double>(m > p ? m - p : 1);
  const double sigma2 = rss / dof;

  // Diagonal of (X^T X)^{-1} through the SVD factors.
  const auto& vmat = svd.matrixV();
  std::vector<double> se(p, 0.0);
  for (std::size_t jcol = 0; jcol < p; ++jcol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      const double q = vmat(static_cast<Eigen::Index>(jcol), i) / sv(i);
      acc += q * q;
    }
    se[jcol] = std::sqrt(sigma2 * acc) / scale[jcol];
  }

  auto coeff_at = [&](std::size_t jcol) {
    return Complexd(yr(static_cast<Eigen::Index>(jcol)), yi(static_cast<Eigen::Index>(jcol))) /
           scale[jcol];
  };

  NormalForm<Complexd> nf;
  nf.n = n;
  nf.d = st.d;
  nf.E0 = st.E0;
  nf.scaled = true;
  nf.order = order;
  for (int deg = 2; deg <= order; ++deg) nf.actions.emplace_back(n);

  for (int j = 0; j < n; ++j) {
    const Complexd w = coeff_at(static_cast<std::size_t>(j));
    rep.omega.push_back(w);
    rep.omega_se.push_back(se[static_cast<std::size_t>(j)]);
    const double uj = j < n - st.d ? w.real() : -w.imag();
    if (!(uj > 0.0))
      throw NumericalError("fit_normal_form: fitted frequency lost its expected sign");
    rep.u.push_back(uj);
  }
  nf.u = rep.u;

  for (std::size_t a = 0; a < p_theta; ++a) {
    FitCoefficient fc;
    fc.alpha = alphas[a];
    fc.value = coeff_at(p_omega + a);
    fc.se = se[p_omega + a];
    rep.coeffs.push_back(fc);
    nf.actions[static_cast<std::size_t>(fc.alpha.degree() - 2)].set_term(fc.alpha, fc.value);
  }
  for (std::size_t g = 0; g < p_gamma; ++g)
    rep.gamma.emplace_back(hs[g], coeff_at(p_omega + p_theta + g));

  row = 0;
  for (const auto& l : lists) {
    std::vector<Complexd> res;
    for (std::size_t i = 0; i < l.values.size(); ++i, ++row)
      res.emplace_back(rr(static_cast<Eigen::Index>(row)), ri(static_cast<Eigen::Index>(row)));
    rep.residuals.push_back(std::move(res));
  }

  nf.validate();
  return {std::move(rep), std::move(nf)};
}

// ---------------------------------------------------------------------------
// Full inverse pipeline: structure -> labels -> fit -> Taylor coefficients.
// ---------------------------------------------------------------------------
struct InvertOptions {
  double tol_factor = 1.0;
  double eps = 1e-9;
  double realness_tol = 0.05;
  double rank_tol = 1e-10;
  int guard_degrees = 1;  // extra fitted action degrees, absorb higher-order bias
};

struct InvertResult {
  PotentialSpec<double> spec;
  FitReport report;
  NormalForm<Complexd> nf;
  StructureEstimate structure;
  std::size_t unmatched_count = 0;
};

inline InvertResult invert_from_resonances(const std::vector<ResonanceList>& lists, int n_target,
                                           const InvertOptions& opt = {}) {
  if (n_target < 2) throw ValidationError("invert_from_resonances: target degree must be >= 2");
  InvertResult out;
  out.structure = estimate_structure(lists);

  std::vector<ResonanceList> labeled;
  for (const auto& l : lists) {
    if (l.labeled()) {
      l.validate(out.structure.n);
      labeled.push_back(l);
    } else {
      auto lr = label_resonances(l, out.structure, opt.tol_factor);
      out.unmatched_count += lr.unmatched.size();
      labeled.push_back(std::move(lr.list));
    }
  }

  const int fit_order = n_target + std::max(0, opt.guard_degrees);
  FitOptions fopt;
  fopt.rank_tol = opt.rank_tol;
  auto [rep, nf] = fit_normal_form(labeled, fit_order, out.structure, fopt);

  RecoverOptions ropt;
  ropt.eps = opt.eps;
  ropt.realness_tol = opt.realness_tol;
  out.spec = recover_taylor(nf, n_target, ropt);
  out.report = std::move(rep);
  out.nf = std::move(nf);
  return out;
}

}  // namespace birkhoff
