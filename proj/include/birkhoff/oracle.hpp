#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "potential.hpp"
#include "resonance.hpp"

namespace birkhoff {

// Brute-force resonance computation for n <= 2: diagonalize the complex-scaled
// Hamiltonian in the oscillator ladder basis and keep basis-stable eigenvalues.
struct OracleConfig {
  int basis = 64;              // B, per coordinate
  int basis_increment = 8;     // stability sweep step
  double h = 0.01;
  double re_halfwidth = 1.0;   // Re window around E0
  double im_depth = 1.0;       // Im window [-im_depth, 0]
  double stability_tol = 1e-8;
  std::size_t dim_cap = 10000;

  void validate() const {
    if (basis < 8) throw ValidationError("oracle: basis size must be >= 8");
    if (basis_increment < 1) throw ValidationError("oracle: basis increment must be >= 1");
    if (!(h > 0.0)) throw ValidationError("oracle: h must be positive");
    if (!(re_halfwidth > 0.0)) throw ValidationError("oracle: Re window must be positive");
    if (!(im_depth > 0.0)) throw ValidationError("oracle: Im depth must be positive");
    if (!(stability_tol > 0.0)) throw ValidationError("oracle: stability tolerance must be positive");
  }
};

struct DenseOperator {
  int n = 0;
  int basis = 0;  // per coordinate; matrix dimension is basis^n
  Eigen::MatrixXcd matrix;
};

// X = sqrt(h/2)(a + a*), P = i sqrt(h/2)(a* - a): Hermitian tridiagonal with
// [X, P] = ih away from the truncation corner, so P^2 + X^2 is exactly
// diag((2k+1)h) for k <= B-2 and the top state decouples.
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> ladder_matrices(int basis, double h) {
  if (basis < 2) throw ValidationError("ladder_matrices: basis size must be >= 2");
  if (!(h > 0.0)) throw ValidationError("ladder_matrices: h must be positive");
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(basis, basis);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(basis, basis);
  const double s = std::sqrt(h / 2.0);
  for (int k = 0; k + 1 < basis; ++k) {
    const double r = s * std::sqrt(static_cast<double>(k + 1));
    x(k, k + 1) = r;
    x(k + 1, k) = r;
    p(k, k + 1) = std::complex<double>(0.0, -r);
    p(k + 1, k) = std::complex<double>(0.0, r);
  }
  return {std::move(x), std::move(p)};
}

namespace detail {

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace detail

// H = sum_j P_j^2 + (V(X) - E0) as a matrix, with X_j -> e^{i pi/4} X_j,
// P_j -> e^{-i pi/4} P_j on the hyperbolic coordinates.
inline DenseOperator assemble_scaled(const PotentialSpec<double>& spec, const OracleConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (spec.n > 2) throw ValidationError("oracle: only n <= 2 is supported");
  const int n = spec.n;
  const int b = cfg.basis;
  std::size_t dim = 1;
  for (int j = 0; j < n; ++j) dim *= static_cast<std::size_t>(b);
  if (dim > cfg.dim_cap) throw LimitError("oracle: basis^n exceeds the configured dimension cap");

  auto [x0, p0] = ladder_matrices(b, cfg.h);
  const std::complex<double> phase_x = std::polar(1.0, std::numbers::pi / 4.0);
  const std::complex<double> phase_p = std::polar(1.0, -std::numbers::pi / 4.0);

  // Per-coordinate scaled matrices and the X power tables.
  std::vector<Eigen::MatrixXcd> p2(static_cast<std::size_t>(n));
  std::vector<std::vector<Eigen::MatrixXcd>> xpow(static_cast<std::size_t>(n));
  std::vector<int> maxe(static_cast<std::size_t>(n), 2);
  for (const auto& [alpha, c] : spec.coeffs)
    for (int j = 0; j < n; ++j)
      maxe[static_cast<std::size_t>(j)] =
          std::max(maxe[static_cast<std::size_t>(j)], 2 * alpha[static_cast<std::size_t>(j)]);
  for (int j = 0; j < n; ++j) {
    const bool hyp = spec.is_hyperbolic(j);
    Eigen::MatrixXcd xj = hyp ? Eigen::MatrixXcd(phase_x * x0) : x0;
    Eigen::MatrixXcd pj = hyp ? Eigen::MatrixXcd(phase_p * p0) : p0;
    p2[static_cast<std::size_t>(j)] = pj * pj;
    auto& tab = xpow[static_cast<std::size_t>(j)];
    tab.push_back(Eigen::MatrixXcd::Identity(b, b));
    for (int e = 1; e <= maxe[static_cast<std::size_t>(j)]; ++e) tab.push_back(tab.back() * xj);
  }

  auto lift1 = [&](const Eigen::MatrixXcd& m, int j) -> Eigen::MatrixXcd {
    if (n == 1) return m;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(b, b);
    return j == 0 ? detail::kron(m, id) : detail::kron(id, m);
  };

  DenseOperator op;
  op.n = n;
  op.basis = b;
  op.matrix = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (int j = 0; j < n; ++j) {
    const double u2 = spec.u[static_cast<std::size_t>(j)] * spec.u[static_cast<std::size_t>(j)];
    const double sign = spec.is_hyperbolic(j) ? -1.0 : 1.0;
    op.matrix += lift1(p2[static_cast<std::size_t>(j)], j);
    op.matrix += sign * u2 * lift1(xpow[static_cast<std::size_t>(j)][2], j);
  }
  for (const auto& [alpha, c] : spec.coeffs) {
    if (n == 1) {
      op.matrix += c * xpow[0][static_cast<std::size_t>(2 * alpha[0])];
    } else {
      op.matrix += c * detail::kron(xpow[0][static_cast<std::size_t>(2 * alpha[0])],
                                    xpow[1][static_cast<std::size_t>(2 * alpha[1])]);
    }
  }
  return op;
}

namespace detail {

inline std::vector<Complexd> scaled_eigenvalues(const PotentialSpec<double>& spec,
                                                const OracleConfig& cfg) {
  const DenseOperator op = assemble_scaled(spec, cfg);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.matrix, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("oracle: eigensolver failed to converge");
  std::vector<Complexd> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return ev;
}

}  // namespace detail

// Eigenvalues inside the rectangle that move less than stability_tol when the
// basis grows by basis_increment; reported relative to the absolute energy
// scale (E0 added back), sorted by |Im| then Re.
inline ResonanceList oracle_resonances(const PotentialSpec<double>& spec, const OracleConfig& cfg) {
  spec.validate();
  cfg.validate();
  OracleConfig big = cfg;
  big.basis = cfg.basis + cfg.basis_increment;
  const auto ev1 = detail::scaled_eigenvalues(spec, cfg);
  const auto ev2 = detail::scaled_eigenvalues(spec, big);

  const double fuzz = cfg.stability_tol;
  auto in_rect = [&](const Complexd& e) {
    return std::abs(e.real()) <= cfg.re_halfwidth && e.imag() >= -cfg.im_depth &&
           e.imag() <= fuzz;
  };

  std::vector<Complexd> kept;
  std::vector<bool> used(ev2.size(), false);
  for (const auto& e1 : ev1) {
    if (!in_rect(e1)) continue;
    std::size_t best = ev2.size();
    double bestd = 0.0;
    for (std::size_t i = 0; i < ev2.size(); ++i) {
      const double dist = std::abs(e1 - ev2[i]);
      if (best == ev2.size() || dist < bestd) {
        best = i;
        bestd = dist;
      }
    }
    if (best == ev2.size() || bestd > cfg.stability_tol || used[best]) continue;
    used[best] = true;
    kept.push_back(ev2[best]);
  }

  ResonanceList out;
  out.h = cfg.h;
  for (const auto& e : kept) out.values.push_back(Complexd(spec.E0, 0.0) + e);
  // |Im| first, Re as tie-break; |Im| quantized by the stability tolerance so
  // solver noise on real spectra cannot scramble the order.
  const double q = cfg.stability_tol;
  std::sort(out.values.begin(), out.values.end(), [q](const Complexd& a, const Complexd& b) {
    const double ia = std::round(std::abs(a.imag()) / q), ib = std::round(std::abs(b.imag()) / q);
    if (ia != ib) return ia < ib;
    return a.real() < b.real();
  });
  return out;
}

}  // namespace birkhoff
