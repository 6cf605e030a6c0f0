#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

namespace birkhoff {

// Exponent vector of a monomial. Length is n for action/potential indices
// and 2n for phase-space indices (variables 0..n-1 first, conjugates after).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t size) : e_(size, 0) {}
  MultiIndex(std::initializer_list<int> e) : e_(e) {}
  explicit MultiIndex(std::vector<int> e) : e_(std::move(e)) {}

  static MultiIndex unit(std::size_t size, std::size_t var) {
    MultiIndex m(size);
    m.e_[var] = 1;
    return m;
  }

  std::size_t size() const { return e_.size(); }
  int operator[](std::size_t i) const { return e_[i]; }
  int& operator[](std::size_t i) { return e_[i]; }
  const std::vector<int>& exponents() const { return e_; }

  int degree() const { return std::accumulate(e_.begin(), e_.end(), 0); }
  bool all_nonnegative() const {
    return std::all_of(e_.begin(), e_.end(), [](int v) { return v >= 0; });
  }

  MultiIndex operator+(const MultiIndex& o) const {
    MultiIndex r(*this);
    for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
    return r;
  }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) = default;

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < e_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(e_[i]);
    }
    return s + ")";
  }

  friend std::ostream& operator<<(std::ostream& os, const MultiIndex& m) {
    return os << m.str();
  }

 private:
  std::vector<int> e_;
};

// Graded lexicographic order: total degree first, then lexicographic.
// Term maps keyed this way give cheap per-degree extraction and a
// deterministic iteration order.
struct GradedLex {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    return std::lexicographical_compare(a.exponents().begin(), a.exponents().end(),
                                        b.exponents().begin(), b.exponents().end());
  }
};

}  // namespace birkhoff
