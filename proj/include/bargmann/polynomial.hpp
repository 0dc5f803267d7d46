#pragma once

// Polynomial function representations used by the duality checks.

#include <algorithm>
#include <complex>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bargmann/errors.hpp"
#include "bargmann/matrix_core.hpp"

namespace bargmann {

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& j) { return std::accumulate(j.begin(), j.end(), 0); }

/// j! = prod j_i!.
inline double multi_factorial(const MultiIndex& j) {
  double out = 1.0;
  for (int ji : j)
    for (int t = 2; t <= ji; ++t) out *= t;
  return out;
}

/// z^k by repeated multiplication, with z^0 == 1 for every z.
inline cplx int_pow(cplx z, int k) {
  cplx out{1.0, 0.0};
  for (int t = 0; t < k; ++t) out *= z;
  return out;
}

/// Holomorphic polynomial sum_j c_j z^j on C^n.
class HoloPolynomial {
 public:
  static constexpr int kMaxDegree = 12;

  explicit HoloPolynomial(int n) : n_(n) {
    if (n <= 0) throw DimensionError("HoloPolynomial: n must be positive");
  }

  /// One variable, coefficients listed from degree 0 upward.
  static HoloPolynomial from_coefficients(const std::vector<cplx>& c) {
    HoloPolynomial out(1);
    for (std::size_t d = 0; d < c.size(); ++d)
      if (c[d] != cplx{0.0, 0.0}) out.set({static_cast<int>(d)}, c[d]);
    return out;
  }

  static HoloPolynomial monomial(MultiIndex j, cplx c = 1.0) {
    HoloPolynomial out(static_cast<int>(j.size()));
    out.set(std::move(j), c);
    return out;
  }

  int n() const noexcept { return n_; }

  void set(MultiIndex j, cplx c) {
    if (static_cast<int>(j.size()) != n_) throw DimensionError("HoloPolynomial: multi-index length mismatch");
    for (int ji : j)
      if (ji < 0) throw DomainError("HoloPolynomial: negative exponent");
    if (total_degree(j) > kMaxDegree) throw DegreeError("HoloPolynomial: degree above " + std::to_string(kMaxDegree));
    if (c == cplx{0.0, 0.0})
      coeffs_.erase(j);
    else
      coeffs_[std::move(j)] = c;
  }

  cplx coefficient(const MultiIndex& j) const {
    auto it = coeffs_.find(j);
    return it == coeffs_.end() ? cplx{0.0, 0.0} : it->second;
  }

  const std::map<MultiIndex, cplx>& terms() const noexcept { return coeffs_; }
  bool is_zero() const noexcept { return coeffs_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [j, c] : coeffs_) d = std::max(d, total_degree(j));
    return d;
  }

  cplx operator()(std::span<const cplx> z) const {
    if (static_cast<int>(z.size()) != n_) throw DimensionError("HoloPolynomial: point dimension mismatch");
    cplx s{0.0, 0.0};
    for (const auto& [j, c] : coeffs_) {
      cplx t = c;
      for (int i = 0; i < n_; ++i) t *= int_pow(z[static_cast<std::size_t>(i)], j[static_cast<std::size_t>(i)]);
      s += t;
    }
    return s;
  }

  cplx operator()(cplx z) const { return (*this)(std::span<const cplx>(&z, 1)); }

  friend bool operator==(const HoloPolynomial&, const HoloPolynomial&) = default;

 private:
  int n_;
  std::map<MultiIndex, cplx> coeffs_;
};

/// One-variable polynomial sum c_{jk} z^j conj(z)^k in z and conj(z).
class MixedPolynomial {
 public:
  static constexpr int kMaxDegree = 8;

  void set(int j, int k, cplx c) {
    if (j < 0 || k < 0) throw DomainError("MixedPolynomial: negative exponent");
    if (j + k > kMaxDegree) throw DegreeError("MixedPolynomial: degree above " + std::to_string(kMaxDegree));
    if (c == cplx{0.0, 0.0})
      coeffs_.erase({j, k});
    else
      coeffs_[{j, k}] = c;
  }

  static MixedPolynomial term(int j, int k, cplx c = 1.0) {
    MixedPolynomial out;
    out.set(j, k, c);
    return out;
  }

  static MixedPolynomial from_holomorphic(const HoloPolynomial& h) {
    if (h.n() != 1) throw DimensionError("MixedPolynomial: holomorphic input must be one-variable");
    MixedPolynomial out;
    for (const auto& [j, c] : h.terms()) out.set(j[0], 0, c);
    return out;
  }

  const std::map<std::pair<int, int>, cplx>& terms() const noexcept { return coeffs_; }

  cplx operator()(cplx z) const {
    cplx s{0.0, 0.0};
    for (const auto& [jk, c] : coeffs_) s += c * int_pow(z, jk.first) * int_pow(std::conj(z), jk.second);
    return s;
  }

 private:
  std::map<std::pair<int, int>, cplx> coeffs_;
};

}  // namespace bargmann
