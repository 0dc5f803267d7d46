#pragma once

// Duality constants of the Fock spaces: monomial orthogonality, norms of
// the reproducing kernel and of point evaluation, the non-duality growth
// ratio, and a sampled check of the dual-norm sandwich
//   ||h||_{L^{p'}(gamma_{alpha p'/2})} <= sup_f |(f, h)_alpha| / ||f||_{L^p(gamma_{alpha p/2})}
//                                      <= (2 j(p)) ||h||_{L^{p'}(gamma_{alpha p'/2})}.
// Quadrature paths are one complex variable only.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bargmann/bargmann_op.hpp"
#include "bargmann/detail/parallel.hpp"
#include "bargmann/errors.hpp"
#include "bargmann/gauss_quad.hpp"
#include "bargmann/norm_opt.hpp"
#include "bargmann/polynomial.hpp"

namespace bargmann {

using ComplexFunction = std::function<cplx(cplx)>;

/// (z^j, z^k)_alpha = delta_jk j! / alpha^{|j|}.
inline cplx monomial_inner_product(const MultiIndex& j, const MultiIndex& k, double alpha, int n) {
  if (static_cast<int>(j.size()) != n || static_cast<int>(k.size()) != n)
    throw DimensionError("monomial_inner_product: multi-index length must equal n");
  if (!(alpha > 0.0)) throw DomainError("monomial_inner_product: alpha must be positive");
  if (j != k) return 0.0;
  return multi_factorial(j) / std::pow(alpha, total_degree(j));
}

/// ||K_w||_{L^{p'}(gamma_alpha)} = e^{p' alpha |w|^2 / 4}.
inline double kernel_pprime_norm(std::span<const cplx> w, double alpha, double p_conj) {
  if (!(p_conj > 1.0) || !(alpha > 0.0)) throw DomainError("kernel_pprime_norm: need p' > 1 and alpha > 0");
  return std::exp(0.25 * p_conj * alpha * norm_sq(w));
}

/// Norm of f -> f(w) on the holomorphic part of L^p(gamma_alpha): e^{alpha |w|^2 / p}.
inline double eval_functional_norm(std::span<const cplx> w, double alpha, double p) {
  if (!(p > 1.0) || !(alpha > 0.0)) throw DomainError("eval_functional_norm: need p > 1 and alpha > 0");
  return std::exp(alpha * norm_sq(w) / p);
}

/// ||K_w||_{p'} / ||Lambda_w|| = e^{alpha |w|^2 (p-2)^2 / (4 p (p-1))}.
inline double nonduality_ratio(double w_norm_sq, double p, double alpha) {
  if (!(p > 1.0) || !(alpha > 0.0) || !(w_norm_sq >= 0.0))
    throw DomainError("nonduality_ratio: need p > 1, alpha > 0, |w|^2 >= 0");
  return std::exp(alpha * w_norm_sq * (p - 2.0) * (p - 2.0) / (4.0 * p * (p - 1.0)));
}

// ---------------------------------------------------------------------------
// One-variable quadrature against gamma_beta
// ---------------------------------------------------------------------------

/// Defaults for integrals against gamma_beta on C.
inline QuadratureSpec gamma_spec(double beta, double rel_tol = 1e-10) {
  QuadratureSpec s;
  s.envelope = beta * RMatrix::Identity(2, 2);
  s.target_rel_tol = rel_tol;
  return s;
}

/// int F dgamma_beta over C, with F sampled at z = x1 + i x2.
inline QuadratureResult integrate_gamma(const ComplexFunction& f, double beta, const QuadratureSpec& spec) {
  if (!(beta > 0.0)) throw DomainError("integrate_gamma: beta must be positive");
  const double dens = beta / std::numbers::pi;
  auto integrand = [&](std::span<const double> x) {
    const cplx z{x[0], x[1]};
    return f(z) * dens * std::exp(-beta * std::norm(z));
  };
  QuadratureSpec s = spec;
  if (s.envelope.size() == 0) s.envelope = beta * RMatrix::Identity(2, 2);
  return quadrature_integrate(integrand, 2, s);
}

inline QuadratureResult integrate_gamma(const ComplexFunction& f, double beta) {
  return integrate_gamma(f, beta, gamma_spec(beta));
}

/// (f, g)_alpha = int f conj(g) dgamma_alpha by quadrature.
inline cplx pairing_by_quadrature(const ComplexFunction& f, const ComplexFunction& g, double alpha,
                                  const QuadratureSpec& spec) {
  return integrate_gamma([&](cplx z) { return f(z) * std::conj(g(z)); }, alpha, spec).value;
}

/// ||F||_{L^q(gamma_beta)} by quadrature.
inline double lp_norm_gamma(const ComplexFunction& f, double q, double beta, const QuadratureSpec& spec) {
  if (!(q > 0.0)) throw DomainError("lp_norm_gamma: exponent must be positive");
  const auto r = integrate_gamma([&](cplx z) { return cplx{std::pow(std::abs(f(z)), q), 0.0}; }, beta, spec);
  return std::pow(r.value.real(), 1.0 / q);
}

/// Quadrature value of (z^j, z^k)_alpha for n = 1.
inline cplx monomial_inner_product_by_quadrature(int j, int k, double alpha) {
  return pairing_by_quadrature([j](cplx z) { return int_pow(z, j); }, [k](cplx z) { return int_pow(z, k); }, alpha,
                               gamma_spec(alpha));
}

/// ||K_w||_{L^{p'}(gamma_alpha)} by quadrature, n = 1.
inline double kernel_pprime_norm_by_quadrature(cplx w, double alpha, double p_conj) {
  QuadratureSpec s = gamma_spec(alpha);
  // |K_w|^{p'} gamma_alpha peaks at z = p' w / 2
  s.center = RVector(2);
  s.center << 0.5 * p_conj * w.real(), 0.5 * p_conj * w.imag();
  return lp_norm_gamma([&](cplx z) { return std::exp(alpha * z * std::conj(w)); }, p_conj, alpha, s);
}

// ---------------------------------------------------------------------------
// Projection and polynomial pairings
// ---------------------------------------------------------------------------

/// P_alpha on polynomials in z and conj(z): z^j conj(z)^k maps to
/// j! / ((j-k)! alpha^k) z^{j-k} when j >= k and to 0 otherwise.
inline HoloPolynomial projection_on_samples(const MixedPolynomial& f, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("projection_on_samples: alpha must be positive");
  std::vector<cplx> c(MixedPolynomial::kMaxDegree + 1, cplx{0.0, 0.0});
  for (const auto& [jk, v] : f.terms()) {
    const auto [j, k] = jk;
    if (j < k) continue;
    double factor = 1.0;
    for (int t = j - k + 1; t <= j; ++t) factor *= t;
    c[static_cast<std::size_t>(j - k)] += v * factor / std::pow(alpha, k);
  }
  return HoloPolynomial::from_coefficients(c);
}

/// Taylor coefficients up to `max_degree` of P_alpha F for a general F,
/// from (F, z^m)_alpha / (m! / alpha^m) by quadrature.
inline HoloPolynomial project_by_quadrature(const ComplexFunction& f, double alpha, int max_degree,
                                            const QuadratureSpec& spec) {
  if (max_degree > HoloPolynomial::kMaxDegree) throw DegreeError("project_by_quadrature: degree cap exceeded");
  std::vector<cplx> c(static_cast<std::size_t>(max_degree + 1));
  for (int m = 0; m <= max_degree; ++m) {
    const cplx ip = pairing_by_quadrature(f, [m](cplx z) { return int_pow(z, m); }, alpha, spec);
    c[static_cast<std::size_t>(m)] = ip / (multi_factorial({m}) / std::pow(alpha, m));
  }
  return HoloPolynomial::from_coefficients(c);
}

/// (f, h)_alpha for one-variable polynomials, from the orthogonality relations.
inline cplx polynomial_pairing(const HoloPolynomial& f, const HoloPolynomial& h, double alpha) {
  if (f.n() != h.n()) throw DimensionError("polynomial_pairing: dimension mismatch");
  cplx s{0.0, 0.0};
  for (const auto& [j, c] : f.terms()) s += c * std::conj(h.coefficient(j)) * monomial_inner_product(j, j, alpha, f.n());
  return s;
}

inline ComplexFunction as_function(const HoloPolynomial& h) {
  if (h.n() != 1) throw DimensionError("as_function: one-variable polynomial expected");
  return [h](cplx z) { return h(z); };
}

// ---------------------------------------------------------------------------
// Sandwich
// ---------------------------------------------------------------------------

inline constexpr double kSandwichSlack = 0.05;
inline constexpr int kFamilyDegree = 8;

struct DualityReport {
  double p = 0.0;
  double alpha = 0.0;
  std::string test_id;
  /// ||h||_{L^{p'}(gamma_{alpha p'/2})}
  double lhs = 0.0;
  /// sampled sup of |(f, h)_alpha| / ||f||_{L^p(gamma_{alpha p/2})}
  double middle = 0.0;
  /// 2 j(p) * lhs
  double rhs = 0.0;
  HoloPolynomial witness{1};
  std::string witness_kind;
  int family_evaluated = 0;
  double slack = kSandwichSlack;

  bool lower_holds() const { return middle >= (1.0 - slack) * lhs; }
  bool upper_holds() const { return middle <= (1.0 + slack) * rhs; }
  bool holds() const { return lower_holds() && upper_holds(); }
};

struct SandwichOptions {
  int family_size = 64;
  std::uint64_t seed = 42;
  /// Tolerance for the |.|^q norms; these integrands are only finitely
  /// smooth at zeros of the polynomial, so 1e-10 is out of reach. 1e-4 is
  /// still far below the 5% sandwich slack.
  double norm_rel_tol = 1e-4;
  std::string test_id = "h";
};

/// Random polynomial of degree <= `degree` with coefficients of the
/// normalized monomials drawn from the unit complex Gaussian.
inline HoloPolynomial random_polynomial(std::mt19937_64& rng, int degree, double alpha) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<cplx> c(static_cast<std::size_t>(degree + 1));
  for (int m = 0; m <= degree; ++m) {
    const double norm_m = std::sqrt(multi_factorial({m}) / std::pow(alpha, m));
    c[static_cast<std::size_t>(m)] = cplx{nd(rng), nd(rng)} / norm_m;
  }
  return HoloPolynomial::from_coefficients(c);
}

/// Sampled check of the sandwich for one-variable h. The family is the
/// monomials up to degree 8, `family_size` random polynomials, and the
/// projection of e^{-(p'-2) alpha |z|^2 / 2} |h|^{p'-2} h (the Hoelder
/// extremal before projection), truncated to degree 8.
inline DualityReport duality_sandwich_check(const HoloPolynomial& h, double p, double alpha,
                                            const SandwichOptions& opt = {}) {
  if (h.n() != 1) throw DimensionError("duality_sandwich_check: only n = 1 is supported");
  if (h.is_zero()) throw DomainError("duality_sandwich_check: h must be nonzero");
  if (!(p > 1.0) || !(alpha > 0.0)) throw DomainError("duality_sandwich_check: need p > 1 and alpha > 0");
  const double q = p / (p - 1.0);
  DualityReport rep;
  rep.p = p;
  rep.alpha = alpha;
  rep.test_id = opt.test_id;
  const double beta_h = 0.5 * alpha * q;
  const double beta_f = 0.5 * alpha * p;
  const ComplexFunction hf = as_function(h);
  rep.lhs = lp_norm_gamma(hf, q, beta_h, gamma_spec(beta_h, opt.norm_rel_tol));
  rep.rhs = 2.0 * j_function(p) * rep.lhs;

  std::vector<std::pair<HoloPolynomial, std::string>> family;
  for (int m = 0; m <= kFamilyDegree; ++m) family.emplace_back(HoloPolynomial::monomial({m}), "monomial");
  for (int i = 0; i < opt.family_size; ++i) {
    auto rng = detail::make_rng(opt.seed, static_cast<std::uint64_t>(i));
    family.emplace_back(random_polynomial(rng, kFamilyDegree, alpha), "random");
  }
  {
    auto extremal = [&](cplx z) {
      const cplx v = h(z);
      const double av = std::abs(v);
      if (av == 0.0) return cplx{0.0, 0.0};
      return std::exp(-(q - 2.0) * 0.5 * alpha * std::norm(z)) * std::pow(av, q - 2.0) * v;
    };
    // any polynomial is a valid trial function, so an inexact projection
    // only weakens the witness
    QuadratureSpec ws = gamma_spec(alpha, opt.norm_rel_tol);
    ws.throw_on_failure = false;
    family.emplace_back(project_by_quadrature(extremal, alpha, kFamilyDegree, ws), "projected-extremal");
  }

  const auto ratios = detail::parallel_map<double>(family.size(), [&](std::size_t i) {
    const HoloPolynomial& f = family[i].first;
    if (f.is_zero()) return 0.0;
    const double fn = lp_norm_gamma(as_function(f), p, beta_f, gamma_spec(beta_f, opt.norm_rel_tol));
    return std::abs(polynomial_pairing(f, h, alpha)) / fn;
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (ratios[i] > ratios[best]) best = i;
  rep.middle = ratios[best];
  rep.witness = family[best].first;
  rep.witness_kind = family[best].second;
  rep.family_evaluated = static_cast<int>(family.size());
  return rep;
}

/// Sampled lower bound for ||Lambda_w|| on L^p(gamma_alpha), n = 1: the
/// largest |f(w)| / ||f||_{L^p(gamma_alpha)} over random polynomials and
/// the degree-8 truncation of e^{(2 alpha / p) z conj(w)}.
inline double eval_functional_lower_bound(cplx w, double alpha, double p, int family_size, std::uint64_t seed,
                                          double rel_tol = 1e-4) {
  if (!(p > 1.0) || !(alpha > 0.0)) throw DomainError("eval_functional_lower_bound: need p > 1 and alpha > 0");
  std::vector<HoloPolynomial> family;
  {
    std::vector<cplx> c(kFamilyDegree + 1);
    const cplx lam = 2.0 * alpha / p * std::conj(w);
    cplx term{1.0, 0.0};
    for (int m = 0; m <= kFamilyDegree; ++m) {
      c[static_cast<std::size_t>(m)] = term;
      term *= lam / static_cast<double>(m + 1);
    }
    family.push_back(HoloPolynomial::from_coefficients(c));
  }
  for (int i = 0; i < family_size; ++i) {
    auto rng = detail::make_rng(seed, static_cast<std::uint64_t>(i));
    family.push_back(random_polynomial(rng, kFamilyDegree, alpha));
  }
  const auto ratios = detail::parallel_map<double>(family.size(), [&](std::size_t i) {
    const double fn = lp_norm_gamma(as_function(family[i]), p, alpha, gamma_spec(alpha, rel_tol));
    return std::abs(family[i](w)) / fn;
  });
  return *std::max_element(ratios.begin(), ratios.end());
}

}  // namespace bargmann
