#pragma once

// Fock/Bargmann kernels, the operator Q_alpha = g_alpha P_alpha g_alpha^{-1}
// on Gaussian test functions, the closed-form norm ratio, and the objective
// h_p in matrix and in coordinate form.
//
// Real coordinates: z = x1 + i x2 in C^n is the stacked vector [x1; x2] in
// R^{2n}, so multiplication by i is the matrix J = [[0, -I], [I, 0]].

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bargmann/errors.hpp"
#include "bargmann/gauss_quad.hpp"
#include "bargmann/matrix_core.hpp"
#include "bargmann/polynomial.hpp"

namespace bargmann {

struct OperatorConfig {
  int n = 1;
  double alpha = 1.0;
  double p = 2.0;
  /// p / (p - 1); infinite at p = 1.
  double p_conjugate = 2.0;

  static OperatorConfig make(int n, double alpha, double p) {
    if (n < 1) throw DomainError("OperatorConfig: n must be at least 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("OperatorConfig: alpha must be positive");
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("OperatorConfig: p must lie in [1, inf)");
    return {n, alpha, p, conjugate_exponent(p)};
  }

  static double conjugate_exponent(double p) {
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return p / (p - 1.0);
  }
};

inline double norm_sq(std::span<const cplx> z) {
  double s = 0.0;
  for (const auto& zi : z) s += std::norm(zi);
  return s;
}

/// Sesquilinear <z, w> = sum z_i conj(w_i).
inline cplx sesquilinear(std::span<const cplx> z, std::span<const cplx> w) {
  if (z.size() != w.size()) throw DimensionError("sesquilinear: length mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * std::conj(w[i]);
  return s;
}

/// [Re z; Im z] -> z.
inline std::vector<cplx> to_complex(std::span<const double> x) {
  if (x.size() % 2 != 0) throw DimensionError("to_complex: odd number of real coordinates");
  const std::size_t n = x.size() / 2;
  std::vector<cplx> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = {x[i], x[n + i]};
  return z;
}

inline std::vector<double> to_real(std::span<const cplx> z) {
  const std::size_t n = z.size();
  std::vector<double> x(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = z[i].real();
    x[n + i] = z[i].imag();
  }
  return x;
}

/// e^{alpha <z, w>}.
inline cplx fock_kernel(std::span<const cplx> z, std::span<const cplx> w, const OperatorConfig& cfg) {
  if (static_cast<int>(z.size()) != cfg.n || static_cast<int>(w.size()) != cfg.n)
    throw DimensionError("fock_kernel: vectors must have length n");
  return std::exp(cfg.alpha * sesquilinear(z, w));
}

/// (alpha/pi)^n e^{-alpha/2 (|z|^2 - 2<z, w> + |w|^2)}.
inline cplx q_kernel(std::span<const cplx> z, std::span<const cplx> w, const OperatorConfig& cfg) {
  if (static_cast<int>(z.size()) != cfg.n || static_cast<int>(w.size()) != cfg.n)
    throw DimensionError("q_kernel: vectors must have length n");
  const double scale = std::pow(cfg.alpha / std::numbers::pi, cfg.n);
  return scale * std::exp(-0.5 * cfg.alpha * (norm_sq(z) - 2.0 * sesquilinear(z, w) + norm_sq(w)));
}

/// |q_kernel(z, w)| written as the convolution kernel (alpha/pi)^n e^{-alpha/2 |z-w|^2}.
inline double q_kernel_modulus(std::span<const cplx> z, std::span<const cplx> w, const OperatorConfig& cfg) {
  if (z.size() != w.size()) throw DimensionError("q_kernel_modulus: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) d += std::norm(z[i] - w[i]);
  return std::pow(cfg.alpha / std::numbers::pi, cfg.n) * std::exp(-0.5 * cfg.alpha * d);
}

// ---------------------------------------------------------------------------
// Multiplier map f -> (p alpha / 2 pi)^{n/p} e^{-alpha |z|^2 / 2} f
// ---------------------------------------------------------------------------

enum class MultiplierDirection { Forward, Inverse };

inline double multiplier_scale(const OperatorConfig& cfg) {
  return std::pow(cfg.p * cfg.alpha / (2.0 * std::numbers::pi), cfg.n / cfg.p);
}

/// Multiplier value at z, for the given direction.
inline double multiplier_factor(std::span<const cplx> z, MultiplierDirection dir, const OperatorConfig& cfg) {
  const double fwd_log = std::log(multiplier_scale(cfg)) - 0.5 * cfg.alpha * norm_sq(z);
  return std::exp(dir == MultiplierDirection::Forward ? fwd_log : -fwd_log);
}

/// Pointwise form: values[i] is f(points[i]).
inline std::vector<cplx> multiplier_map(std::span<const cplx> values, std::span<const std::vector<cplx>> points,
                                        MultiplierDirection dir, const OperatorConfig& cfg) {
  if (values.size() != points.size()) throw DimensionError("multiplier_map: values and points differ in length");
  std::vector<cplx> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * multiplier_factor(points[i], dir, cfg);
  return out;
}

/// Callback form: returns z -> (g f)(z) or z -> (g^{-1} f)(z).
template <class F>
auto multiplier_map(F f, MultiplierDirection dir, const OperatorConfig& cfg) {
  return [f = std::move(f), dir, cfg](std::span<const cplx> z) { return f(z) * multiplier_factor(z, dir, cfg); };
}

/// scale * e^{-decay |z|^2} * poly(z, conj z), one complex variable.
struct WeightedPolynomial {
  double scale = 1.0;
  double decay = 0.0;
  MixedPolynomial poly;

  cplx operator()(cplx z) const { return scale * std::exp(-decay * std::norm(z)) * poly(z); }
};

/// Polynomial form (n = 1): the image keeps the polynomial and records the
/// Gaussian factor.
inline WeightedPolynomial multiplier_map(const WeightedPolynomial& f, MultiplierDirection dir,
                                         const OperatorConfig& cfg) {
  if (cfg.n != 1) throw DimensionError("multiplier_map: polynomial form is one-variable");
  WeightedPolynomial out = f;
  const double s = multiplier_scale(cfg);
  if (dir == MultiplierDirection::Forward) {
    out.scale *= s;
    out.decay += 0.5 * cfg.alpha;
  } else {
    out.scale /= s;
    out.decay -= 0.5 * cfg.alpha;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Q_alpha on centered Gaussians and the norm ratio
// ---------------------------------------------------------------------------

namespace detail {

inline void require_even(int dim, const OperatorConfig& cfg, const char* where) {
  if (dim != 2 * cfg.n) throw DimensionError(std::string(where) + ": matrix must be 2n x 2n");
}

inline CMatrix i_plus_ij(int dim, double sign) {
  const RMatrix j = SymplecticJ(dim).matrix();
  CMatrix m = CMatrix::Identity(dim, dim);
  m += sign * cplx{0.0, 1.0} * j.cast<cplx>();
  return m;
}

inline double log_det_spd(const RMatrix& m, const char* what) {
  Eigen::LLT<RMatrix> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) throw DomainError(what);
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += 2.0 * std::log(llt.matrixL()(i, i));
  return s;
}

}  // namespace detail

/// Q_alpha applied to x -> e^{-(x, A x)}: amplitude 2^n / sqrt(det(A' + I))
/// and matrix (alpha/2)[I - (I + iJ)(A' + I)^{-1}(I - iJ)], A' = (2/alpha) A.
inline GaussianFunction apply_q_to_gaussian(const AdmissibleMatrix& a, const OperatorConfig& cfg) {
  const int k = a.dim();
  detail::require_even(k, cfg, "apply_q_to_gaussian");
  const CMatrix m = (2.0 / cfg.alpha) * a.dense() + CMatrix::Identity(k, k);
  const auto lu = detail::checked_lu(m);
  const CMatrix inner = detail::i_plus_ij(k, 1.0) * lu.lu.solve(detail::i_plus_ij(k, -1.0));
  const CMatrix b = 0.5 * cfg.alpha * (CMatrix::Identity(k, k) - inner);
  const cplx amp = std::pow(2.0, cfg.n) / principal_sqrt_det(m);
  return GaussianFunction(amp, AdmissibleMatrix(ComplexSymMatrix::symmetrized(b)), CVector::Zero(k));
}

/// log of ratio^p = 2^{np} sqrt(det Re A' / (|det(A'+I)|^p det(I + Omega((A'+I)^{-1})))),
/// parameterized directly by A'. Valid for every p > 0.
inline double log_ratio_pow_prime(const AdmissibleMatrix& a_prime, double p) {
  if (!(p > 0.0)) throw DomainError("ratio_p: p must be positive");
  const int k = a_prime.dim();
  if (k % 2 != 0) throw DimensionError("ratio_p: matrix dimension must be even");
  const int n = k / 2;
  const CMatrix m = a_prime.dense() + CMatrix::Identity(k, k);
  const auto lu = detail::checked_lu(m);
  const CMatrix m_inv = lu.lu.inverse();
  const RMatrix om = RMatrix::Identity(k, k) + omega(m_inv);
  const double log_det_om = detail::log_det_spd(om, "ratio_p: I + Omega((A'+I)^{-1}) is not positive definite");
  const double log_det_re = detail::log_det_spd(a_prime.real(), "ratio_p: Re(A') is not positive definite");
  return n * p * std::numbers::ln2 + 0.5 * (log_det_re - p * std::log(std::abs(lu.det)) - log_det_om);
}

/// ||Q_alpha g||_p / ||g||_p for g(x) = e^{-(x, A' x)} with A' given directly.
inline double ratio_p_prime(const AdmissibleMatrix& a_prime, double p) {
  return std::exp(log_ratio_pow_prime(a_prime, p) / p);
}

/// ||Q_alpha g||_p / ||g||_p for g(x) = e^{-(x, A x)}.
inline double ratio_p(const AdmissibleMatrix& a, const OperatorConfig& cfg) {
  detail::require_even(a.dim(), cfg, "ratio_p");
  const ComplexSymMatrix scaled = ComplexSymMatrix::from_upper((2.0 / cfg.alpha) * a.dense());
  return ratio_p_prime(AdmissibleMatrix(scaled), cfg.p);
}

/// ratio_p at A' = c I: (2^p c / (1 + c)^p)^{n/p}.
inline double ratio_vs_c(double c, const OperatorConfig& cfg) {
  if (!(c > 0.0)) throw DomainError("ratio_vs_c: c must be positive");
  const AdmissibleMatrix a(ComplexSymMatrix::identity(2 * cfg.n, c));
  return ratio_p_prime(a, cfg.p);
}

/// ||(|Q_alpha|) g|| / ||g|| over real Gaussians whose Re(A') has
/// eigenvalues `eigs`: ratio^p = 2^{np} prod (1 + lambda_i)^{-(p-1)/2}.
inline double abs_q_ratio(std::span<const double> eigs, const OperatorConfig& cfg) {
  if (static_cast<int>(eigs.size()) != 2 * cfg.n) throw DimensionError("abs_q_ratio: need 2n eigenvalues");
  double log_pow = cfg.n * cfg.p * std::numbers::ln2;
  for (double l : eigs) {
    if (!(l > 0.0)) throw DomainError("abs_q_ratio: eigenvalues must be positive");
    log_pow -= 0.5 * (cfg.p - 1.0) * std::log1p(l);
  }
  return std::exp(log_pow / cfg.p);
}

// ---------------------------------------------------------------------------
// h_p
// ---------------------------------------------------------------------------

/// A = [[a + i e, b + i f], [b + i f, d + i g]].
struct HpCoords {
  double a = 1.0, d = 1.0, b = 0.0, e = 0.0, g = 0.0, f = 0.0;

  ComplexSymMatrix to_matrix() const {
    ComplexSymMatrix m(2);
    m.set(0, 0, {a, e});
    m.set(1, 1, {d, g});
    m.set(0, 1, {b, f});
    return m;
  }

  static HpCoords from_matrix(const ComplexSymMatrix& m) {
    if (m.dim() != 2) throw DimensionError("HpCoords: matrix must be 2 x 2");
    return {m(0, 0).real(), m(1, 1).real(), m(0, 1).real(), m(0, 0).imag(), m(1, 1).imag(), m(0, 1).imag()};
  }

  std::array<double, 6> as_array() const { return {a, d, b, e, g, f}; }
  static HpCoords from_array(const std::array<double, 6>& x) { return {x[0], x[1], x[2], x[3], x[4], x[5]}; }

  friend bool operator==(const HpCoords&, const HpCoords&) = default;
};

struct HpEvaluation {
  HpCoords coords;
  double a_tilde = 0.0, d_tilde = 0.0;
  double Psi = 0.0, Phi = 0.0;
  double psi = 0.0, phi = 0.0;
  double tau = 0.0;
  double value = 0.0;
};

namespace detail {

/// Intermediates without the domain checks, for the gradient path.
inline HpEvaluation hp_intermediates(const HpCoords& c) {
  HpEvaluation h;
  h.coords = c;
  h.a_tilde = c.a + 1.0;
  h.d_tilde = c.d + 1.0;
  // det(A + I) = Psi + i Phi
  h.Psi = h.a_tilde * h.d_tilde - c.b * c.b - c.e * c.g + c.f * c.f;
  h.Phi = h.d_tilde * c.e + h.a_tilde * c.g - 2.0 * c.b * c.f;
  h.psi = c.a - c.d + 2.0 * c.f;
  h.phi = c.e - c.g - 2.0 * c.b;
  h.tau = h.Psi * h.Psi + h.Phi * h.Phi - h.psi * h.psi - h.phi * h.phi;
  return h;
}

}  // namespace detail

/// h_p in coordinates: (ad - b^2) / ((Psi^2 + Phi^2)^{(p-2)/2} tau).
inline HpEvaluation hp_coords(const HpCoords& c, double p) {
  if (!(c.a > 0.0) || !(c.d > 0.0) || !(c.a * c.d - c.b * c.b > 0.0))
    throw DomainError("hp_coords: coordinates violate a > 0, d > 0, ad - b^2 > 0");
  HpEvaluation h = detail::hp_intermediates(c);
  if (!(h.tau > 0.0)) throw DomainError("hp_coords: tau is not positive");
  const double s = h.Psi * h.Psi + h.Phi * h.Phi;
  h.value = (c.a * c.d - c.b * c.b) * std::exp(-0.5 * (p - 2.0) * std::log(s)) / h.tau;
  return h;
}

/// h_p(A) = det Re A / (|det(A + I)|^p det(I + Omega((I + A)^{-1}))).
inline double hp_matrix(const AdmissibleMatrix& a, double p) {
  if (a.dim() != 2) throw DimensionError("hp_matrix: matrix must be 2 x 2");
  const CMatrix m = a.dense() + CMatrix::Identity(2, 2);
  const auto lu = detail::checked_lu(m);
  const RMatrix om = RMatrix::Identity(2, 2) + omega(CMatrix(lu.lu.inverse()));
  const double den_det = om.determinant();
  if (!(den_det > 0.0)) throw DomainError("hp_matrix: det(I + Omega((I+A)^{-1})) is not positive");
  const double det_re = a.real().determinant();
  return det_re * std::exp(-p * std::log(std::abs(lu.det))) / den_det;
}

struct TauForms {
  double tau_def = 0.0;
  double tau_form1 = 0.0;
  double tau_form2 = 0.0;
};

/// tau at b = 0 three ways: from the definition and from both expanded
/// sum-of-squares forms.
inline TauForms tau_forms_check(double a, double d, double e, double g, double f) {
  TauForms t;
  t.tau_def = detail::hp_intermediates({a, d, 0.0, e, g, f}).tau;
  const double ad = a * d;
  const double u = ad - e * g + f * f - 1.0;
  const double v = a * g + d * e;
  t.tau_form1 = u * u + 8.0 * ad + 2.0 * ad * (a + d) + 2.0 * a * (f - 1.0) * (f - 1.0) +
                2.0 * d * (f + 1.0) * (f + 1.0) + v * v + 2.0 * (d * e * e + a * g * g);
  const double w = e * g - f * f + 1.0;
  t.tau_form2 = w * w + ad * ad + 2.0 * ad * (a + d) + 6.0 * ad + 2.0 * a * (f - 1.0) * (f - 1.0) +
                2.0 * ad * f * f + 2.0 * d * (f + 1.0) * (f + 1.0) + e * e * (d * d + 2.0 * d) +
                g * g * (a * a + 2.0 * a);
  return t;
}

// ---------------------------------------------------------------------------
// Kernel blocks and tensor products
// ---------------------------------------------------------------------------

/// Blocks of the Gaussian kernel of Q_alpha in real coordinates.
struct KernelBlocks {
  RMatrix d11, d22;
  CMatrix d12;

  /// Real part of [[D11, D12], [D12^T, D22]].
  RMatrix block_real_part() const {
    const auto k = d11.rows();
    RMatrix m(2 * k, 2 * k);
    m << d11, d12.real(), d12.real().transpose(), d22;
    return m;
  }

  /// Positive semidefinite real part, up to -1e-10.
  bool is_admissible() const {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(block_real_part(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -1e-10;
  }
};

inline KernelBlocks kernel_blocks(const OperatorConfig& cfg) {
  const int k = 2 * cfg.n;
  KernelBlocks kb;
  kb.d11 = 0.5 * cfg.alpha * RMatrix::Identity(k, k);
  kb.d22 = kb.d11;
  kb.d12 = -0.5 * cfg.alpha * detail::i_plus_ij(k, 1.0);
  return kb;
}

/// Block matrix of a product of one-variable Gaussians: factor j acts on
/// (Re z_j, Im z_j), which sit at positions (j, n + j) of the stacked vector.
inline ComplexSymMatrix tensor_product_matrix(const std::vector<ComplexSymMatrix>& factors) {
  const int n = static_cast<int>(factors.size());
  if (n == 0) throw DimensionError("tensor_product_matrix: no factors");
  ComplexSymMatrix out(2 * n);
  for (int j = 0; j < n; ++j) {
    if (factors[static_cast<std::size_t>(j)].dim() != 2)
      throw DimensionError("tensor_product_matrix: factors must be 2 x 2");
    const int idx[2] = {j, n + j};
    for (int r = 0; r < 2; ++r)
      for (int c = r; c < 2; ++c) out.set(idx[r], idx[c], factors[static_cast<std::size_t>(j)](r, c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature evaluation of Q_alpha g (independent of the closed forms above)
// ---------------------------------------------------------------------------

/// Q_alpha g at the real point x, by cubature of w -> q_kernel(z, w) g(w).
/// The envelope comes from the quadratic part (alpha/2) I + A of the
/// integrand's exponent; only point values of the kernel and g are summed.
inline QuadratureResult apply_q_by_quadrature(const GaussianFunction& g, std::span<const double> x,
                                              const OperatorConfig& cfg, QuadratureSpec spec = {}) {
  const int k = g.dim();
  detail::require_even(k, cfg, "apply_q_by_quadrature");
  if (static_cast<int>(x.size()) != k) throw DimensionError("apply_q_by_quadrature: point dimension mismatch");
  const std::vector<cplx> z = to_complex(x);
  const CMatrix quad = g.matrix().dense() + 0.5 * cfg.alpha * CMatrix::Identity(k, k);
  // linear part of the exponent: alpha <z, w> + 2 (v, w)
  CVector lin(k);
  for (int i = 0; i < cfg.n; ++i) {
    lin(i) = 0.5 * cfg.alpha * z[static_cast<std::size_t>(i)];
    lin(cfg.n + i) = cplx{0.0, -1.0} * 0.5 * cfg.alpha * z[static_cast<std::size_t>(i)];
  }
  lin += g.shift();
  spec.envelope = oscillation_envelope(quad);
  spec.center = RVector(quad.fullPivLu().solve(lin).real());
  auto integrand = [&](std::span<const double> w) {
    const std::vector<cplx> wz = to_complex(w);
    return q_kernel(z, wz, cfg) * g(w);
  };
  return quadrature_integrate(integrand, k, spec);
}

/// ||Q_alpha g||_p / ||g||_p for g(x) = e^{-(x, A x)} with both norms and
/// Q_alpha g itself computed by cubature. The outer nodes follow the closed
/// form's output matrix, which only places them; values come from
/// apply_q_by_quadrature.
inline double ratio_p_by_quadrature(const AdmissibleMatrix& a, const OperatorConfig& cfg,
                                    const QuadratureSpec& inner = {}) {
  const GaussianFunction g = GaussianFunction::centered(a);
  const GaussianFunction placement = apply_q_to_gaussian(a, cfg);
  QuadratureSpec outer;
  outer.points_per_axis = 8;
  outer.target_rel_tol = std::max(1e-12, inner.target_rel_tol);
  outer = envelope_for(placement, outer, cfg.p);
  auto integrand = [&](std::span<const double> x) {
    const cplx v = apply_q_by_quadrature(g, x, cfg, inner).value;
    return cplx{std::pow(std::abs(v), cfg.p), 0.0};
  };
  const double qg = std::pow(quadrature_integrate(integrand, a.dim(), outer).value.real(), 1.0 / cfg.p);
  const double gp = gaussian_lp_norm_by_quadrature(g, cfg.p, inner);
  return qg / gp;
}

}  // namespace bargmann
