#pragma once

// Closed-form Gaussian integrals over R^k, and a brute-force cubature used
// as an independent check of every closed form in the library.
//
// The cubature never uses a determinant or inverse of the complex matrix:
// it only sees point values of the integrand, plus a real positive definite
// "envelope" S and center c that fix the change of variables
// x = c + L^{-T} y with S = L L^T.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bargmann/detail/parallel.hpp"
#include "bargmann/errors.hpp"
#include "bargmann/matrix_core.hpp"

namespace bargmann {

/// x -> c * exp(-(x, A x) + 2 (v, x)) on R^k with the bilinear pairing.
class GaussianFunction {
 public:
  GaussianFunction(cplx amplitude, AdmissibleMatrix matrix, CVector shift)
      : amplitude_(amplitude), matrix_(std::move(matrix)), shift_(std::move(shift)) {
    if (shift_.size() != matrix_.dim())
      throw DimensionError("GaussianFunction: shift length must equal matrix dimension");
    cache();
  }

  /// e^{-(x, A x)}.
  static GaussianFunction centered(AdmissibleMatrix matrix) {
    const int k = matrix.dim();
    return GaussianFunction(1.0, std::move(matrix), CVector::Zero(k));
  }

  int dim() const noexcept { return matrix_.dim(); }
  cplx amplitude() const noexcept { return amplitude_; }
  const AdmissibleMatrix& matrix() const noexcept { return matrix_; }
  const CVector& shift() const noexcept { return shift_; }

  /// Membership in the centered family: v == 0 and c == 1.
  bool is_centered() const { return amplitude_ == cplx{1.0, 0.0} && shift_.isZero(0.0); }

  cplx operator()(std::span<const double> x) const {
    const int k = dim();
    cplx q{0.0, 0.0};
    for (int i = 0; i < k; ++i) {
      cplx row{0.0, 0.0};
      for (int j = 0; j < k; ++j) row += a_[static_cast<std::size_t>(i * k + j)] * x[j];
      q += x[i] * row;
    }
    cplx lin{0.0, 0.0};
    for (int i = 0; i < k; ++i) lin += v_[static_cast<std::size_t>(i)] * x[i];
    return amplitude_ * std::exp(-q + 2.0 * lin);
  }

  cplx operator()(const RVector& x) const { return (*this)(std::span<const double>(x.data(), x.size())); }

 private:
  void cache() {
    const int k = dim();
    const CMatrix a = matrix_.dense();
    a_.resize(static_cast<std::size_t>(k * k));
    v_.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      v_[static_cast<std::size_t>(i)] = shift_(i);
      for (int j = 0; j < k; ++j) a_[static_cast<std::size_t>(i * k + j)] = a(i, j);
    }
  }

  cplx amplitude_;
  AdmissibleMatrix matrix_;
  CVector shift_;
  std::vector<cplx> a_;
  std::vector<cplx> v_;
};

/// c * pi^{k/2} / sqrt(det A) * e^{(v, A^{-1} v)}, with sqrt(det A) on the
/// principal eigenvalue-log branch.
inline cplx gaussian_integral(const GaussianFunction& g) {
  const int k = g.dim();
  const CMatrix a = g.matrix().dense();
  const cplx sqrt_det = principal_sqrt_det(a);
  const CVector v = g.shift();
  cplx quad{0.0, 0.0};
  if (!v.isZero(0.0)) {
    const CVector sol = detail::checked_lu(a).lu.solve(v);
    quad = (v.transpose() * sol)(0, 0);
  }
  return g.amplitude() * std::pow(std::numbers::pi, 0.5 * k) / sqrt_det * std::exp(quad);
}

/// ||e^{-(x, A x)}||_p = (pi^{k/2} / sqrt(det(p Re A)))^{1/p}. Depends only
/// on Re(A).
inline double gaussian_lp_norm(const AdmissibleMatrix& a, double p) {
  if (!(p > 0.0)) throw DomainError("gaussian_lp_norm: p must be positive");
  const int k = a.dim();
  Eigen::LLT<RMatrix> llt(a.real());
  if (llt.info() != Eigen::Success) throw DomainError("gaussian_lp_norm: Re(A) is not positive definite");
  double log_det_re = 0.0;
  for (int i = 0; i < k; ++i) log_det_re += 2.0 * std::log(llt.matrixL()(i, i));
  const double log_norm_p = 0.5 * k * std::log(std::numbers::pi) - 0.5 * (k * std::log(p) + log_det_re);
  return std::exp(log_norm_p / p);
}

// ---------------------------------------------------------------------------
// Cubature
// ---------------------------------------------------------------------------

enum class QuadratureScheme { TensorGaussHermite, AdaptiveCartesian };

inline constexpr int kMaxQuadratureDim = 4;
inline constexpr int kMaxHermitePoints = 256;

struct QuadratureSpec {
  QuadratureScheme scheme = QuadratureScheme::TensorGaussHermite;
  int points_per_axis = 64;
  /// Half-width of the integration box in whitened units (AdaptiveCartesian).
  double truncation_radius = 10.0;
  double target_rel_tol = 1e-10;
  /// Real SPD k x k matrix S of the reference weight e^{-(x - c, S (x - c))};
  /// empty means the identity.
  RMatrix envelope;
  /// Center c of the reference weight; empty means the origin.
  RVector center;
  /// Cap on integrand evaluations across all refinement levels.
  long long max_evaluations = 40'000'000;
  /// When false, an unconverged run returns its last level instead of
  /// throwing; the caller then owns the accuracy question.
  bool throw_on_failure = true;

  void validate(int k) const {
    if (points_per_axis < 8) throw DomainError("QuadratureSpec: points_per_axis must be at least 8");
    if (!(target_rel_tol >= 1e-12)) throw DomainError("QuadratureSpec: target_rel_tol must be at least 1e-12");
    if (!(truncation_radius > 0.0)) throw DomainError("QuadratureSpec: truncation_radius must be positive");
    if (envelope.size() != 0 && (envelope.rows() != k || envelope.cols() != k))
      throw DimensionError("QuadratureSpec: envelope shape does not match dimension");
    if (center.size() != 0 && center.size() != k)
      throw DimensionError("QuadratureSpec: center length does not match dimension");
  }
};

struct QuadratureResult {
  cplx value;
  double error_estimate = 0.0;
  /// Integral of |f|, the scale against which cancellation is judged.
  double abs_mass = 0.0;
  int points_per_axis = 0;
  long long evaluations = 0;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// N-point Gauss-Hermite rule for the weight e^{-y^2}, returned with
/// "scaled" weights w_i e^{y_i^2} so that sum W_i f(y_i) ~ int f dy.
/// Nodes are seeded by Golub-Welsch and polished by Newton on the
/// orthonormal recurrence, which keeps the tiny outer weights accurate in a
/// relative sense.
inline QuadratureRule gauss_hermite_scaled(int n) {
  if (n < 1 || n > kMaxHermitePoints) throw DomainError("gauss_hermite_scaled: unsupported order");
  RVector diag = RVector::Zero(n);
  RVector sub(std::max(n - 1, 0));
  for (int i = 1; i < n; ++i) sub(i - 1) = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<RMatrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double p0 = std::pow(std::numbers::pi, -0.25);
  for (int i = 0; i < n; ++i) {
    double y = es.eigenvalues()(i);
    double pm1 = 0.0;
    for (int it = 0; it < 8; ++it) {
      double pj = p0, pjm1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double next = y * std::sqrt(2.0 / j) * pj - std::sqrt((j - 1.0) / j) * pjm1;
        pjm1 = pj;
        pj = next;
      }
      pm1 = pjm1;
      const double deriv = std::sqrt(2.0 * n) * pm1;
      const double step = pj / deriv;
      y -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(y))) break;
    }
    // recompute p_{n-1} at the polished node
    double pj = p0, pjm1 = 0.0;
    for (int j = 1; j < n; ++j) {
      const double next = y * std::sqrt(2.0 / j) * pj - std::sqrt((j - 1.0) / j) * pjm1;
      pjm1 = pj;
      pj = next;
    }
    rule.nodes[static_cast<std::size_t>(i)] = y;
    rule.weights[static_cast<std::size_t>(i)] = std::exp(y * y) / (n * pj * pj);
  }
  return rule;
}

/// n-point Gauss-Legendre rule on [-1, 1].
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be positive");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (x * p1 - p2) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

namespace detail {

struct Whitening {
  RMatrix map;  // L^{-T}
  RVector center;
  double jacobian = 1.0;
};

inline Whitening whitening_for(int k, const QuadratureSpec& spec) {
  Whitening w;
  w.center = spec.center.size() ? spec.center : RVector::Zero(k);
  if (spec.envelope.size() == 0) {
    w.map = RMatrix::Identity(k, k);
    return w;
  }
  Eigen::LLT<RMatrix> llt(0.5 * (spec.envelope + spec.envelope.transpose()));
  if (llt.info() != Eigen::Success) throw DomainError("quadrature: envelope is not positive definite");
  const RMatrix l = llt.matrixL();
  w.map = l.transpose().triangularView<Eigen::Upper>().solve(RMatrix::Identity(k, k));
  double det_l = 1.0;
  for (int i = 0; i < k; ++i) det_l *= l(i, i);
  w.jacobian = 1.0 / det_l;
  return w;
}

struct PartialSum {
  cplx value{0.0, 0.0};
  double abs_mass = 0.0;
};

/// Tensor-product sum of f over the rule on every axis, in a fixed order.
template <class F>
PartialSum tensor_sum(const F& f, int k, const QuadratureRule& rule, const Whitening& w) {
  const int n = static_cast<int>(rule.nodes.size());
  auto outer = [&](std::size_t i0) {
    PartialSum acc;
    std::array<int, kMaxQuadratureDim> idx{};
    idx[0] = static_cast<int>(i0);
    std::array<double, kMaxQuadratureDim> y{};
    std::array<double, kMaxQuadratureDim> x{};
    long long inner = 1;
    for (int d = 1; d < k; ++d) inner *= n;
    for (long long t = 0; t < inner; ++t) {
      long long rem = t;
      for (int d = k - 1; d >= 1; --d) {
        idx[static_cast<std::size_t>(d)] = static_cast<int>(rem % n);
        rem /= n;
      }
      double weight = 1.0;
      for (int d = 0; d < k; ++d) {
        const auto id = static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]);
        y[static_cast<std::size_t>(d)] = rule.nodes[id];
        weight *= rule.weights[id];
      }
      for (int r = 0; r < k; ++r) {
        double s = w.center(r);
        for (int c = 0; c < k; ++c) s += w.map(r, c) * y[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(r)] = s;
      }
      const cplx fx = f(std::span<const double>(x.data(), static_cast<std::size_t>(k)));
      acc.value += weight * fx;
      acc.abs_mass += weight * std::abs(fx);
    }
    return acc;
  };
  const auto parts = parallel_map<PartialSum>(static_cast<std::size_t>(n), outer);
  PartialSum total;
  for (const auto& p : parts) {
    total.value += p.value;
    total.abs_mass += p.abs_mass;
  }
  total.value *= w.jacobian;
  total.abs_mass *= w.jacobian;
  return total;
}

inline QuadratureRule composite_legendre(int panels, double radius) {
  static const QuadratureRule base = gauss_legendre(8);
  QuadratureRule rule;
  const double h = 2.0 * radius / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -radius + (p + 0.5) * h;
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      rule.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
      rule.weights.push_back(0.5 * h * base.weights[i]);
    }
  }
  return rule;
}

inline long long ipow(long long b, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Below this fraction of int |f|, a result counts as pure cancellation and
// the tolerance is applied against the absolute mass instead.
inline constexpr double kCancellationFloor = 1e-3;

}  // namespace detail

/// Integrates f: R^k -> C (k <= 4) by tensor cubature, refining by a factor of
/// about 1.5 until two successive levels agree to target_rel_tol. The reported error estimate is
/// the difference between the last two levels.
template <class F>
QuadratureResult quadrature_integrate(const F& f, int k, const QuadratureSpec& spec) {
  if (k < 1) throw DimensionError("quadrature_integrate: dimension must be positive");
  if (k > kMaxQuadratureDim)
    throw UnsupportedDimensionError("quadrature_integrate: at most 4 dimensions are supported");
  spec.validate(k);
  const detail::Whitening w = detail::whitening_for(k, spec);

  auto converged = [&](const detail::PartialSum& cur, double err) {
    const double scale = std::max(std::abs(cur.value), detail::kCancellationFloor * cur.abs_mass);
    return err <= spec.target_rel_tol * scale;
  };

  QuadratureResult result;
  if (spec.scheme == QuadratureScheme::TensorGaussHermite) {
    int n = std::min(spec.points_per_axis, kMaxHermitePoints);
    int coarse = std::max(4, (3 * n) / 4);
    detail::PartialSum prev = detail::tensor_sum(f, k, gauss_hermite_scaled(coarse), w);
    long long evals = detail::ipow(coarse, k);
    while (true) {
      const detail::PartialSum cur = detail::tensor_sum(f, k, gauss_hermite_scaled(n), w);
      evals += detail::ipow(n, k);
      const double err = std::abs(cur.value - prev.value);
      result = {cur.value, err, cur.abs_mass, n, evals};
      if (converged(cur, err)) return result;
      const int next = std::min(kMaxHermitePoints, 2 * ((3 * n + 3) / 4));
      if (next <= n || detail::ipow(next, k) > spec.max_evaluations - evals) break;
      prev = cur;
      n = next;
    }
  } else {
    int panels = std::max(1, spec.points_per_axis / 8);
    const double r = spec.truncation_radius;
    detail::PartialSum prev = detail::tensor_sum(f, k, detail::composite_legendre(panels, r), w);
    long long evals = detail::ipow(8LL * panels, k);
    while (true) {
      const int next = 2 * panels;
      const long long cost = detail::ipow(8LL * next, k);
      if (evals + cost > spec.max_evaluations) break;
      const detail::PartialSum cur = detail::tensor_sum(f, k, detail::composite_legendre(next, r), w);
      evals += cost;
      const double err = std::abs(cur.value - prev.value);
      result = {cur.value, err, cur.abs_mass, 8 * next, evals};
      if (converged(cur, err)) return result;
      prev = cur;
      panels = next;
    }
  }
  if (!spec.throw_on_failure) return result;
  throw ConvergenceError("quadrature_integrate: error estimate " + std::to_string(result.error_estimate) +
                         " above tolerance after " + std::to_string(result.evaluations) + " evaluations");
}

/// Real SPD scaling for integrating e^{-(x, Q x)} with complex symmetric Q
/// of positive definite real part R and imaginary part M: the geometric mean
/// R # (R + M R^{-1} M). In the frame where both parts are diagonal this
/// picks the Hermite scale |q_ii| on every axis, which minimizes the
/// spectral convergence rate on the residual oscillation. Only the
/// coordinates change; the integrand is still sampled pointwise.
inline RMatrix oscillation_envelope(const CMatrix& q) {
  const RMatrix r = 0.5 * (q.real() + q.real().transpose());
  const RMatrix m = 0.5 * (q.imag() + q.imag().transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> er(r);
  if (er.eigenvalues().minCoeff() <= 0.0) throw DomainError("oscillation_envelope: real part is not positive definite");
  const RMatrix r_half = er.operatorSqrt();
  const RMatrix r_ihalf = er.operatorInverseSqrt();
  const RMatrix mw = r_ihalf * m * r_ihalf;
  Eigen::SelfAdjointEigenSolver<RMatrix> em(mw);
  const RVector scale = (1.0 + em.eigenvalues().array().square()).sqrt();
  const RMatrix inner = em.eigenvectors() * scale.asDiagonal() * em.eigenvectors().transpose();
  const RMatrix s = r_half * inner * r_half;
  return 0.5 * (s + s.transpose());
}

/// Reference weight for g: the oscillation envelope of A, centered at the
/// real part of the complex peak A^{-1} v. `power` > 0 switches to the
/// non-oscillatory |g|^power, whose envelope is power * Re(A).
inline QuadratureSpec envelope_for(const GaussianFunction& g, QuadratureSpec base = {}, double power = 0.0) {
  const CMatrix a = g.matrix().dense();
  if (power > 0.0) {
    const RMatrix re = a.real();
    base.envelope = power * re;
    base.center = re.llt().solve(RVector(g.shift().real()));
  } else {
    base.envelope = oscillation_envelope(a);
    base.center = g.shift().isZero(0.0) ? RVector::Zero(g.dim()) : RVector(a.fullPivLu().solve(g.shift()).real());
  }
  return base;
}

/// Quadrature estimate of int g, using only point values of g.
inline QuadratureResult gaussian_integral_by_quadrature(const GaussianFunction& g, QuadratureSpec spec = {}) {
  return quadrature_integrate(g, g.dim(), envelope_for(g, std::move(spec)));
}

/// Quadrature estimate of ||g||_p.
inline double gaussian_lp_norm_by_quadrature(const GaussianFunction& g, double p, QuadratureSpec spec = {}) {
  if (!(p > 0.0)) throw DomainError("gaussian_lp_norm_by_quadrature: p must be positive");
  auto integrand = [&](std::span<const double> x) { return cplx{std::pow(std::abs(g(x)), p), 0.0}; };
  const auto r = quadrature_integrate(integrand, g.dim(), envelope_for(g, std::move(spec), p));
  return std::pow(r.value.real(), 1.0 / p);
}

}  // namespace bargmann
