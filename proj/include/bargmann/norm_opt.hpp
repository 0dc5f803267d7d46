#pragma once

// Sharp norm of Q_alpha: j(p), the closed form, the gradient of h_p, a
// quasi-Newton search for its critical point, the compact-set constants
// that confine the maximum, and sampled verification of the global maximum.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bargmann/bargmann_op.hpp"
#include "bargmann/detail/parallel.hpp"
#include "bargmann/errors.hpp"
#include "bargmann/matrix_core.hpp"

namespace bargmann {

/// j(p) = p^{-1/p} p'^{-1/p'}, minimized at p = 2 with value 1/2.
inline double j_function(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("j_function: p must lie in (1, inf)");
  if (p == 2.0) return 0.5;
  const double q = p / (p - 1.0);
  return std::exp(-std::log(p) / p - std::log(q) / q);
}

/// (2 j(p))^n; 2^n at p = 1.
inline double sharp_norm(double p, int n) {
  if (n < 1) throw DomainError("sharp_norm: n must be at least 1");
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("sharp_norm: p must lie in [1, inf)");
  if (p == 1.0) return std::pow(2.0, n);
  return std::pow(2.0 * j_function(p), n);
}

/// Maximum value of h_p: ((p-1)^{p-1} / p^p)^2 = j(p)^{2p}.
inline double critical_value(double p) {
  if (!(p > 1.0)) throw DomainError("critical_value: p must exceed 1");
  if (p == 2.0) return 1.0 / 16.0;
  return std::exp(2.0 * ((p - 1.0) * std::log(p - 1.0) - p * std::log(p)));
}

/// The maximizer (1/(p-1)) I_2 of h_p.
inline HpCoords critical_coords(double p) {
  if (!(p > 1.0)) throw DomainError("critical_coords: p must exceed 1");
  const double c = 1.0 / (p - 1.0);
  return {c, c, 0.0, 0.0, 0.0, 0.0};
}

// ---------------------------------------------------------------------------
// Gradient
// ---------------------------------------------------------------------------

/// Coordinate order (a, d, b, e, g, f).
using HpVector = std::array<double, 6>;

struct HpGradient {
  HpEvaluation eval;
  HpVector grad{};
  /// p tau + 2 (psi^2 + phi^2), the factor multiplying D * (Psi Psi_x + Phi Phi_x).
  double C_p = 0.0;
};

/// dh/dx = [D_x S tau - D P_x C_p + 2 D Q_x S] / (S^{p/2} tau^2) with
/// S = Psi^2 + Phi^2, P_x = Psi Psi_x + Phi Phi_x, Q_x = psi psi_x + phi phi_x.
inline HpGradient hp_gradient_detail(const HpCoords& c, double p) {
  HpGradient out;
  out.eval = hp_coords(c, p);
  const HpEvaluation& h = out.eval;
  const double at = h.a_tilde, dt = h.d_tilde;
  const double D = c.a * c.d - c.b * c.b;
  const double S = h.Psi * h.Psi + h.Phi * h.Phi;
  const double tau = h.tau;
  out.C_p = p * tau + 2.0 * (h.psi * h.psi + h.phi * h.phi);

  //                     a      d      b             e       g      f
  const HpVector Dx = {c.d, c.a, -2.0 * c.b, 0.0, 0.0, 0.0};
  const HpVector Psix = {dt, at, -2.0 * c.b, -c.g, -c.e, 2.0 * c.f};
  const HpVector Phix = {c.g, c.e, -2.0 * c.f, dt, at, -2.0 * c.b};
  const HpVector psix = {1.0, -1.0, 0.0, 0.0, 0.0, 2.0};
  const HpVector phix = {0.0, 0.0, -2.0, 1.0, -1.0, 0.0};

  const double denom_log = 0.5 * p * std::log(S) + 2.0 * std::log(tau);
  const double inv_denom = std::exp(-denom_log);
  for (std::size_t i = 0; i < 6; ++i) {
    const double px = h.Psi * Psix[i] + h.Phi * Phix[i];
    const double qx = h.psi * psix[i] + h.phi * phix[i];
    out.grad[i] = (Dx[i] * S * tau - D * px * out.C_p + 2.0 * D * qx * S) * inv_denom;
  }
  return out;
}

inline HpVector hp_gradient(const HpCoords& c, double p) { return hp_gradient_detail(c, p).grad; }

/// Central differences of h_p; the oracle for hp_gradient.
inline HpVector hp_gradient_fd(const HpCoords& c, double p, double step = 1e-5) {
  HpVector out{};
  const HpVector x = c.as_array();
  for (std::size_t i = 0; i < 6; ++i) {
    HpVector xp = x, xm = x;
    const double hstep = step * std::max(1.0, std::abs(x[i]));
    xp[i] += hstep;
    xm[i] -= hstep;
    out[i] = (hp_coords(HpCoords::from_array(xp), p).value - hp_coords(HpCoords::from_array(xm), p).value) /
             (2.0 * hstep);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bound constants
// ---------------------------------------------------------------------------

struct BoundConstants {
  double p = 0.0;
  double m_ad = 0.0;
  double M_ad = 0.0;
  double M_efg = 0.0;
  /// Gap between the maximum and the largest h_p found in the small-(a, d)
  /// slab: an empirical margin, not a proven constant.
  double numeric_delta = 0.0;
};

namespace detail {

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

inline double signed_log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::bernoulli_distribution coin(0.5);
  const double m = log_uniform(rng, lo, hi);
  return coin(rng) ? m : -m;
}

/// Coordinates of U^T diag(l1, l2) U + i Im with U a rotation by `angle`.
inline HpCoords rotated_coords(double l1, double l2, double angle, double e, double g, double f) {
  const double c = std::cos(angle), s = std::sin(angle);
  HpCoords out;
  out.a = c * c * l1 + s * s * l2;
  out.d = s * s * l1 + c * c * l2;
  out.b = c * s * (l2 - l1);
  out.e = e;
  out.g = g;
  out.f = f;
  return out;
}

/// h_p, or nullopt where rounding makes the coordinates degenerate.
inline std::optional<double> try_hp(const HpCoords& c, double p) {
  try {
    const double v = hp_coords(c, p).value;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

inline std::uint64_t seed_from_double(double p) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(p));
  std::memcpy(&bits, &p, sizeof(p));
  return splitmix64(bits);
}

}  // namespace detail

inline constexpr int kSlabSamples = 10'000;

/// M_ad = j^{-2p/(p-1)} - 1 and M_efg = j^{-2} (2 M_ad^2 + 2 M_ad + 3)^{1/p}
/// in closed form; m_ad is the largest m <= 0.1 (by halving) for which
/// kSlabSamples samples of {min(a, d) <= m, |Re|_2 < M_ad, |Im|_max < M_efg}
/// stay below j^{2p} - 1e-6.
inline BoundConstants bound_constants(double p, std::uint64_t seed = 0) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("bound_constants: p must lie in (1, inf)");
  if (p == 2.0) throw DomainError("bound_constants: the bounds degenerate at p = 2");
  BoundConstants bc;
  bc.p = p;
  const double j = j_function(p);
  bc.M_ad = std::pow(j, -2.0 * p / (p - 1.0)) - 1.0;
  bc.M_efg = std::pow(j, -2.0) * std::pow(2.0 * bc.M_ad * bc.M_ad + 2.0 * bc.M_ad + 3.0, 1.0 / p);
  const double crit = critical_value(p);
  const double threshold = crit - 1e-6;

  double m = std::min(0.1, bc.M_ad);
  for (int halving = 0; halving < 60; ++halving, m *= 0.5) {
    auto rng = detail::make_rng(seed ^ detail::seed_from_double(p), static_cast<std::uint64_t>(halving));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    double worst = 0.0;
    bool violated = false;
    for (int s = 0; s < kSlabSamples; ++s) {
      const double small = m * (1e-9 + (1.0 - 1e-9) * unit(rng));
      const double big = bc.M_ad * unit(rng);
      // Im entries: a quarter near zero, the rest log-spread up to M_efg
      auto im = [&] {
        if (unit(rng) < 0.25) return (2.0 * unit(rng) - 1.0);
        return detail::signed_log_uniform(rng, 1e-6, bc.M_efg);
      };
      const double e = im(), g = im(), f = im();
      HpCoords c = coin(rng) ? HpCoords{small, std::max(big, 1e-12), 0.0, e, g, f}
                             : HpCoords{std::max(big, 1e-12), small, 0.0, e, g, f};
      const auto v = detail::try_hp(c, p);
      if (!v) continue;
      worst = std::max(worst, *v);
      if (*v >= threshold) {
        violated = true;
        break;
      }
    }
    if (!violated) {
      bc.m_ad = m;
      bc.numeric_delta = crit - worst;
      return bc;
    }
  }
  throw ConvergenceError("bound_constants: no slab width found below the maximum");
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct OptimizerOptions {
  int max_iterations = 3000;
  /// Stop once ||grad log h||_inf in the original coordinates is below this.
  double gradient_tol = 1e-10;
  int starts = 32;
};

struct CriticalPointResult {
  HpCoords coords;
  double value = 0.0;
  /// ||grad log h_p||_inf at `coords`.
  double gradient_residual = 0.0;
  int iterations = 0;
  HpCoords start;
  bool converged = false;
};

namespace detail {

// Unconstrained parameters theta = (u, v, w, s_e, s_g, s_f) with
// a = e^u, d = e^v, b = sqrt(ad) tanh(w), e = sinh(s_e), ... Every theta
// maps to an admissible matrix, and the sinh keeps far-out imaginary parts
// within O(1) steps of the origin.
using Theta = Eigen::Matrix<double, 6, 1>;

inline HpCoords coords_from_theta(const Theta& t) {
  HpCoords c;
  c.a = std::exp(t(0));
  c.d = std::exp(t(1));
  c.b = std::sqrt(c.a * c.d) * std::tanh(t(2));
  c.e = std::sinh(t(3));
  c.g = std::sinh(t(4));
  c.f = std::sinh(t(5));
  return c;
}

inline Theta theta_from_coords(const HpCoords& c) {
  Theta t;
  t(0) = std::log(c.a);
  t(1) = std::log(c.d);
  t(2) = std::atanh(std::clamp(c.b / std::sqrt(c.a * c.d), -1.0 + 1e-15, 1.0 - 1e-15));
  t(3) = std::asinh(c.e);
  t(4) = std::asinh(c.g);
  t(5) = std::asinh(c.f);
  return t;
}

struct ObjectiveValue {
  double value;  // -log h
  Theta grad;    // d(-log h)/d theta
  HpVector grad_log_x;
};

inline std::optional<ObjectiveValue> objective(const Theta& t, double p) {
  const HpCoords c = coords_from_theta(t);
  if (!std::isfinite(c.a) || !std::isfinite(c.d) || !std::isfinite(c.e) || !std::isfinite(c.g) ||
      !std::isfinite(c.f))
    return std::nullopt;
  try {
    const HpGradient hg = hp_gradient_detail(c, p);
    const double h = hg.eval.value;
    if (!(h > 0.0) || !std::isfinite(h)) return std::nullopt;
    ObjectiveValue ov;
    ov.value = -std::log(h);
    HpVector gl{};
    for (std::size_t i = 0; i < 6; ++i) gl[i] = hg.grad[i] / h;
    ov.grad_log_x = gl;
    const double sq = std::sqrt(c.a * c.d);
    const double th = std::tanh(t(2));
    // chain rule through the parameterization; b depends on u, v and w
    ov.grad(0) = -(gl[0] * c.a + gl[2] * 0.5 * c.b);
    ov.grad(1) = -(gl[1] * c.d + gl[2] * 0.5 * c.b);
    ov.grad(2) = -(gl[2] * sq * (1.0 - th * th));
    ov.grad(3) = -(gl[3] * std::cosh(t(3)));
    ov.grad(4) = -(gl[4] * std::cosh(t(4)));
    ov.grad(5) = -(gl[5] * std::cosh(t(5)));
    if (!ov.grad.allFinite()) return std::nullopt;
    return ov;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

inline double inf_norm(const HpVector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// BFGS on -log h_p from `start`, with backtracking that rejects steps
/// leaving the domain (tau <= 0 after rounding).
inline CriticalPointResult optimize_hp_from(const HpCoords& start, double p, const OptimizerOptions& opt = {}) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("optimize_hp_from: p must lie in (1, inf)");
  CriticalPointResult res;
  res.start = start;
  detail::Theta t = detail::theta_from_coords(start);
  auto cur = detail::objective(t, p);
  if (!cur) throw DomainError("optimize_hp_from: start point is outside the domain");
  Eigen::Matrix<double, 6, 6> hinv = Eigen::Matrix<double, 6, 6>::Identity();
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double resid = detail::inf_norm(cur->grad_log_x);
    if (resid < opt.gradient_tol) {
      res.converged = true;
      break;
    }
    if (resid < 1e-7) break;  // close enough for the Newton polish below
    detail::Theta dir = -hinv * cur->grad;
    double slope = cur->grad.dot(dir);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      dir = -cur->grad;
      slope = cur->grad.dot(dir);
    }
    // cap the step so one iteration moves each parameter by at most 2
    const double dmax = dir.cwiseAbs().maxCoeff();
    double step = dmax > 2.0 ? 2.0 / dmax : 1.0;
    std::optional<detail::ObjectiveValue> next;
    detail::Theta tn;
    for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
      tn = t + step * dir;
      next = detail::objective(tn, p);
      if (next && next->value <= cur->value + 1e-4 * step * slope) break;
      next.reset();
    }
    if (!next) {
      // no descent along the quasi-Newton direction; restart from steepest descent once
      if (hinv.isIdentity(0.0)) break;
      hinv.setIdentity();
      continue;
    }
    const detail::Theta s = tn - t;
    const detail::Theta y = next->grad - cur->grad;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix<double, 6, 6> i6 = Eigen::Matrix<double, 6, 6>::Identity();
      hinv = (i6 - rho * s * y.transpose()) * hinv * (i6 - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    t = tn;
    cur = next;
  }
  // Near the maximum -log h is flat to rounding and Armijo stalls; finish
  // with damped Newton on the gradient, accepting steps that shrink it.
  if (!res.converged && detail::inf_norm(cur->grad_log_x) < 1e-4) {
    for (int nt = 0; nt < 30 && detail::inf_norm(cur->grad_log_x) >= opt.gradient_tol; ++nt) {
      Eigen::Matrix<double, 6, 6> hess;
      bool ok = true;
      for (int jc = 0; jc < 6 && ok; ++jc) {
        const double hs = 1e-6 * std::max(1.0, std::abs(t(jc)));
        detail::Theta tp = t, tm = t;
        tp(jc) += hs;
        tm(jc) -= hs;
        const auto gp = detail::objective(tp, p);
        const auto gm = detail::objective(tm, p);
        if (!gp || !gm) {
          ok = false;
          break;
        }
        hess.col(jc) = (gp->grad - gm->grad) / (2.0 * hs);
      }
      if (!ok) break;
      hess = 0.5 * (hess + hess.transpose()).eval();
      const detail::Theta delta = -hess.fullPivLu().solve(cur->grad);
      if (!delta.allFinite()) break;
      const double before = detail::inf_norm(cur->grad_log_x);
      bool accepted = false;
      double step = 1.0;
      for (int bt = 0; bt < 12; ++bt, step *= 0.5) {
        const detail::Theta tn = t + step * delta;
        auto next = detail::objective(tn, p);
        if (next && detail::inf_norm(next->grad_log_x) < before) {
          t = tn;
          cur = next;
          accepted = true;
          break;
        }
      }
      ++it;
      if (!accepted) break;
    }
    res.converged = detail::inf_norm(cur->grad_log_x) < opt.gradient_tol;
  }
  res.coords = detail::coords_from_theta(t);
  res.value = std::exp(-cur->value);
  res.gradient_residual = detail::inf_norm(cur->grad_log_x);
  res.iterations = it;
  return res;
}

struct StartSampler {
  double M_ad = 1.0;
  double M_efg = 1.0;
};

/// Start with Re-eigenvalues log-uniform in [1e-2, M_ad], a random
/// rotation, and Im entries uniform in [-M_efg, M_efg].
inline HpCoords random_start(std::mt19937_64& rng, const StartSampler& s) {
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> im(-s.M_efg, s.M_efg);
  const double hi = std::max(s.M_ad, 2e-2);
  const double l1 = detail::log_uniform(rng, 1e-2, hi);
  const double l2 = detail::log_uniform(rng, 1e-2, hi);
  const double th = angle(rng);
  const double e = im(rng), g = im(rng), f = im(rng);
  return detail::rotated_coords(l1, l2, th, e, g, f);
}

/// Start sampler scaled by the bound constants; at p = 2 (where they are
/// undefined) the p = 3 box is used.
inline StartSampler default_start_sampler(double p) {
  const BoundConstants bc = bound_constants(p == 2.0 ? 3.0 : p);
  return {bc.M_ad, bc.M_efg};
}

/// One quasi-Newton run from a start drawn with `seed`. At p = 2 the
/// maximizer I_2 is returned directly.
inline CriticalPointResult find_critical_point(double p, std::uint64_t seed, const OptimizerOptions& opt = {}) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("find_critical_point: p must lie in (1, inf)");
  if (p == 2.0) {
    CriticalPointResult r;
    r.coords = {1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    r.start = r.coords;
    r.value = hp_coords(r.coords, 2.0).value;
    r.gradient_residual = detail::inf_norm(hp_gradient(r.coords, 2.0)) / r.value;
    r.converged = true;
    return r;
  }
  auto rng = detail::make_rng(seed, 0);
  const HpCoords start = random_start(rng, default_start_sampler(p));
  CriticalPointResult r = optimize_hp_from(start, p, opt);
  if (!r.converged) {
    std::ostringstream os;
    os.precision(17);
    os << "find_critical_point: no convergence after " << r.iterations << " iterations; residual "
       << r.gradient_residual << " at (" << r.coords.a << ", " << r.coords.d << ", " << r.coords.b << ", "
       << r.coords.e << ", " << r.coords.g << ", " << r.coords.f << ")";
    throw ConvergenceError(os.str());
  }
  return r;
}

/// `count` independent runs with seeds derived from (seed, i), in index order.
inline std::vector<CriticalPointResult> multi_start(double p, std::uint64_t seed, int count,
                                                    const OptimizerOptions& opt = {}) {
  return detail::parallel_map<CriticalPointResult>(static_cast<std::size_t>(count), [&](std::size_t i) {
    return find_critical_point(p, detail::derive_seed(seed, i), opt);
  });
}

// ---------------------------------------------------------------------------
// Global-maximum verification
// ---------------------------------------------------------------------------

enum class Stratum { InsideK, NearCritical, LargeRe, SmallRe, LargeIm, NearBoundary, Broad };
inline constexpr int kStrata = 7;

inline const char* stratum_name(Stratum s) {
  switch (s) {
    case Stratum::InsideK: return "inside-K";
    case Stratum::NearCritical: return "near-critical";
    case Stratum::LargeRe: return "large-re";
    case Stratum::SmallRe: return "small-re";
    case Stratum::LargeIm: return "large-im";
    case Stratum::NearBoundary: return "near-boundary";
    case Stratum::Broad: return "broad";
  }
  return "?";
}

/// One sample from stratum `s`.
inline HpCoords sample_stratum(Stratum s, std::mt19937_64& rng, const BoundConstants& bc) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  auto im = [&](double hi) {
    if (unit(rng) < 0.2) return 0.0;
    return detail::signed_log_uniform(rng, 1e-4, hi);
  };
  switch (s) {
    case Stratum::InsideK: {
      const double l1 = detail::log_uniform(rng, bc.m_ad, bc.M_ad);
      const double l2 = detail::log_uniform(rng, bc.m_ad, bc.M_ad);
      return detail::rotated_coords(l1, l2, angle(rng), im(bc.M_efg), im(bc.M_efg), im(bc.M_efg));
    }
    case Stratum::NearCritical: {
      HpCoords c = critical_coords(bc.p);
      const double scale = c.a * std::pow(10.0, -6.0 + 5.0 * unit(rng));
      std::normal_distribution<double> nd(0.0, scale);
      c.a = std::abs(c.a + nd(rng));
      c.d = std::abs(c.d + nd(rng));
      c.b = nd(rng);
      c.e = nd(rng);
      c.g = nd(rng);
      c.f = nd(rng);
      // keep Re(A) definite
      const double lim = 0.999 * std::sqrt(c.a * c.d);
      c.b = std::clamp(c.b, -lim, lim);
      return c;
    }
    case Stratum::LargeRe: {
      const double l1 = detail::log_uniform(rng, bc.M_ad, 1e4 * bc.M_ad);
      const double l2 = detail::log_uniform(rng, 1e-3, l1);
      return detail::rotated_coords(l1, l2, angle(rng), im(bc.M_efg), im(bc.M_efg), im(bc.M_efg));
    }
    case Stratum::SmallRe: {
      const double l1 = detail::log_uniform(rng, 1e-8, bc.m_ad);
      const double l2 = detail::log_uniform(rng, 1e-8, 10.0 * bc.M_ad);
      return detail::rotated_coords(l1, l2, angle(rng), im(bc.M_efg), im(bc.M_efg), im(bc.M_efg));
    }
    case Stratum::LargeIm: {
      const double l1 = detail::log_uniform(rng, 1e-3, 10.0 * bc.M_ad);
      const double l2 = detail::log_uniform(rng, 1e-3, 10.0 * bc.M_ad);
      std::array<double, 3> v = {im(bc.M_efg), im(bc.M_efg), im(bc.M_efg)};
      const auto which = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 2)(rng));
      v[which] = detail::signed_log_uniform(rng, 2.0 * bc.M_efg, 1e3 * bc.M_efg);
      return detail::rotated_coords(l1, l2, angle(rng), v[0], v[1], v[2]);
    }
    case Stratum::NearBoundary: {
      // tau vanishes at (a, e, f) = (0, 0, -1) and at (d, g, f) = (0, 0, 1)
      const double small = detail::log_uniform(rng, 1e-9, 1e-2);
      const double other = detail::log_uniform(rng, 1e-3, 10.0 * bc.M_ad);
      const double de = detail::signed_log_uniform(rng, 1e-9, 1e-1);
      const double df = detail::signed_log_uniform(rng, 1e-9, 1e-1);
      const double farg = im(bc.M_efg);
      if (unit(rng) < 0.5) return {small, other, 0.0, de, farg, -1.0 + df};
      return {other, small, 0.0, farg, de, 1.0 + df};
    }
    case Stratum::Broad: {
      const double l1 = detail::log_uniform(rng, 1e-6, 1e6);
      const double l2 = detail::log_uniform(rng, 1e-6, 1e6);
      auto wide = [&] { return unit(rng) < 0.2 ? 0.0 : detail::signed_log_uniform(rng, 1e-6, 1e6); };
      return detail::rotated_coords(l1, l2, angle(rng), wide(), wide(), wide());
    }
  }
  return {};
}

struct StratumSummary {
  Stratum stratum = Stratum::InsideK;
  long long samples = 0;
  long long degenerate = 0;
  double max_value = 0.0;
  HpCoords argmax;
};

struct GlobalMaxReport {
  double p = 0.0;
  double critical_value = 0.0;
  BoundConstants bounds;
  long long samples_checked = 0;
  long long degenerate_samples = 0;
  double max_sample_value = 0.0;
  HpCoords max_sample_coords;
  std::vector<StratumSummary> strata;
  std::vector<CriticalPointResult> starts;
  double max_start_value = 0.0;
};

inline std::string coords_to_string(const HpCoords& c) {
  std::ostringstream os;
  os.precision(17);
  os << "a=" << c.a << " d=" << c.d << " b=" << c.b << " e=" << c.e << " g=" << c.g << " f=" << c.f;
  return os.str();
}

inline constexpr double kSampleSlack = 1e-12;
inline constexpr double kStartSlack = 1e-9;
inline constexpr std::size_t kSampleChunk = 1024;

/// Stratified sampling of h_p plus multi-start optimization. Throws
/// CounterexampleError when a sample exceeds the maximum by more than 1e-12
/// or a converged start by more than 1e-9.
inline GlobalMaxReport verify_global_max(double p, long long sample_budget, std::uint64_t seed, int starts = 32) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("verify_global_max: p must lie in (1, inf)");
  if (sample_budget < 0) throw DomainError("verify_global_max: negative budget");
  GlobalMaxReport rep;
  rep.p = p;
  rep.critical_value = critical_value(p);
  // at p = 2 the constants are undefined; the p = 3 boxes still cover the search space
  rep.bounds = bound_constants(p == 2.0 ? 3.0 : p, seed);
  rep.bounds.p = p;

  const long long per = sample_budget / kStrata;
  for (int si = 0; si < kStrata; ++si) {
    const auto s = static_cast<Stratum>(si);
    const long long count = per + (si == 0 ? sample_budget - per * kStrata : 0);
    const std::size_t chunks = static_cast<std::size_t>((count + kSampleChunk - 1) / kSampleChunk);
    auto parts = detail::parallel_map<StratumSummary>(chunks, [&](std::size_t ci) {
      StratumSummary sum;
      sum.stratum = s;
      auto rng = detail::make_rng(detail::derive_seed(seed, static_cast<std::uint64_t>(si) + 1), ci);
      const long long lo = static_cast<long long>(ci * kSampleChunk);
      const long long hi = std::min<long long>(count, lo + static_cast<long long>(kSampleChunk));
      for (long long i = lo; i < hi; ++i) {
        const HpCoords c = sample_stratum(s, rng, rep.bounds);
        ++sum.samples;
        const auto v = detail::try_hp(c, p);
        if (!v) {
          ++sum.degenerate;
          continue;
        }
        if (*v > sum.max_value) {
          sum.max_value = *v;
          sum.argmax = c;
        }
      }
      return sum;
    });
    StratumSummary total;
    total.stratum = s;
    for (const auto& part : parts) {
      total.samples += part.samples;
      total.degenerate += part.degenerate;
      if (part.max_value > total.max_value) {
        total.max_value = part.max_value;
        total.argmax = part.argmax;
      }
    }
    rep.samples_checked += total.samples;
    rep.degenerate_samples += total.degenerate;
    if (total.max_value > rep.max_sample_value) {
      rep.max_sample_value = total.max_value;
      rep.max_sample_coords = total.argmax;
    }
    rep.strata.push_back(total);
    if (total.max_value > rep.critical_value + kSampleSlack)
      throw CounterexampleError(std::string("verify_global_max: sample in stratum ") + stratum_name(s) +
                                    " exceeds the maximum",
                                coords_to_string(total.argmax));
  }

  rep.starts = multi_start(p, detail::derive_seed(seed, 0xC0FFEE), starts);
  for (const auto& r : rep.starts) {
    rep.max_start_value = std::max(rep.max_start_value, r.value);
    if (r.value > rep.critical_value + kStartSlack)
      throw CounterexampleError("verify_global_max: optimizer run exceeds the maximum", coords_to_string(r.coords));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// One-variable norm from a maximizer of h_p: 2 h^{1/(2p)}.
inline double norm_from_hp(double h, double p) { return 2.0 * std::pow(h, 1.0 / (2.0 * p)); }

/// (optimizer-confirmed one-variable norm)^n. p = 1 has no critical point
/// to search for and returns the limit 2^n.
inline double tensorized_norm(double p, int n, std::uint64_t seed = 42) {
  if (n < 1) throw DomainError("tensorized_norm: n must be at least 1");
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("tensorized_norm: p must lie in [1, inf)");
  if (p == 1.0) return std::pow(2.0, n);
  const CriticalPointResult r = find_critical_point(p, seed);
  return std::pow(norm_from_hp(r.value, p), n);
}

struct NormReport {
  OperatorConfig cfg;
  double closed_form_norm = 0.0;
  double optimized_norm = 0.0;
  /// A' = (2/alpha) A of the maximizing Gaussian, 2n x 2n.
  AdmissibleMatrix maximizer{ComplexSymMatrix::identity(2)};
  double gradient_residual = 0.0;
  long long samples_checked = 0;
  double max_sample_value = 0.0;
  int starts = 0;
  std::string method;
};

/// Closed-form and optimizer-confirmed norm of Q_alpha on L^p(C^n). With
/// sample_budget > 0 the global-maximum sampling runs as well.
inline NormReport compute_norm(const OperatorConfig& cfg, std::uint64_t seed = 42, long long sample_budget = 0,
                               int starts = 32) {
  NormReport rep;
  rep.cfg = cfg;
  rep.closed_form_norm = sharp_norm(cfg.p, cfg.n);
  if (cfg.p == 1.0) {
    // no interior maximizer: the ratio along A' = c I increases to 2^n
    const double c = 1e6;
    rep.optimized_norm = ratio_vs_c(c, cfg);
    rep.maximizer = AdmissibleMatrix(ComplexSymMatrix::identity(2 * cfg.n, c));
    rep.method = "ratio along A'=cI at c=1e6";
    return rep;
  }
  CriticalPointResult best;
  if (cfg.p == 2.0) {
    best = find_critical_point(2.0, seed);
    rep.method = "p=2 maximizer I";
  } else {
    const auto runs = multi_start(cfg.p, seed, starts);
    best = runs.front();
    for (const auto& r : runs)
      if (r.value > best.value) best = r;
    rep.starts = starts;
    rep.method = "bfgs multi-start, tensorized";
  }
  rep.optimized_norm = std::pow(norm_from_hp(best.value, cfg.p), cfg.n);
  rep.gradient_residual = best.gradient_residual;
  std::vector<ComplexSymMatrix> factors(static_cast<std::size_t>(cfg.n), best.coords.to_matrix());
  rep.maximizer = AdmissibleMatrix(tensor_product_matrix(factors));
  if (sample_budget > 0 && cfg.p != 2.0) {
    const GlobalMaxReport g = verify_global_max(cfg.p, sample_budget, seed, starts);
    rep.samples_checked = g.samples_checked;
    rep.max_sample_value = g.max_sample_value;
  }
  return rep;
}

/// Golden-section maximization of a unimodal f on [lo, hi].
inline std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                                    double tol = 1e-12) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x)};
}

}  // namespace bargmann
