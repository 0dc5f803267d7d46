#pragma once

// Property suites run by `verify`. Each check reports the worst residual
// against its tolerance; a failing check carries the case that broke it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bargmann/bargmann.hpp"
#include "report_io.hpp"

namespace bargmann::cli {

struct CheckResult {
  std::string name;
  bool passed = true;
  double residual = 0.0;
  double tol = 0.0;
  std::string failing_case;
};

struct SuiteContext {
  std::uint64_t seed = 42;
  long long budget = 100'000;
};

namespace suites {

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
inline double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Tracks the worst residual of a check and the case that produced it.
struct Tracker {
  CheckResult r;
  Tracker(std::string name, double tol) {
    r.name = std::move(name);
    r.tol = tol;
  }
  void observe(double residual, const std::function<std::string()>& describe) {
    if (!(residual <= r.residual)) {
      r.residual = std::isnan(residual) ? std::numeric_limits<double>::infinity() : residual;
      if (!(residual <= r.tol)) {
        r.passed = false;
        r.failing_case = describe();
      }
    }
  }
  void fail(const std::string& why) {
    r.passed = false;
    r.residual = std::numeric_limits<double>::infinity();
    r.failing_case = why;
  }
  CheckResult done() { return r; }
};

/// Admissible k x k matrix with Re-eigenvalues in [lo, hi] and symmetric
/// imaginary part with entries in [-im, im].
inline AdmissibleMatrix random_admissible(std::mt19937_64& rng, int k, double lo, double hi, double im) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), ev(lo, hi);
  RMatrix raw(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) raw(i, j) = u(rng);
  const RMatrix q = raw.householderQr().householderQ();
  RVector lam(k);
  for (int i = 0; i < k; ++i) lam(i) = ev(rng);
  RMatrix re = q * lam.asDiagonal() * q.transpose();
  re = 0.5 * (re + re.transpose()).eval();
  RMatrix imm(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) imm(i, j) = imm(j, i) = im * u(rng);
  return AdmissibleMatrix(ComplexSymMatrix::from_parts(re, imm));
}

inline std::vector<CheckResult> quadrature(const SuiteContext& ctx) {
  std::vector<CheckResult> out;
  auto rng = detail::make_rng(ctx.seed, 1);
  {
    Tracker t("quadrature/gaussian-integral-oracle", 1e-7);
    for (int c = 0; c < 12; ++c) {
      const int k = 1 + c % 3;
      const AdmissibleMatrix a = random_admissible(rng, k, 0.5, 3.0, 1.0);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      CVector v(k);
      for (int i = 0; i < k; ++i) v(i) = {u(rng), u(rng)};
      const GaussianFunction g({1.0, 0.0}, a, v);
      const cplx exact = gaussian_integral(g);
      const cplx q = gaussian_integral_by_quadrature(g).value;
      t.observe(rel(q, exact), [&] { return "A=" + a.matrix().to_string(); });
    }
    out.push_back(t.done());
  }
  {
    Tracker t("quadrature/lp-norm-oracle", 1e-8);
    for (int c = 0; c < 8; ++c) {
      const AdmissibleMatrix a = random_admissible(rng, 2, 0.5, 3.0, 2.0);
      const double p = 3.0;
      const double exact = gaussian_lp_norm(a, p);
      const double q = gaussian_lp_norm_by_quadrature(GaussianFunction::centered(a), p);
      t.observe(rel(q, exact), [&] { return "A=" + a.matrix().to_string(); });
    }
    out.push_back(t.done());
  }
  {
    Tracker t("quadrature/block-tensorization", 1e-12);
    for (int c = 0; c < 20; ++c) {
      const AdmissibleMatrix a1 = random_admissible(rng, 2, 0.2, 3.0, 2.0);
      const AdmissibleMatrix a2 = random_admissible(rng, 1, 0.2, 3.0, 2.0);
      CMatrix blk = CMatrix::Zero(3, 3);
      blk.topLeftCorner(2, 2) = a1.dense();
      blk(2, 2) = a2(0, 0);
      const AdmissibleMatrix a(ComplexSymMatrix::from_upper(blk));
      const cplx whole = gaussian_integral(GaussianFunction::centered(a));
      const cplx prod = gaussian_integral(GaussianFunction::centered(a1)) * gaussian_integral(GaussianFunction::centered(a2));
      t.observe(rel(whole, prod), [&] { return "A=" + a.matrix().to_string(); });
    }
    out.push_back(t.done());
  }
  return out;
}

inline HpCoords random_coords(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.1, 5.0), im(-3.0, 3.0), ang(0.0, std::numbers::pi);
  const double l1 = pos(rng), l2 = pos(rng), th = ang(rng);
  const double c = std::cos(th), s = std::sin(th);
  return {c * c * l1 + s * s * l2, s * s * l1 + c * c * l2, c * s * (l2 - l1), im(rng), im(rng), im(rng)};
}

inline std::vector<CheckResult> hp(const SuiteContext& ctx) {
  std::vector<CheckResult> out;
  auto rng = detail::make_rng(ctx.seed, 2);
  {
    Tracker t("hp/tau-identities", 1e-12);
    const long long count = std::min<long long>(10'000, std::max<long long>(ctx.budget, 100));
    std::uniform_real_distribution<double> pos(0.1, 5.0), im(-5.0, 5.0);
    for (long long i = 0; i < count; ++i) {
      const double a = pos(rng), d = pos(rng), e = im(rng), g = im(rng), f = im(rng);
      const TauForms tf = tau_forms_check(a, d, e, g, f);
      const double r = std::max(rel(tf.tau_form1, tf.tau_def), rel(tf.tau_form2, tf.tau_def));
      t.observe(r, [&] { return coords_to_string({a, d, 0.0, e, g, f}); });
    }
    out.push_back(t.done());
  }
  {
    Tracker t("hp/matrix-coords-agreement", 1e-12);
    for (int i = 0; i < 1000; ++i) {
      const HpCoords c = random_coords(rng);
      const double p = std::uniform_real_distribution<double>(1.1, 10.0)(rng);
      const double hm = hp_matrix(AdmissibleMatrix(c.to_matrix()), p);
      const double hc = hp_coords(c, p).value;
      t.observe(rel(hc, hm), [&] { return coords_to_string(c) + " p=" + fmt(p); });
    }
    out.push_back(t.done());
  }
  {
    Tracker t("hp/rotation-invariance", 1e-10);
    for (int i = 0; i < 100; ++i) {
      const HpCoords c = random_coords(rng);
      const Rotation2 u{std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng)};
      const double p = 3.0;
      const AdmissibleMatrix a(c.to_matrix());
      t.observe(rel(hp_matrix(conjugate_so2(a, u), p), hp_matrix(a, p)),
                [&] { return coords_to_string(c) + " angle=" + fmt(u.angle); });
    }
    out.push_back(t.done());
  }
  {
    Tracker t("hp/swap-symmetry", 1e-12);
    std::uniform_real_distribution<double> pos(0.1, 5.0), im(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
      const HpCoords c{pos(rng), pos(rng), 0.0, im(rng), im(rng), im(rng)};
      const HpCoords s{c.d, c.a, 0.0, c.g, c.e, -c.f};
      t.observe(rel(hp_coords(s, 4.0).value, hp_coords(c, 4.0).value), [&] { return coords_to_string(c); });
    }
    out.push_back(t.done());
  }
  {
    Tracker t("hp/gradient-vs-finite-difference", 1e-5);
    for (double p : {1.2, 1.5, 3.0, 4.0, 10.0}) {
      for (int i = 0; i < 200; ++i) {
        const HpCoords c = random_coords(rng);
        const HpVector g = hp_gradient(c, p);
        const HpVector fd = hp_gradient_fd(c, p);
        double scale = 0.0, err = 0.0;
        for (std::size_t k = 0; k < 6; ++k) {
          scale = std::max(scale, std::abs(fd[k]));
          err = std::max(err, std::abs(g[k] - fd[k]));
        }
        t.observe(err / std::max(scale, 1e-300), [&] { return coords_to_string(c) + " p=" + fmt(p); });
      }
    }
    out.push_back(t.done());
  }
  return out;
}

inline const std::vector<double>& p_grid() {
  static const std::vector<double> g = {1.1, 4.0 / 3.0, 1.5, 2.0, 3.0, 4.0, 10.0};
  return g;
}

inline std::vector<CheckResult> optimizer(const SuiteContext& ctx) {
  std::vector<CheckResult> out;
  for (double p : p_grid()) {
    Tracker t("optimizer/global-max p=" + fmt(p), 1e-12);
    try {
      const GlobalMaxReport rep = verify_global_max(p, ctx.budget, ctx.seed);
      t.observe(std::max(0.0, rep.max_sample_value - rep.critical_value), [] { return std::string(); });
    } catch (const CounterexampleError& e) {
      t.fail(std::string(e.what()) + ": " + e.witness());
    }
    out.push_back(t.done());
    if (p == 2.0) continue;
    Tracker c("optimizer/critical-point p=" + fmt(p), 1e-6);
    try {
      const auto runs = multi_start(p, ctx.seed, 32);
      const HpCoords target = critical_coords(p);
      for (const auto& r : runs) {
        const HpVector x = r.coords.as_array(), y = target.as_array();
        double dev = 0.0;
        for (std::size_t k = 0; k < 6; ++k) dev = std::max(dev, std::abs(x[k] - y[k]));
        c.observe(dev, [&] { return "start " + coords_to_string(r.start); });
      }
    } catch (const ConvergenceError& e) {
      c.fail(e.what());
    }
    out.push_back(c.done());
  }
  return out;
}

inline std::vector<CheckResult> duality(const SuiteContext& ctx) {
  std::vector<CheckResult> out;
  {
    Tracker t("duality/monomial-orthogonality", 1e-8);
    for (double alpha : {0.5, 1.0, 2.0})
      for (int j = 0; j <= 4; ++j)
        for (int k = 0; k <= 4; ++k) {
          const cplx q = monomial_inner_product_by_quadrature(j, k, alpha);
          const cplx exact = monomial_inner_product({j}, {k}, alpha, 1);
          const double scale = std::sqrt(std::abs(monomial_inner_product({j}, {j}, alpha, 1)) *
                                         std::abs(monomial_inner_product({k}, {k}, alpha, 1)));
          t.observe(std::abs(q - exact) / scale,
                    [&] { return "j=" + std::to_string(j) + " k=" + std::to_string(k) + " alpha=" + fmt(alpha); });
        }
    out.push_back(t.done());
  }
  auto rng = detail::make_rng(ctx.seed, 4);
  {
    Tracker t("duality/kernel-norm-oracle", 1e-6);
    std::uniform_real_distribution<double> u(-1.0, 1.0), al(0.5, 2.0), pc(1.2, 4.0);
    for (int i = 0; i < 10; ++i) {
      const cplx w{u(rng), u(rng)};
      const double alpha = al(rng), q = pc(rng);
      const double exact = kernel_pprime_norm(std::span<const cplx>(&w, 1), alpha, q);
      t.observe(rel(kernel_pprime_norm_by_quadrature(w, alpha, q), exact),
                [&] { return "w=" + fmt(w.real()) + "+" + fmt(w.imag()) + "i alpha=" + fmt(alpha) + " p'=" + fmt(q); });
    }
    out.push_back(t.done());
  }
  {
    Tracker t("duality/nonduality-identity", 1e-12);
    std::uniform_real_distribution<double> u(0.0, 3.0), pp(1.1, 10.0), al(0.5, 2.0);
    for (int i = 0; i < 100; ++i) {
      const double w2 = u(rng), p = pp(rng), alpha = al(rng);
      const cplx w{std::sqrt(w2), 0.0};
      const std::span<const cplx> ws(&w, 1);
      const double lhs = kernel_pprime_norm(ws, alpha, p / (p - 1.0)) / eval_functional_norm(ws, alpha, p);
      t.observe(rel(nonduality_ratio(w2, p, alpha), lhs), [&] { return "|w|^2=" + fmt(w2) + " p=" + fmt(p); });
    }
    out.push_back(t.done());
  }
  {
    Tracker t("duality/sandwich", 0.0);
    for (double p : {1.5, 3.0})
      for (int i = 0; i < 3; ++i) {
        auto r = detail::make_rng(ctx.seed, 100 + static_cast<std::uint64_t>(i));
        const HoloPolynomial h = random_polynomial(r, 2 + 3 * i, 1.0);
        SandwichOptions opt;
        opt.seed = ctx.seed;
        const DualityReport rep = duality_sandwich_check(h, p, 1.0, opt);
        // residual: relative distance outside the slackened interval
        const double below = std::max(0.0, (1.0 - rep.slack) * rep.lhs - rep.middle) / rep.lhs;
        const double above = std::max(0.0, rep.middle - (1.0 + rep.slack) * rep.rhs) / rep.rhs;
        t.observe(std::max(below, above), [&] {
          return "p=" + fmt(p) + " lhs=" + fmt(rep.lhs) + " middle=" + fmt(rep.middle) + " rhs=" + fmt(rep.rhs);
        });
      }
    out.push_back(t.done());
  }
  return out;
}

}  // namespace suites

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"quadrature", "hp", "optimizer", "duality", "all"};
  return names;
}

inline std::vector<CheckResult> run_suite(const std::string& name, const SuiteContext& ctx) {
  std::vector<CheckResult> out;
  auto add = [&](std::vector<CheckResult> v) { out.insert(out.end(), v.begin(), v.end()); };
  if (name == "quadrature" || name == "all") add(suites::quadrature(ctx));
  if (name == "hp" || name == "all") add(suites::hp(ctx));
  if (name == "optimizer" || name == "all") add(suites::optimizer(ctx));
  if (name == "duality" || name == "all") add(suites::duality(ctx));
  return out;
}

}  // namespace bargmann::cli
