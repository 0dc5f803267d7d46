#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bargmann/bargmann_op.hpp"
#include "bargmann/norm_opt.hpp"
#include "test_support.hpp"

using namespace bargmann;
using testsupport::rel;

namespace {

AdmissibleMatrix scaled(const AdmissibleMatrix& a, double s) {
  return AdmissibleMatrix(ComplexSymMatrix::from_upper(s * a.dense()));
}

}  // namespace

TEST(OperatorConfig, ValidatesAndConjugates) {
  const auto c = OperatorConfig::make(2, 0.5, 4.0);
  EXPECT_DOUBLE_EQ(c.p_conjugate, 4.0 / 3.0);
  EXPECT_TRUE(std::isinf(OperatorConfig::make(1, 1.0, 1.0).p_conjugate));
  EXPECT_THROW(OperatorConfig::make(0, 1.0, 2.0), DomainError);
  EXPECT_THROW(OperatorConfig::make(1, 0.0, 2.0), DomainError);
  EXPECT_THROW(OperatorConfig::make(1, 1.0, 0.9), DomainError);
}

TEST(Coordinates, RealComplexRoundTrip) {
  const std::vector<double> x = {1.0, 2.0, -3.0, 4.0};
  const auto z = to_complex(x);
  EXPECT_EQ(z[0], cplx(1.0, -3.0));
  EXPECT_EQ(z[1], cplx(2.0, 4.0));
  EXPECT_EQ(to_real(z), x);
  EXPECT_DOUBLE_EQ(norm_sq(z), 30.0);
}

TEST(Kernel, FockKernelIsReproducingOnExponentials) {
  // Q_alpha fixes the holomorphic e^{alpha <z, w>}: check one point by Simpson
  const auto cfg = OperatorConfig::make(1, 1.3, 2.0);
  const std::vector<cplx> w0 = {{0.4, -0.2}};
  const std::vector<cplx> z = {{0.3, 0.5}};
  auto f = [&](double x, double y) {
    const std::vector<cplx> w = {{x, y}};
    return q_kernel(z, w, cfg) * fock_kernel(w, w0, cfg) * std::exp(-0.5 * cfg.alpha * norm_sq(w)) /
           std::exp(-0.5 * cfg.alpha * norm_sq(z));
  };
  // the Gaussian-weighted version of the reproducing identity
  const cplx got = testsupport::simpson_integral(f, 2, 9.0, 300);
  EXPECT_LT(rel(got, fock_kernel(z, w0, cfg)), 1e-9);
}

TEST(Kernel, ModulusAgrees) {
  const auto cfg = OperatorConfig::make(2, 0.7, 3.0);
  const std::vector<cplx> z = {{0.3, 0.5}, {-1.0, 0.2}}, w = {{1.1, -0.4}, {0.0, 0.9}};
  EXPECT_LT(rel(std::abs(q_kernel(z, w, cfg)), q_kernel_modulus(z, w, cfg)), 1e-14);
  EXPECT_THROW(q_kernel(std::vector<cplx>{{1.0, 0.0}}, w, cfg), DimensionError);
}

TEST(Multiplier, ForwardOfConstantHasUnitNorm) {
  for (double p : {1.0, 1.5, 3.0}) {
    for (int n : {1, 2}) {
      const auto cfg = OperatorConfig::make(n, 0.8, p);
      const AdmissibleMatrix a(ComplexSymMatrix::identity(2 * n, 0.5 * cfg.alpha));
      EXPECT_LT(rel(multiplier_scale(cfg) * gaussian_lp_norm(a, p), 1.0), 1e-14);
    }
  }
}

TEST(Multiplier, ForwardInverseRoundTrip) {
  const auto cfg = OperatorConfig::make(1, 1.5, 3.0);
  const std::vector<cplx> vals = {{1.0, 2.0}, {-0.5, 0.1}};
  const std::vector<std::vector<cplx>> pts = {{{0.3, 0.2}}, {{1.5, -2.0}}};
  const auto fwd = multiplier_map(vals, pts, MultiplierDirection::Forward, cfg);
  const auto back = multiplier_map(fwd, pts, MultiplierDirection::Inverse, cfg);
  for (std::size_t i = 0; i < vals.size(); ++i) EXPECT_LT(rel(back[i], vals[i]), 1e-14);

  auto cb = multiplier_map([](std::span<const cplx> z) { return z[0] * z[0]; }, MultiplierDirection::Forward, cfg);
  EXPECT_LT(rel(cb(pts[1]), pts[1][0] * pts[1][0] * multiplier_factor(pts[1], MultiplierDirection::Forward, cfg)),
            1e-15);

  WeightedPolynomial wp{1.0, 0.0, MixedPolynomial::term(1, 2, 2.0)};
  const auto w1 = multiplier_map(wp, MultiplierDirection::Forward, cfg);
  const auto w2 = multiplier_map(w1, MultiplierDirection::Inverse, cfg);
  const cplx z{0.4, -0.9};
  EXPECT_LT(rel(w1(z), wp(z) * multiplier_factor(std::vector<cplx>{z}, MultiplierDirection::Forward, cfg)), 1e-14);
  EXPECT_LT(rel(w2(z), wp(z)), 1e-14);
}

TEST(ApplyQ, ClosedFormMatchesKernelQuadrature) {
  auto rng = testsupport::rng_for(20);
  for (int t = 0; t < 4; ++t) {
    const auto cfg = OperatorConfig::make(1, testsupport::uniform(rng, 0.5, 2.0), 2.0);
    const auto a = testsupport::random_admissible(rng, 2, 0.2, 3.0, 1.5);
    const GaussianFunction qg = apply_q_to_gaussian(a, cfg);
    for (int s = 0; s < 3; ++s) {
      const std::vector<double> x = {testsupport::uniform(rng, -1.5, 1.5), testsupport::uniform(rng, -1.5, 1.5)};
      const auto q = apply_q_by_quadrature(GaussianFunction::centered(a), x, cfg);
      EXPECT_LT(std::abs(q.value - qg(x)), 1e-9 * std::max(std::abs(qg(x)), 1e-3 * q.abs_mass));
    }
  }
}

TEST(ApplyQ, RejectsOddDimension) {
  const auto cfg = OperatorConfig::make(1, 1.0, 2.0);
  EXPECT_THROW(apply_q_to_gaussian(AdmissibleMatrix(ComplexSymMatrix::identity(3)), cfg), DimensionError);
}

TEST(ApplyQ, FixesTheVacuum) {
  // e^{-alpha |z|^2 / 2} is Q-invariant: A = (alpha/2) I maps to itself
  const auto cfg = OperatorConfig::make(2, 0.9, 2.0);
  const auto g = apply_q_to_gaussian(AdmissibleMatrix(ComplexSymMatrix::identity(4, 0.45)), cfg);
  EXPECT_LT(std::abs(g.amplitude() - 1.0), 1e-14);
  EXPECT_LT((g.matrix().dense() - 0.45 * CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ratio, ClosedFormMatchesQuadrature) {
  auto rng = testsupport::rng_for(21);
  for (double p : {1.5, 3.0}) {
    const auto cfg = OperatorConfig::make(1, 1.0, p);
    const auto a = testsupport::random_admissible(rng, 2, 0.3, 2.0, 1.0);
    EXPECT_LT(rel(ratio_p_by_quadrature(a, cfg), ratio_p(a, cfg)), 1e-7);
  }
}

TEST(Ratio, OneVariableReducesToHp) {
  auto rng = testsupport::rng_for(22);
  for (int t = 0; t < 200; ++t) {
    const double p = testsupport::uniform(rng, 1.05, 8.0);
    const HpCoords c = testsupport::random_hp_coords(rng);
    const AdmissibleMatrix ap(c.to_matrix());
    EXPECT_LT(rel(std::pow(ratio_p_prime(ap, p), p), std::pow(2.0, p) * std::sqrt(hp_coords(c, p).value)), 1e-11);
  }
}

TEST(Ratio, AlphaEntersOnlyThroughRescaling) {
  auto rng = testsupport::rng_for(23);
  const auto a = testsupport::random_admissible(rng, 4, 0.3, 2.0, 1.0);
  const double r1 = ratio_p(a, OperatorConfig::make(2, 1.0, 3.0));
  const double r2 = ratio_p(scaled(a, 2.5), OperatorConfig::make(2, 2.5, 3.0));
  EXPECT_LT(rel(r2, r1), 1e-12);
}

TEST(Ratio, IsometryAtPTwo) {
  auto rng = testsupport::rng_for(24);
  for (int t = 0; t < 50; ++t) {
    const auto a = testsupport::random_admissible(rng, 2, 0.05, 5.0, 4.0);
    EXPECT_LE(ratio_p(a, OperatorConfig::make(1, 1.0, 2.0)), 1.0 + 1e-12);
  }
}

TEST(RatioVsC, MatchesFormulaAndPeaksAtOneOverPMinusOne) {
  for (double p : {1.5, 3.0, 4.0}) {
    for (int n : {1, 2}) {
      const auto cfg = OperatorConfig::make(n, 1.0, p);
      for (double c : {0.1, 0.7, 3.0}) {
        const double expect = std::pow(std::pow(2.0, p) * c / std::pow(1.0 + c, p), n / p);
        EXPECT_LT(rel(ratio_vs_c(c, cfg), expect), 1e-12);
      }
      const auto peak = golden_section_max([&](double c) { return ratio_vs_c(c, cfg); }, 1e-3, 20.0);
      EXPECT_NEAR(peak.first, 1.0 / (p - 1.0), 1e-5);
      EXPECT_LT(rel(peak.second, sharp_norm(p, n)), 1e-12);
    }
  }
  EXPECT_THROW(ratio_vs_c(0.0, OperatorConfig::make(1, 1.0, 2.0)), DomainError);
}

TEST(AbsQRatio, FormulaAndLimits) {
  const auto cfg = OperatorConfig::make(1, 1.0, 3.0);
  const std::vector<double> l = {0.5, 2.0};
  EXPECT_LT(rel(abs_q_ratio(l, cfg), std::pow(8.0 * std::pow(1.5 * 3.0, -1.0), 1.0 / 3.0)), 1e-14);
  // decreasing in each eigenvalue for p > 1
  EXPECT_GT(abs_q_ratio(std::vector<double>{0.1, 0.1}, cfg), abs_q_ratio(std::vector<double>{0.2, 0.1}, cfg));
  // small eigenvalues approach 2^n
  EXPECT_NEAR(abs_q_ratio(std::vector<double>{1e-9, 1e-9}, cfg), 2.0, 1e-8);
  EXPECT_THROW(abs_q_ratio(std::vector<double>{1.0}, cfg), DimensionError);
  EXPECT_THROW(abs_q_ratio(std::vector<double>{1.0, -1.0}, cfg), DomainError);
}

TEST(Hp, MatrixAndCoordinateFormsAgree) {
  auto rng = testsupport::rng_for(25);
  for (int t = 0; t < 500; ++t) {
    const HpCoords c = testsupport::random_hp_coords(rng);
    const double p = testsupport::uniform(rng, 1.05, 10.0);
    EXPECT_LT(rel(hp_coords(c, p).value, hp_matrix(AdmissibleMatrix(c.to_matrix()), p)), 1e-11);
  }
}

TEST(Hp, CriticalValueAtScaledIdentity) {
  for (double p : {1.1, 1.5, 3.0, 10.0}) {
    EXPECT_LT(rel(hp_coords(critical_coords(p), p).value, critical_value(p)), 1e-13);
    const double expect = std::pow(std::pow(p - 1.0, p - 1.0) / std::pow(p, p), 2.0);
    EXPECT_LT(rel(critical_value(p), expect), 1e-13);
  }
}

TEST(Hp, TauFormsAgree) {
  auto rng = testsupport::rng_for(26);
  for (int t = 0; t < 2000; ++t) {
    const double a = testsupport::uniform(rng, 0.01, 10.0), d = testsupport::uniform(rng, 0.01, 10.0);
    const double e = testsupport::uniform(rng, -5, 5), g = testsupport::uniform(rng, -5, 5),
                 f = testsupport::uniform(rng, -5, 5);
    const auto tf = tau_forms_check(a, d, e, g, f);
    EXPECT_LT(rel(tf.tau_form1, tf.tau_def), 1e-12);
    EXPECT_LT(rel(tf.tau_form2, tf.tau_def), 1e-12);
    EXPECT_GT(tf.tau_def, 0.0);
  }
}

TEST(Hp, RotationInvariant) {
  auto rng = testsupport::rng_for(27);
  for (int t = 0; t < 100; ++t) {
    const AdmissibleMatrix a(testsupport::random_hp_coords(rng).to_matrix());
    const Rotation2 u{testsupport::uniform(rng, 0.0, 2.0 * std::numbers::pi)};
    EXPECT_LT(rel(hp_matrix(conjugate_so2(a, u), 2.7), hp_matrix(a, 2.7)), 1e-10);
  }
}

TEST(Hp, SwapSymmetry) {
  auto rng = testsupport::rng_for(28);
  for (int t = 0; t < 100; ++t) {
    HpCoords c = testsupport::random_hp_coords(rng);
    c.b = 0.0;
    const HpCoords s{c.d, c.a, 0.0, c.g, c.e, -c.f};
    EXPECT_LT(rel(hp_coords(s, 1.7).value, hp_coords(c, 1.7).value), 1e-12);
  }
}

TEST(Hp, DomainChecks) {
  EXPECT_THROW(hp_coords({-1.0, 1.0, 0.0, 0.0, 0.0, 0.0}, 3.0), DomainError);
  EXPECT_THROW(hp_coords({1.0, 1.0, 1.0, 0.0, 0.0, 0.0}, 3.0), DomainError);
  EXPECT_THROW(hp_matrix(AdmissibleMatrix(ComplexSymMatrix::identity(4)), 3.0), DimensionError);
  const HpCoords c{1.0, 2.0, 0.5, 0.1, 0.2, 0.3};
  EXPECT_EQ(HpCoords::from_matrix(c.to_matrix()), c);
  EXPECT_EQ(HpCoords::from_array(c.as_array()), c);
}

TEST(KernelBlocks, AreAdmissible) {
  for (int n : {1, 2, 3}) {
    const auto kb = kernel_blocks(OperatorConfig::make(n, 0.7, 2.0));
    EXPECT_TRUE(kb.is_admissible());
    EXPECT_EQ(kb.block_real_part().rows(), 4 * n);
  }
}

TEST(Tensor, RatioFactorizesOverBlocks) {
  auto rng = testsupport::rng_for(29);
  for (int t = 0; t < 30; ++t) {
    const HpCoords c1 = testsupport::random_hp_coords(rng), c2 = testsupport::random_hp_coords(rng);
    const double p = testsupport::uniform(rng, 1.1, 6.0);
    const AdmissibleMatrix a(tensor_product_matrix({c1.to_matrix(), c2.to_matrix()}));
    const double prod = ratio_p_prime(AdmissibleMatrix(c1.to_matrix()), p) *
                        ratio_p_prime(AdmissibleMatrix(c2.to_matrix()), p);
    EXPECT_LT(rel(ratio_p_prime(a, p), prod), 1e-10);
  }
  EXPECT_THROW(tensor_product_matrix({}), DimensionError);
}
