#include <gtest/gtest.h>

#include <cmath>

#include "bargmann/duality_check.hpp"
#include "test_support.hpp"

using namespace bargmann;
using testsupport::rel;

TEST(MonomialInnerProduct, ClosedForm) {
  EXPECT_DOUBLE_EQ(monomial_inner_product({2}, {2}, 2.0, 1).real(), 0.5);
  EXPECT_EQ(monomial_inner_product({1, 2}, {2, 1}, 1.0, 2), cplx(0.0, 0.0));
  EXPECT_DOUBLE_EQ(monomial_inner_product({1, 3}, {1, 3}, 0.5, 2).real(), 6.0 * 16.0);
  EXPECT_THROW(monomial_inner_product({1}, {1, 0}, 1.0, 1), DimensionError);
}

TEST(MonomialInnerProduct, MatchesQuadrature) {
  for (double alpha : {0.5, 1.0, 2.3}) {
    for (int j = 0; j <= 4; ++j) {
      for (int k = 0; k <= 4; ++k) {
        const cplx q = monomial_inner_product_by_quadrature(j, k, alpha);
        const cplx exact = monomial_inner_product({j}, {k}, alpha, 1);
        EXPECT_LT(std::abs(q - exact), 1e-10 * std::max(1.0, std::abs(exact))) << j << "," << k;
      }
    }
  }
}

TEST(KernelNorm, MatchesQuadrature) {
  for (double pc : {1.5, 3.0}) {
    const cplx w{0.6, -0.3};
    const std::vector<cplx> wv = {w};
    EXPECT_LT(rel(kernel_pprime_norm_by_quadrature(w, 1.2, pc), kernel_pprime_norm(wv, 1.2, pc)), 1e-8);
  }
}

TEST(NondualityRatio, FormulaAndMonotonicity) {
  const double alpha = 0.8;
  for (double p : {1.5, 3.0, 4.0}) {
    const double q = p / (p - 1.0);
    double prev = 0.0;
    for (double w2 : {0.0, 0.5, 1.0, 2.0, 5.0}) {
      const std::vector<cplx> w = {{std::sqrt(w2), 0.0}};
      const double direct = kernel_pprime_norm(w, alpha, q) / eval_functional_norm(w, alpha, p);
      const double r = nonduality_ratio(w2, p, alpha);
      EXPECT_LT(rel(r, direct), 1e-12);
      if (w2 > 0.0) EXPECT_GT(r, prev);
      prev = r;
    }
  }
  EXPECT_DOUBLE_EQ(nonduality_ratio(3.0, 2.0, 1.0), 1.0);
  EXPECT_THROW(nonduality_ratio(-1.0, 3.0, 1.0), DomainError);
}

TEST(EvalFunctional, LowerBoundApproachesNorm) {
  const cplx w{0.8, 0.4};
  const std::vector<cplx> wv = {w};
  for (double p : {1.5, 4.0}) {
    const double exact = eval_functional_norm(wv, 1.0, p);
    const double lb = eval_functional_lower_bound(w, 1.0, p, 8, 1);
    EXPECT_LE(lb, exact * (1.0 + 1e-4));
    EXPECT_GE(lb, 0.99 * exact);
  }
}

TEST(Projection, ExplicitFormulaMatchesQuadrature) {
  MixedPolynomial f;
  f.set(3, 1, {1.0, 0.5});
  f.set(2, 2, 2.0);
  f.set(1, 3, -1.0);
  f.set(4, 0, {0.0, 1.0});
  const double alpha = 1.3;
  const HoloPolynomial exact = projection_on_samples(f, alpha);
  const HoloPolynomial quad = project_by_quadrature([&](cplx z) { return f(z); }, alpha, 6, gamma_spec(alpha));
  for (int m = 0; m <= 6; ++m) EXPECT_LT(std::abs(exact.coefficient({m}) - quad.coefficient({m})), 1e-9) << m;
  // z^3 conj z -> 3 z^2 / alpha
  EXPECT_LT(std::abs(projection_on_samples(MixedPolynomial::term(3, 1), alpha).coefficient({2}) - 3.0 / alpha), 1e-15);
}

TEST(PolynomialPairing, MatchesQuadrature) {
  auto rng = testsupport::rng_for(50);
  for (int t = 0; t < 5; ++t) {
    const auto f = random_polynomial(rng, 5, 1.0), h = random_polynomial(rng, 5, 1.0);
    const cplx exact = polynomial_pairing(f, h, 1.0);
    const cplx q = pairing_by_quadrature(as_function(f), as_function(h), 1.0, gamma_spec(1.0));
    EXPECT_LT(rel(q, exact), 1e-9);
  }
}

TEST(Sandwich, HoldsForRandomPolynomials) {
  auto rng = testsupport::rng_for(51);
  for (double p : {1.5, 3.0}) {
    const auto h = random_polynomial(rng, 4, 1.0);
    SandwichOptions opt;
    opt.family_size = 16;
    const DualityReport r = duality_sandwich_check(h, p, 1.0, opt);
    EXPECT_TRUE(r.holds()) << "lhs=" << r.lhs << " middle=" << r.middle << " rhs=" << r.rhs;
    EXPECT_EQ(r.family_evaluated, 9 + 16 + 1);
    EXPECT_LT(rel(r.rhs, 2.0 * j_function(p) * r.lhs), 1e-15);
  }
}

TEST(Sandwich, MonomialAtPTwoIsExact) {
  // at p = 2 the dual norm is the L^2 norm and z^m is its own witness
  const auto h = HoloPolynomial::monomial({3}, 2.0);
  SandwichOptions opt;
  opt.family_size = 0;
  const DualityReport r = duality_sandwich_check(h, 2.0, 1.0, opt);
  EXPECT_LT(rel(r.middle, r.lhs), 1e-4);
  EXPECT_LT(rel(r.rhs, r.lhs), 1e-15);
}

TEST(Sandwich, RejectsBadInput) {
  EXPECT_THROW(duality_sandwich_check(HoloPolynomial(1), 3.0, 1.0), DomainError);
  EXPECT_THROW(duality_sandwich_check(HoloPolynomial::monomial({1, 1}), 3.0, 1.0), DimensionError);
  EXPECT_THROW(duality_sandwich_check(HoloPolynomial::monomial({1}), 1.0, 1.0), DomainError);
}
