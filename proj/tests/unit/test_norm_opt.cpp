#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "bargmann/norm_opt.hpp"
#include "test_support.hpp"

using namespace bargmann;
using testsupport::rel;

namespace {

const std::vector<double> kGrid = {1.1, 4.0 / 3.0, 1.5, 3.0, 4.0, 10.0};

}  // namespace

TEST(JFunction, ValuesAndSymmetry) {
  EXPECT_EQ(j_function(2.0), 0.5);
  for (double p : kGrid) {
    EXPECT_GT(j_function(p), 0.5);
    const double q = p / (p - 1.0);
    EXPECT_LT(rel(j_function(q), j_function(p)), 1e-14);
    EXPECT_LT(rel(2.0 * j_function(p), testsupport::sharp_constant(p)), 1e-14);
  }
  EXPECT_THROW(j_function(1.0), DomainError);
  EXPECT_THROW(j_function(INFINITY), DomainError);
}

TEST(SharpNorm, KnownValues) {
  for (int n : {1, 2, 5, 10}) EXPECT_NEAR(sharp_norm(2.0, n), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(sharp_norm(1.0, 3), 8.0);
  EXPECT_NEAR(sharp_norm(4.0, 1), 1.1397535, 1e-6);
  EXPECT_LT(rel(sharp_norm(3.0, 4), std::pow(sharp_norm(3.0, 1), 4)), 1e-14);
  EXPECT_THROW(sharp_norm(0.5, 1), DomainError);
  EXPECT_THROW(sharp_norm(2.0, 0), DomainError);
}

TEST(Gradient, MatchesFiniteDifferences) {
  auto rng = testsupport::rng_for(40);
  for (double p : {1.2, 1.5, 3.0, 4.0, 10.0}) {
    for (int t = 0; t < 100; ++t) {
      const HpCoords c = testsupport::random_hp_coords(rng);
      const HpVector g = hp_gradient(c, p), fd = hp_gradient_fd(c, p);
      double scale = 0.0, err = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        scale = std::max(scale, std::abs(fd[i]));
        err = std::max(err, std::abs(g[i] - fd[i]));
      }
      EXPECT_LT(err, 1e-5 * scale) << coords_to_string(c) << " p=" << p;
    }
  }
}

TEST(Gradient, VanishesAtCriticalPoint) {
  for (double p : kGrid) {
    const HpGradient g = hp_gradient_detail(critical_coords(p), p);
    for (double x : g.grad) EXPECT_LT(std::abs(x), 1e-14);
    EXPECT_GT(g.C_p, 0.0);
  }
}

TEST(BoundConstants, ClosedForms) {
  const BoundConstants bc = bound_constants(4.0);
  const double j = j_function(4.0);
  EXPECT_LT(rel(bc.M_ad, std::pow(j, -8.0 / 3.0) - 1.0), 1e-14);
  EXPECT_LT(rel(bc.M_efg, std::pow(2.0 * bc.M_ad * bc.M_ad + 2.0 * bc.M_ad + 3.0, 0.25) / (j * j)), 1e-14);
  EXPECT_GT(bc.m_ad, 0.0);
  EXPECT_LE(bc.m_ad, 0.1);
  EXPECT_GT(bc.numeric_delta, 0.0);
  EXPECT_THROW(bound_constants(2.0), DomainError);
}

TEST(BoundConstants, StayFiniteNearTwo) {
  // M_ad grows as p decreases to 2 but tends to 2^4 - 1 = 15, not infinity
  EXPECT_GT(bound_constants(2.01).M_ad, bound_constants(2.1).M_ad);
  EXPECT_LT(bound_constants(2.01).M_ad, 15.0);
  for (double p : {2.1, 2.01}) {
    const BoundConstants bc = bound_constants(p);
    const double j = j_function(p);
    EXPECT_LT(rel(bc.M_ad, std::pow(j, -2.0 * p / (p - 1.0)) - 1.0), 1e-12);
    EXPECT_TRUE(std::isfinite(bc.M_efg));
  }
}

TEST(Optimizer, ConvergesFromRandomStarts) {
  for (double p : kGrid) {
    const auto runs = multi_start(p, 7, 8);
    const double c = 1.0 / (p - 1.0);
    for (const auto& r : runs) {
      EXPECT_TRUE(r.converged);
      EXPECT_LT(r.gradient_residual, 1e-8);
      for (double x : {r.coords.a - c, r.coords.d - c, r.coords.b, r.coords.e, r.coords.g, r.coords.f})
        EXPECT_LT(std::abs(x), 1e-6) << coords_to_string(r.coords) << " p=" << p;
    }
  }
}

TEST(Optimizer, DeterministicForSeed) {
  const auto a = multi_start(3.0, 99, 4);
  const auto b = multi_start(3.0, 99, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].coords, b[i].coords);
    EXPECT_EQ(a[i].start, b[i].start);
  }
  std::set<double> starts;
  for (const auto& r : a) starts.insert(r.start.a);
  EXPECT_EQ(starts.size(), a.size());
}

TEST(Optimizer, HandlesPTwo) {
  const auto r = find_critical_point(2.0, 1);
  EXPECT_EQ(r.coords, (HpCoords{1.0, 1.0, 0.0, 0.0, 0.0, 0.0}));
  EXPECT_LT(rel(norm_from_hp(r.value, 2.0), 1.0), 1e-15);
  EXPECT_THROW(find_critical_point(0.9, 1), DomainError);
}

TEST(Optimizer, StartOnCriticalPointStays) {
  const auto r = optimize_hp_from(critical_coords(3.0), 3.0);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(rel(r.value, critical_value(3.0)), 1e-15);
}

TEST(GlobalMax, NoSampleExceedsMaximum) {
  for (double p : {1.5, 3.0}) {
    const auto rep = verify_global_max(p, 14'000, 5, 8);
    EXPECT_EQ(rep.samples_checked, 14'000);
    EXPECT_LE(rep.max_sample_value, rep.critical_value + kSampleSlack);
    EXPECT_EQ(rep.strata.size(), static_cast<std::size_t>(kStrata));
    EXPECT_LT(rel(rep.max_start_value, rep.critical_value), 1e-12);
  }
}

TEST(GlobalMax, DeterministicForSeed) {
  const auto a = verify_global_max(4.0, 5000, 3, 2);
  const auto b = verify_global_max(4.0, 5000, 3, 2);
  EXPECT_EQ(a.max_sample_value, b.max_sample_value);
  EXPECT_EQ(a.max_sample_coords, b.max_sample_coords);
}

TEST(GlobalMax, StrataStayInDomain) {
  auto rng = testsupport::rng_for(41);
  const BoundConstants bc = bound_constants(3.0);
  for (int s = 0; s < kStrata; ++s) {
    for (int t = 0; t < 200; ++t) {
      const HpCoords c = sample_stratum(static_cast<Stratum>(s), rng, bc);
      EXPECT_GT(c.a, 0.0) << stratum_name(static_cast<Stratum>(s));
      EXPECT_GT(c.d, 0.0);
    }
  }
}

TEST(Norm, ComputeNormAgreesWithClosedForm) {
  for (double p : {1.5, 4.0}) {
    for (int n : {1, 3}) {
      const auto rep = compute_norm(OperatorConfig::make(n, 0.7, p), 42, 0, 4);
      EXPECT_LT(rel(rep.optimized_norm, rep.closed_form_norm), 1e-9);
      EXPECT_EQ(rep.maximizer.dim(), 2 * n);
    }
  }
  const auto one = compute_norm(OperatorConfig::make(2, 0.5, 1.0));
  EXPECT_DOUBLE_EQ(one.closed_form_norm, 4.0);
  EXPECT_GT(one.optimized_norm, 4.0 - 1e-4);
  EXPECT_LE(one.optimized_norm, 4.0);
}

TEST(Norm, Tensorization) {
  EXPECT_LT(rel(tensorized_norm(3.0, 3), std::pow(sharp_norm(3.0, 1), 3)), 1e-9);
  EXPECT_DOUBLE_EQ(tensorized_norm(1.0, 2), 4.0);
}

TEST(GoldenSection, FindsParabolaPeak) {
  const auto r = golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, -1.0, 2.0);
  EXPECT_NEAR(r.first, 0.3, 1e-7);
}
