#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvkit/errors.hpp"
#include "curvkit/means.hpp"

using namespace curvkit;

TEST(Means, Values) {
  EXPECT_DOUBLE_EQ(eval_mean(Mean::arithmetic(), 3, 5), 4.0);
  EXPECT_NEAR(eval_mean(Mean::logarithmic(), 1, 2), 1.0 / std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(eval_mean(Mean::logarithmic(), 2, 2), 2.0);
  EXPECT_NEAR(eval_mean(Mean::geometric(), 2, 8), 4.0, 1e-15);
  EXPECT_EQ(eval_mean(Mean::logarithmic(), 0, 3), 0.0);
  EXPECT_EQ(eval_mean(Mean::geometric(), 3, 0), 0.0);
}

TEST(Means, Derivatives) {
  EXPECT_DOUBLE_EQ(d1_mean(Mean::arithmetic(), 0.0, 7.0), 0.5);
  for (const Mean& m : {Mean::arithmetic(), Mean::logarithmic(), Mean::geometric()})
    for (double r : {1e-5, 1.0, 3e4}) EXPECT_NEAR(d1_mean(m, r, r), 0.5, 1e-13);
  // Central finite difference of the value.
  const Mean lm = Mean::logarithmic();
  const double h = 1e-6;
  const double fd = (lm(1 + h, 2) - lm(1 - h, 2)) / (2 * h);
  EXPECT_NEAR(lm.d1(1, 2), fd, 1e-8);
}

TEST(Means, SecondDerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (const Mean& m : {Mean::logarithmic(), Mean::geometric()})
    for (int i = 0; i < 50; ++i) {
      const double r = u(rng), s = u(rng), h = 1e-5;
      EXPECT_NEAR(m.d11(r, s), (m.d1(r + h, s) - m.d1(r - h, s)) / (2 * h), 1e-6);
      EXPECT_NEAR(m.d12(r, s), (m.d1(r, s + h) - m.d1(r, s - h)) / (2 * h), 1e-6);
    }
}

TEST(Means, Errors) {
  EXPECT_THROW(eval_mean(Mean::arithmetic(), -1, 2), NegativeInput);
  EXPECT_THROW(d1_mean(Mean::logarithmic(), 0.0, 2.0), DomainError);
  EXPECT_THROW(d1_mean(Mean::geometric(), 0.0, 2.0), DomainError);
  EXPECT_THROW(Mean::from_name("harmonic"), InvalidParameters);
  EXPECT_EQ(Mean::from_name("log").kind(), MeanKind::logarithmic);
  EXPECT_EQ(Mean::from_name("ent").kind(), MeanKind::logarithmic);
}

TEST(Means, DiagonalStability) {
  const Mean lm = Mean::logarithmic();
  for (double r : {1e-6, 1.0, 1e6})
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14}) {
      const double s = r * (1 + eps);
      // Exact to second order: theta = sqrt(r s) (1 + log(s/r)^2/24 + ...)
      const double l = std::log1p(eps);
      const double ref = std::sqrt(r * s) * (1 + l * l / 24 + l * l * l * l / 1920);
      EXPECT_NEAR(lm(r, s), ref, 1e-13 * r) << r << " " << eps;
      EXPECT_LE(std::abs(lm(r, r * (1 + eps)) - r), 1e-12 * r + r * eps);
    }
}

TEST(Means, EulerIdentityNearDiagonal) {
  const Mean lm = Mean::logarithmic();
  for (double eps : {1e-1, 1e-3, 1e-5, 1e-7, 1e-9}) {
    const double r = 1.7, s = r * (1 + eps);
    const double euler = r * lm.d1(r, s) + s * lm.d1(s, r);
    EXPECT_NEAR(euler, lm(r, s), 1e-11 * lm(r, s));
  }
}

TEST(MeanAxioms, BuiltIns) {
  const MeanAxiomReport a = check_mean_axioms(Mean::arithmetic(), 10000, 1);
  EXPECT_TRUE(a.axioms_hold());
  EXPECT_FALSE(a.vanishes_at_zero);
  EXPECT_EQ(a.domain_class, DomainClass::closed);
  const MeanAxiomReport l = check_mean_axioms(Mean::logarithmic(), 10000, 1);
  EXPECT_TRUE(l.axioms_hold());
  EXPECT_TRUE(l.vanishes_at_zero);
  EXPECT_EQ(l.domain_class, DomainClass::open);
  EXPECT_EQ(l.ordering, 0.0);
  const MeanAxiomReport g = check_mean_axioms(Mean::geometric(), 10000, 1);
  EXPECT_TRUE(g.axioms_hold());
  EXPECT_TRUE(g.vanishes_at_zero);
}

TEST(MeanAxioms, CustomMeanFailuresAreReported) {
  // Not normalised and not homogeneous.
  const Mean bad = Mean::custom(
      "bad", [](double r, double s) { return r * s + 1; }, [](double, double s) { return s; },
      DomainClass::closed);
  const MeanAxiomReport rep = check_mean_axioms(bad, 1000, 2);
  EXPECT_FALSE(rep.axioms_hold());
  EXPECT_GT(rep.homogeneity, 1e-3);
}

TEST(MeanAxioms, CustomHarmonicLikeMeanPasses) {
  // Power mean with exponent 1/2: ((sqrt r + sqrt s)/2)^2.
  const Mean p = Mean::custom(
      "power-half",
      [](double r, double s) {
        const double a = 0.5 * (std::sqrt(r) + std::sqrt(s));
        return a * a;
      },
      [](double r, double s) { return 0.5 * (std::sqrt(r) + std::sqrt(s)) / (2 * std::sqrt(r)); },
      DomainClass::open);
  EXPECT_TRUE(check_mean_axioms(p, 2000, 3).axioms_hold(1e-9));
}
