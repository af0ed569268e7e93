#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvkit/curvature.hpp"
#include "curvkit/errors.hpp"
#include "curvkit/geometry.hpp"
#include "support.hpp"

using namespace curvkit;

namespace {

Precondition exact_curvature() { return {"curvature", PreconditionStatus::exact, ""}; }

}  // namespace

TEST(DGamma, TwoState) {
  // Gamma f = (f_1 - f_0)^2 / 2 <= 1 gives f_1 - f_0 <= sqrt 2.
  const MarkovChain c = hypercube(1);
  const DGammaResult r = d_gamma_solve(c, 0, 1);
  EXPECT_NEAR(r.value, std::sqrt(2.0), 1e-8);
  EXPECT_LE(r.gap, 1e-8);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(d_gamma(c, 1, 1), 0.0);
}

TEST(DGamma, PotentialIsFeasible) {
  const MarkovChain c = path(5);
  const DGammaResult r = d_gamma_solve(c, 0, 4);
  for (int x = 0; x < 5; ++x) {
    double g = 0;
    for (int y : c.neighbors(x)) g += 0.5 * c.q(x, y) * std::pow(r.potential(y) - r.potential(x), 2);
    EXPECT_LE(g, 1.0 + 1e-12);
  }
  EXPECT_EQ(r.potential(0), 0.0);
  EXPECT_NEAR(r.potential(4), r.value, 1e-12);
}

TEST(DGamma, Metric) {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 4; ++i) {
    const MarkovChain c = testsupport::random_chain(rng, 3, 6);
    const Matrix d = d_gamma_matrix(c);
    const IntMatrix comb = distance_matrix(c);
    for (int x = 0; x < c.size(); ++x)
      for (int y = 0; y < c.size(); ++y) {
        EXPECT_NEAR(d(x, y), d(y, x), 1e-7);
        EXPECT_LE(comb(x, y), std::sqrt(c.stats().deg_weighted_max / 2) * d(x, y) + 1e-7);
        for (int z = 0; z < c.size(); ++z) EXPECT_LE(d(x, z), d(x, y) + d(y, z) + 1e-7);
      }
  }
}

TEST(Cheeger, KnownValues) {
  EXPECT_NEAR(cheeger(hypercube(1)).h, 1.0, 1e-14);
  // Cycle of 4: best W is an arc of two, |dW| = 2 * 1/8, pi(W) = 1/2.
  EXPECT_NEAR(cheeger(cycle(4)).h, 0.5, 1e-14);
  // K4: W of two states, |dW| = 4 * (1/4)(1/3), pi(W) = 1/2.
  EXPECT_NEAR(cheeger(complete_graph(4)).h, 2.0 / 3.0, 1e-14);
}

TEST(Cheeger, GrayCodeMatchesBruteForce) {
  std::mt19937_64 rng(52);
  for (int i = 0; i < 25; ++i) {
    const MarkovChain c = testsupport::random_chain(rng, 3, 12);
    const CheegerResult a = cheeger(c), b = cheeger_bruteforce(c);
    EXPECT_NEAR(a.h, b.h, 1e-12);
    EXPECT_NEAR(boundary_measure(c, a.argmin) / a.measure, a.h, 1e-12);
    double m = 0;
    for (int x : a.argmin) m += c.pi(x);
    EXPECT_LE(m, 0.5 + 1e-12);
  }
  EXPECT_THROW(cheeger(cycle(33)), TooLarge);
}

TEST(Cheeger, L1Inequality) {
  std::mt19937_64 rng(53);
  const MarkovChain c = testsupport::random_chain(rng, 6, 8);
  const InequalityReport r = check_cheeger_l1(c, 100, 1);
  EXPECT_TRUE(r.holds()) << r.worst_residual;
  EXPECT_GE(r.value("indicator_ratio"), 1.0 - 1e-9);
}

TEST(Diameter, CombinatorialAndConventions) {
  EXPECT_EQ(diam_combinatorial(cycle(7)), 3);
  EXPECT_EQ(diam_combinatorial(hypercube(4)), 4);
  EXPECT_NEAR(diam_gamma(hypercube(1)), std::sqrt(2.0), 1e-8);
}

TEST(Diameter, EntropicBoundOnHypercube) {
  const MarkovChain c = hypercube(3);
  const InequalityReport r = check_diameter_bound_ent(c, 2.0 / 3.0, exact_curvature());
  EXPECT_TRUE(r.holds()) << r.worst_residual;
}

TEST(Diameter, FiniteDimensionTwoState) {
  // diam d_Gamma = sqrt 2 <= pi sqrt(n / K) with K_n = 2(1 - 1/n).
  const MarkovChain c = hypercube(1);
  const double n = 4.0, k = 2.0 * (1 - 1 / n);
  const InequalityReport r = check_diameter_bound_finite_n(c, Mean::arithmetic(), k, n, exact_curvature());
  EXPECT_TRUE(r.holds());
  EXPECT_NEAR(r.lhs, std::sqrt(2.0), 1e-8);
  EXPECT_NEAR(r.rhs, M_PI * std::sqrt(n / k), 1e-12);
}

TEST(Mixing, TauLowerBound) {
  EXPECT_TRUE(check_tau_lower_bound(hypercube(3)).holds());
  // 4 pi_max = 2 >= 1 puts the two-state chain outside the bound's range.
  EXPECT_EQ(check_tau_lower_bound(hypercube(1)).verdict, Verdict::not_applicable);
}

TEST(Mixing, BuserAndLambdaTau) {
  const MarkovChain c = hypercube(3);
  const Precondition p = curvature_precondition(c, Mean::logarithmic(), 0.0, kInfDim);
  EXPECT_EQ(p.status, PreconditionStatus::exact);
  EXPECT_TRUE(check_buser(c, p).holds());
  EXPECT_TRUE(check_lambda_tau(c, p).holds());
  const Precondition bad{"curvature", PreconditionStatus::unmet, ""};
  EXPECT_EQ(check_buser(c, bad).verdict, Verdict::not_applicable);
}

TEST(Expander, Applicability) {
  const MarkovChain small = hypercube(3);
  const auto r3 = check_expander_bounds(small, exact_curvature());
  ASSERT_EQ(r3.size(), 2u);
  EXPECT_FALSE(r3[0].violated());
  EXPECT_FALSE(r3[1].violated());
  EXPECT_EQ(regular_degree(small), 3);
  EXPECT_EQ(regular_degree(path(4)), 0);

  // Random 3-regular graphs have no certified nonnegative entropic curvature.
  const MarkovChain rr = random_regular(3, 20, 1);
  EntropicOptions opts;
  opts.starts = 4;
  const Precondition p = curvature_precondition(rr, Mean::logarithmic(), 0.0, kInfDim, opts);
  EXPECT_NE(p.status, PreconditionStatus::exact);
  for (const auto& r : check_expander_bounds(rr, p)) EXPECT_NE(r.verdict, Verdict::holds);
}

TEST(Distance, DGammaComparison) {
  std::mt19937_64 rng(54);
  const MarkovChain c = testsupport::random_chain(rng, 4, 6);
  EXPECT_TRUE(check_dd_gamma(c).holds());
}

TEST(GradientL1, Values) {
  const MarkovChain c = hypercube(1);
  Vector f(2);
  f << 0, 3;
  // w(0,1) = 1/2.
  EXPECT_NEAR(gradient_l1(c, f), 1.5, 1e-15);
}
