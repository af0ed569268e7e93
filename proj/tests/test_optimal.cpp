#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "curvkit/curvature.hpp"
#include "curvkit/errors.hpp"
#include "curvkit/optimal_sets.hpp"
#include "support.hpp"

using namespace curvkit;

TEST(Optimal, SingletonInZeroCells) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    const MarkovChain c = testsupport::random_chain(rng);
    const OptimalityOracle oracle(c);
    for (int x : oracle.zero_cells()) EXPECT_TRUE(oracle.test({x}).is_optimal);
    for (int x = 0; x < c.size(); ++x)
      if (std::find(oracle.zero_cells().begin(), oracle.zero_cells().end(), x) == oracle.zero_cells().end())
        EXPECT_FALSE(oracle.test({x}).is_optimal);
  }
}

TEST(Optimal, WitnessIsCertificate) {
  const MarkovChain c = cycle(10);
  const OptimalityCertificate cert = is_optimal_set(c, {0, 1, 5, 6});
  ASSERT_TRUE(cert.is_optimal);
  EXPECT_LE(cert.max_defect, 1e-8);
  EXPECT_GT(cert.min_gamma, 0.0);
  EXPECT_EQ(cert.witness_f.size(), 10);
}

TEST(Optimal, CycleSixZeroCellsNotOptimal) {
  const MarkovChain c = cycle(6);
  const OptimalityOracle oracle(c);
  EXPECT_EQ(oracle.zero_cells().size(), 6u);
  const OptimalityCertificate cert = oracle.test(oracle.zero_cells());
  EXPECT_FALSE(cert.is_optimal);
  EXPECT_GE(cert.failing_vertex, 0);
}

TEST(Optimal, CycleSixComplex) {
  // Complements of four consecutive states: the six adjacent pairs.
  const OptimalComplex cx = optimal_complex(cycle(6));
  EXPECT_EQ(cx.dimension, 1);
  ASSERT_EQ(cx.facets.size(), 6u);
  for (const auto& f : cx.facets) {
    ASSERT_EQ(f.size(), 2u);
    EXPECT_TRUE(f[1] - f[0] == 1 || f[1] - f[0] == 5);
  }
}

TEST(Optimal, HypercubeEquilibrium) {
  const OptimalComplex cx = optimal_complex(hypercube(3));
  ASSERT_EQ(cx.facets.size(), 1u);
  EXPECT_EQ(cx.facets[0].size(), 8u);
  const EquilibriumCheck e = check_equilibrium_optimality(hypercube(3));
  EXPECT_TRUE(e.equilibrium_optimal);
  EXPECT_TRUE(e.lichnerowicz_sharp);
  EXPECT_TRUE(e.agree);
}

TEST(Optimal, EquilibriumMatchesLichnerowiczOnRandomChains) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 10; ++i) {
    const EquilibriumCheck e = check_equilibrium_optimality(testsupport::random_chain(rng));
    EXPECT_TRUE(e.agree);
  }
}

TEST(Optimal, DownwardClosed) {
  std::mt19937_64 rng(43);
  const MarkovChain c = cycle(12);
  const OptimalityOracle oracle(c);
  std::bernoulli_distribution in(0.4);
  int tested = 0;
  while (tested < 50) {
    std::vector<int> s;
    for (int x = 0; x < 12; ++x)
      if (in(rng)) s.push_back(x);
    if (s.size() < 2 || !oracle.test(s).is_optimal) continue;
    ++tested;
    for (std::size_t drop = 0; drop < s.size(); ++drop) {
      std::vector<int> sub = s;
      sub.erase(sub.begin() + static_cast<long>(drop));
      EXPECT_TRUE(oracle.test(sub).is_optimal);
    }
  }
}

TEST(Optimal, CurvatureEqualityDoesNotImplyOptimality) {
  // rho = 1_x + 1_y with x minimal, y not, and d(x,y) >= 5: the minimiser at x
  // is supported in B_2(x), so K(rho) = K(X), yet y is not a zero cell.
  const MarkovChain c = path(10);
  const OptimalityOracle oracle(c);
  const IntMatrix d = distance_matrix(c);
  const auto& kv = oracle.vertex_curvatures();
  int x = -1, y = -1;
  for (int a = 0; a < c.size() && y < 0; ++a)
    for (int b = 0; b < c.size() && y < 0; ++b)
      if (d(a, b) >= 5 && kv[a] <= oracle.k_global() + 1e-9 && kv[b] > oracle.k_global() + 1e-6) {
        x = a;
        y = b;
      }
  ASSERT_GE(y, 0);
  const double k = curvature_of_measure(c, Mean::arithmetic(), indicator(c, {x, y})).value;
  EXPECT_NEAR(k, oracle.k_global(), 1e-9);
  EXPECT_FALSE(oracle.test({x, y}).is_optimal);
}

TEST(Union, FarApartSetsStayOptimal) {
  const MarkovChain c = cycle(16);
  const InequalityReport far = check_union_optimality(c, {0}, {8});
  EXPECT_TRUE(far.holds());
  EXPECT_EQ(far.value("distance"), 8.0);
  EXPECT_EQ(far.value("union_optimal"), 1.0);
  const InequalityReport near = check_union_optimality(c, {0}, {4});
  EXPECT_EQ(near.verdict, Verdict::not_applicable);
}

TEST(Optimal, TooLarge) { EXPECT_THROW(optimal_complex(cycle(30)), TooLarge); }
