#include <gtest/gtest.h>

#include <random>

#include "curvkit/chain.hpp"
#include "curvkit/errors.hpp"
#include "support.hpp"

using namespace curvkit;

namespace {

void expect_valid(const MarkovChain& c) {
  const Matrix& q = c.q();
  for (int x = 0; x < c.size(); ++x) {
    EXPECT_NEAR(q.row(x).sum(), 1.0, 1e-12);
    for (int y = 0; y < c.size(); ++y) EXPECT_NEAR(q(x, y) * c.pi(x), q(y, x) * c.pi(y), 1e-14);
  }
  EXPECT_NEAR(c.pi().sum(), 1.0, 1e-12);
  EXPECT_LT((c.pi().transpose() * q - c.pi().transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace

TEST(BuildChain, FlipChainHasUniformPi) {
  Matrix q(2, 2);
  q << 0, 1, 1, 0;
  const MarkovChain c = build_chain(q);
  EXPECT_NEAR(c.pi(0), 0.5, 1e-15);
  EXPECT_NEAR(c.pi(1), 0.5, 1e-15);
  EXPECT_TRUE(c.adjacent(0, 1));
}

TEST(BuildChain, LazyLoopsAreNotEdges) {
  Matrix q(2, 2);
  q << 0.5, 0.5, 0.5, 0.5;
  const MarkovChain c = build_chain(q);
  EXPECT_DOUBLE_EQ(c.stats().deg_weighted(0), 0.5);
  EXPECT_FALSE(c.adjacent(0, 0));
  EXPECT_EQ(c.weight(0, 0), 0.0);
}

TEST(BuildChain, RejectsBadRowSum) {
  Matrix q(2, 2);
  q << 0.1, 0.8, 1, 0;
  EXPECT_THROW(build_chain(q), NotStochastic);
}

TEST(BuildChain, RejectsDisconnected) {
  Matrix q = Matrix::Identity(3, 3);
  EXPECT_THROW(build_chain(q), NotIrreducible);
}

TEST(BuildChain, RejectsNonReversible) {
  // Biased walk on a 3-cycle: pi is uniform but flows do not balance.
  Matrix q(3, 3);
  q << 0, 0.8, 0.2, 0.2, 0, 0.8, 0.8, 0.2, 0;
  EXPECT_THROW(build_chain(q), NotReversible);
}

TEST(BuildChain, RejectsWrongPi) {
  Matrix q(2, 2);
  q << 0, 1, 1, 0;
  Vector pi(2);
  pi << 0.3, 0.7;
  EXPECT_THROW(build_chain(q, pi), InvalidInput);
}

TEST(Generators, HypercubeOneIsTwoState) {
  const MarkovChain c = hypercube(1);
  EXPECT_EQ(c.size(), 2);
  EXPECT_DOUBLE_EQ(c.q(0, 1), 1.0);
}

TEST(Generators, CycleFive) {
  const MarkovChain c = cycle(5);
  for (int x = 0; x < 5; ++x) {
    EXPECT_DOUBLE_EQ(c.q(x, (x + 1) % 5), 0.5);
    EXPECT_DOUBLE_EQ(c.q(x, (x + 4) % 5), 0.5);
    EXPECT_NEAR(c.pi(x), 0.2, 1e-15);
  }
}

TEST(Generators, RegularFamiliesHaveUniformPiAndQmin) {
  std::vector<std::pair<MarkovChain, int>> cases;
  cases.emplace_back(hypercube(3), 3);
  cases.emplace_back(cycle(7), 2);
  cases.emplace_back(complete_graph(5), 4);
  cases.emplace_back(random_regular(3, 10, 7), 3);
  for (const auto& [c, d] : cases) {
    expect_valid(c);
    EXPECT_NEAR(c.stats().q_min, 1.0 / d, 1e-15);
    EXPECT_NEAR(c.stats().pi_max, c.stats().pi_min, 1e-15);
  }
}

TEST(Generators, RandomRegularSmall) {
  const MarkovChain c = random_regular(3, 6, 7);
  expect_valid(c);
  for (int x = 0; x < c.size(); ++x) EXPECT_EQ(c.neighbors(x).size(), 3u);
}

TEST(Generators, InvalidParameters) {
  EXPECT_THROW(random_regular(3, 5, 1), InvalidParameters);  // nd odd
  EXPECT_THROW(random_regular(4, 4, 1), InvalidParameters);  // n <= d
  EXPECT_THROW(cycle(2), InvalidParameters);
  EXPECT_THROW(hypercube(0), InvalidParameters);
  EXPECT_THROW(GeneratorSpec::parse("torus:3"), InvalidParameters);
}

TEST(Generators, SpecRoundTrip) {
  for (const char* s : {"hypercube:3", "cycle:5", "complete:4", "path:4", "random-regular:3:10:7"})
    EXPECT_EQ(GeneratorSpec::parse(s).to_string(), s);
}

TEST(Generators, PathHasDegreeProportionalPi) {
  const MarkovChain c = path(4);
  EXPECT_NEAR(c.pi(0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(c.pi(1), 2.0 / 6.0, 1e-15);
}

TEST(Stats, DegreeBounds) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    const MarkovChain c = testsupport::random_chain(rng);
    for (int x = 0; x < c.size(); ++x) {
      EXPECT_LE(c.stats().deg_weighted(x), 1.0 + 1e-15);
      EXPECT_GE(c.stats().deg_pi(x), c.stats().q_min - 1e-15);
    }
  }
}

TEST(Distance, KnownGraphs) {
  EXPECT_EQ(distance_matrix(cycle(6)).maxCoeff(), 3);
  const MarkovChain h = hypercube(3);
  const IntMatrix d = distance_matrix(h);
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      int hamming = 0;
      for (std::size_t b = 0; b < h.state(x).size(); ++b) hamming += h.state(x)[b] != h.state(y)[b];
      EXPECT_EQ(d(x, y), hamming);
    }
  const IntMatrix k = distance_matrix(complete_graph(4));
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) EXPECT_EQ(k(x, y), x == y ? 0 : 1);
}

TEST(Distance, MetricOnRandomChains) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    const MarkovChain c = testsupport::random_chain(rng, 3, 12);
    const IntMatrix d = distance_matrix(c);
    for (int x = 0; x < c.size(); ++x)
      for (int y = 0; y < c.size(); ++y) {
        EXPECT_EQ(d(x, y), d(y, x));
        for (int z = 0; z < c.size(); ++z) EXPECT_LE(d(x, z), d(x, y) + d(y, z));
      }
  }
}

TEST(Distance, Ball) {
  EXPECT_EQ(ball(cycle(8), {0}, 2), (std::vector<int>{0, 1, 2, 6, 7}));
}

TEST(Io, JsonRoundTrip) {
  const MarkovChain c = path(5);
  const MarkovChain d = chain_from_json_text(chain_to_json_text(c));
  EXPECT_EQ(c.states(), d.states());
  EXPECT_LT((c.q() - d.q()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((c.pi() - d.pi()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Io, EdgeList) {
  const MarkovChain c = chain_from_edge_list("# triangle with a heavy edge\na\tb\t2\nb\tc\t1\nc\ta\t1\n");
  expect_valid(c);
  const int a = c.index_of("a"), b = c.index_of("b");
  EXPECT_NEAR(c.q(a, b), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.pi(a), 3.0 / 8.0, 1e-15);
  EXPECT_THROW(c.index_of("z"), InvalidParameters);
}
