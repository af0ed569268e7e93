#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "curvkit/chain.hpp"

namespace testsupport {

using curvkit::MarkovChain;
using curvkit::Matrix;
using curvkit::Vector;

inline bool connected(const Matrix& w) {
  const int n = static_cast<int>(w.rows());
  std::vector<int> seen(n, 0), stack = {0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (int y = 0; y < n; ++y)
      if (x != y && w(x, y) > 0.0 && !seen[y]) {
        seen[y] = 1;
        ++count;
        stack.push_back(y);
      }
  }
  return count == n;
}

// Connected Erdos-Renyi graph with unit weights, resampled until connected.
inline Matrix random_graph(int n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution edge(p);
  for (;;) {
    Matrix w = Matrix::Zero(n, n);
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y)
        if (edge(rng)) w(x, y) = w(y, x) = 1.0;
    if (connected(w)) return w;
  }
}

// Reversible chain from random symmetric weights on a random connected graph,
// optionally with lazy self-loops.
inline MarkovChain random_chain(std::mt19937_64& rng, int min_size = 3, int max_size = 8,
                                bool lazy = true) {
  std::uniform_int_distribution<int> size(min_size, max_size);
  std::uniform_real_distribution<double> weight(0.2, 2.0);
  std::bernoulli_distribution loop(0.3);
  const int n = size(rng);
  Matrix w = random_graph(n, 0.5, rng);
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y)
      if (w(x, y) > 0.0) w(x, y) = w(y, x) = weight(rng);
  if (lazy)
    for (int x = 0; x < n; ++x)
      if (loop(rng)) w(x, x) = weight(rng);
  return curvkit::chain_from_weights(w);
}

inline Vector random_positive(int n, std::mt19937_64& rng, double lo = 0.1, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline Vector random_signed(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace testsupport
