#pragma once

#include <cstdint>
#include <vector>

#include "curvkit/chain.hpp"
#include "curvkit/gamma.hpp"
#include "curvkit/report.hpp"

namespace curvkit {

// Optimality of a set (equivalently of any measure with that support) for the
// arithmetic mean.
struct OptimalityCertificate {
  bool is_optimal = false;
  Vector witness_f;          // empty unless optimal; Gamma f > 0 on the set
  int kernel_dim = 0;        // dim of the common kernel of the pointwise forms
  int failing_vertex = -1;   // Gamma vanishes on the kernel here
  double k_global = 0.0;     // K_n(X)
  double max_defect = 0.0;   // max_x (Gamma2 f - (Delta f)^2/n - K Gamma f)(x) on the set
  double min_gamma = 0.0;    // min_x Gamma f(x) on the set
};

// Pointwise forms q_x(f) = pi(x) (Gamma2 f - (Delta f)^2/n - K Gamma f)(x) and
// g_x(f) = pi(x) Gamma f(x), with K = K_n(X), cached for repeated set queries.
class OptimalityOracle {
 public:
  OptimalityOracle(const MarkovChain& chain, double n = kInfDim, std::uint64_t seed = 0);

  OptimalityCertificate test(const std::vector<int>& set) const;
  double k_global() const { return k_; }
  const std::vector<double>& vertex_curvatures() const { return per_vertex_; }
  // X_0 = {x : K_n(x) = K_n(X)} within 1e-9.
  const std::vector<int>& zero_cells() const { return zero_cells_; }

 private:
  const MarkovChain& chain_;
  double n_;
  std::uint64_t seed_;
  double k_ = 0.0;
  std::vector<double> per_vertex_;
  std::vector<int> zero_cells_;
  std::vector<Matrix> q_;
  std::vector<Matrix> g_;
  std::vector<double> scale_;
};

OptimalityCertificate is_optimal_set(const MarkovChain& chain, const std::vector<int>& set,
                                     double n = kInfDim);

struct OptimalComplex {
  std::vector<std::vector<int>> facets;  // sorted, lexicographic order
  int dimension = -1;                    // max |facet| - 1
  std::vector<int> zero_cells;
  double k_global = 0.0;
  long sets_tested = 0;
};

// Maximal optimal sets, grown level by level from optimal singletons. Sets
// larger than max_size are not explored. Throws TooLarge for |X| > 24.
OptimalComplex optimal_complex(const MarkovChain& chain, double n = kInfDim, int max_size = 24);

struct EquilibriumCheck {
  bool equilibrium_optimal = false;  // 1_X optimal
  bool lichnerowicz_sharp = false;   // lambda1 = K_inf(X)
  bool agree = false;
  double lambda1 = 0.0;
  double k_inf = 0.0;
};
EquilibriumCheck check_equilibrium_optimality(const MarkovChain& chain);

// For optimal A0, A1 at distance >= 5 the union is optimal. Preconditions are
// reported; the verdict is about the union.
InequalityReport check_union_optimality(const MarkovChain& chain, const std::vector<int>& a0,
                                         const std::vector<int>& a1, double n = kInfDim);

}  // namespace curvkit
