#pragma once

#include <vector>

#include "curvkit/chain.hpp"
#include "curvkit/curvature.hpp"
#include "curvkit/means.hpp"
#include "curvkit/report.hpp"

namespace curvkit {

struct DGammaResult {
  double value = 0.0;  // best feasible objective, a lower bound on d_Gamma
  double gap = 0.0;    // duality gap bound: d_Gamma <= value + gap
  bool converged = true;
  int newton_steps = 0;
  Vector potential;  // maximiser f with f(x) = 0
};

// d_Gamma(x,y) = sup{f(y) - f(x) : Gamma f <= 1 pointwise}, by a log-barrier
// Newton method with gauge f(x) = 0.
DGammaResult d_gamma_solve(const MarkovChain& chain, int x, int y);
double d_gamma(const MarkovChain& chain, int x, int y);

// All pairwise d_Gamma distances.
Matrix d_gamma_matrix(const MarkovChain& chain);
double diam_gamma(const MarkovChain& chain);
int diam_combinatorial(const MarkovChain& chain);

struct CheegerResult {
  double h = 0.0;
  std::vector<int> argmin;  // sorted states of a minimising W
  double boundary = 0.0;    // |dW|
  double measure = 0.0;     // pi(W)
};

// |dW| = sum_{x in W, y not in W} w(x,y).
double boundary_measure(const MarkovChain& chain, const std::vector<int>& w);

// Exact h(X) = min_{pi(W) <= 1/2} |dW|/pi(W). Gray-code walk over pairs
// {W, X - W}; throws TooLarge above 32 states.
CheegerResult cheeger(const MarkovChain& chain);
// Independent per-subset evaluation for cross-checks; throws TooLarge above 24 states.
CheegerResult cheeger_bruteforce(const MarkovChain& chain);

// ||grad f||_1 = 1/2 sum_{x,y} |f(y) - f(x)| w(x,y)
double gradient_l1(const MarkovChain& chain, const Vector& f);

// ||grad f||_1 >= (h/2) ||f||_1 for pi-mean-zero f: random f plus the
// centred indicator of the minimiser.
InequalityReport check_cheeger_l1(const MarkovChain& chain, int trials, std::uint64_t seed = 0,
                                  const CheegerResult* h = nullptr);

// Diameter bounds under CD_ent(K, inf) for d_Gamma (reported) and d (in values).
InequalityReport check_diameter_bound_ent(const MarkovChain& chain, double k,
                                          const Precondition& curvature,
                                          const Matrix* dgamma = nullptr);

// diam d_Gamma <= pi sqrt(n/K) and diam d <= pi sqrt(D n/(2K)) under CD_mean(K, n).
InequalityReport check_diameter_bound_finite_n(const MarkovChain& chain, const Mean& mean, double k,
                                               double n, const Precondition& curvature,
                                               const Matrix* dgamma = nullptr);

// tau_avg(1/4) >= (pi_min/(8 pi_max))^{1/R0} (Q_min/e) R0, R0 = log(4 pi_max)/log(Q_min).
InequalityReport check_tau_lower_bound(const MarkovChain& chain);

// lambda1 <= 16 log 2 h^2 / Q_min under CD_ent(0, inf).
InequalityReport check_buser(const MarkovChain& chain, const Precondition& curvature,
                             const CheegerResult* h = nullptr);

// lambda1 tau_avg(1/4) <= 256 log 2 / Q_min^2 under CD_ent(0, inf).
InequalityReport check_lambda_tau(const MarkovChain& chain, const Precondition& curvature);

// Two reports: the lambda1 upper bound from mixing, and the d-regular bound
// d - mu_2 <= 4000 d^4 log d / log(|X|/4).
std::vector<InequalityReport> check_expander_bounds(const MarkovChain& chain,
                                                    const Precondition& curvature);

// d(x,y) <= sqrt(D/2) d_Gamma(x,y) <= d_Gamma(x,y)/sqrt(2) over all pairs.
InequalityReport check_dd_gamma(const MarkovChain& chain, const Matrix* dgamma = nullptr);

// Degree d when the chain is the simple random walk on a d-regular graph, else 0.
int regular_degree(const MarkovChain& chain);

}  // namespace curvkit
