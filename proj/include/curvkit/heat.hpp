#pragma once

#include <cstdint>
#include <vector>

#include "curvkit/chain.hpp"
#include "curvkit/curvature.hpp"
#include "curvkit/means.hpp"
#include "curvkit/report.hpp"

namespace curvkit {

// Spectral data of -Delta: eigenvalues ascending, columns of `basis` are
// pi-orthonormal eigenfunctions (basis.col(0) constant).
struct HeatSystem {
  Vector eigenvalues;
  Matrix basis;
  Vector pi;
  Vector sqrt_pi;
  int size() const { return static_cast<int>(pi.size()); }
};

// Eigendecomposition of diag(sqrt pi) (Q - I) diag(1/sqrt pi), which is
// symmetric by reversibility.
HeatSystem spectral_decompose(const MarkovChain& chain);

// P_t f = sum_k exp(-lambda_k t) <f, phi_k>_pi phi_k. Throws NegativeTime.
Vector heat_apply(const HeatSystem& sys, double t, const Vector& f);
// p_t(x,y) = (P_t delta_x)(y).
double heat_kernel(const HeatSystem& sys, double t, int x, int y);
Matrix heat_kernel_matrix(const HeatSystem& sys, double t);

// P_t(x,y) = exp(-t) sum_k t^k/k! Q^k(x,y) summed with nonnegative terms only,
// so tiny entries keep full relative accuracy. Divide by pi(y) for p_t(x,y).
Matrix heat_transition_uniformized(const MarkovChain& chain, double t);

// phi(t) = sum_{x,y} pi(x) pi(y) |p_t(x,y) - 1|
double mixing_distance(const HeatSystem& sys, double t);

struct MixingResult {
  double tau = 0.0;
  double eps = 0.0;
  double phi0 = 0.0;
  bool eps_too_large = false;  // phi(0) <= eps, tau reported as 0
  bool monotone = true;        // phi nonincreasing along the evaluation trace
  int evaluations = 0;
};
// First t with phi(t) <= eps: doubling bracket, then bisection to 1e-10 in t.
MixingResult avg_mixing_time(const HeatSystem& sys, double eps);

struct VerifyOptions {
  int trials = 200;
  std::vector<double> t_grid = {0.1, 1.0, 10.0};
  std::uint64_t seed = 0;
  // Coordinate-search sweeps from the worst sample, aimed at a violation.
  int probe_iters = 0;
  double tol = 1e-9;
};

// Random density: Dirichlet(1) weights over states, scaled so <rho,1>_pi = 1,
// floored at 1e-9.
Vector random_density(const MarkovChain& chain, std::uint64_t seed);

// e^{-2Kt} A_{P_t rho}(f) - A_rho(P_t f) >= (1 - e^{-2Kt})/(K n) <rho, (Delta P_t f)^2>_pi,
// with 2t/n in place of the constant when K = 0.
InequalityReport verify_gradient_estimate(const MarkovChain& chain, const Mean& mean, double k,
                                          double n, const VerifyOptions& opts,
                                          const Precondition& curvature);

// <f^2, P_t rho>_pi - <(P_t f)^2, rho>_pi >=
//   (e^{2Kt}-1)/K A_rho(P_t f) + (1/(K n)) ((e^{2Kt}-1)/K - 2t) <rho, (Delta P_t f)^2>_pi.
InequalityReport verify_reverse_poincare(const MarkovChain& chain, const Mean& mean, double k,
                                         double n, const VerifyOptions& opts,
                                         const Precondition& curvature);

// Both sides of the reverse Poincare inequality at one (rho, f, t).
struct ReversePoincareSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
};
ReversePoincareSides reverse_poincare_sides(const MarkovChain& chain, const HeatSystem& sys,
                                            const Mean& mean, double k, double n, const Vector& rho,
                                            const Vector& f, double t);

// max_{x~y} |P_t f(y) - P_t f(x)| <= ||f||_inf / sqrt(t q_min).
InequalityReport check_linf_gradient_bound(const MarkovChain& chain, const VerifyOptions& opts,
                                           const Precondition& curvature);

// p_t(x,y) <= t^r / (r! pi(x)) with r = d(x,y), at every pair and t in the grid.
InequalityReport check_heat_kernel_bound(const MarkovChain& chain, const std::vector<double>& t_grid);

}  // namespace curvkit
