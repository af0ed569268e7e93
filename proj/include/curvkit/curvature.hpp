#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "curvkit/chain.hpp"
#include "curvkit/gamma.hpp"
#include "curvkit/means.hpp"
#include "curvkit/report.hpp"

namespace curvkit {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

enum class SolverMethod { pencil, bisection };

struct CurvatureResult {
  double value = 0.0;  // sup{K : M - K N psd}; -inf or +inf sentinels
  Vector witness;      // f* on all of X with f*'(M - K N) f* ~ 0, f*'N f* > 0
  SolverMethod method = SolverMethod::pencil;
  double bracket_lo = 0.0;  // final bisection bracket
  double bracket_hi = 0.0;
  int iterations = 0;       // bisection steps
  int null_dim = 0;         // dim null(N) on the support
  double bisection_value = 0.0;
  // Gap between the two smallest eigenvalues of the reduced pencil.
  double eigen_gap = kPosInf;
  std::vector<std::string> warnings;
};

// Pencil route: Schur complement over null(N). Returns value, witness and null_dim.
CurvatureResult solve_pencil(const Matrix& m, const Matrix& n);
// Bisection on K with an eigenvalue PSD test of M - K N.
CurvatureResult solve_bisection(const Matrix& m, const Matrix& n, double q_min);

struct CurvatureOptions {
  // Run bisection as well and throw NumericalFailure when the routes disagree.
  bool cross_check = true;
  double agreement_tol = 1e-8;
};

// K_n(rho) for the given mean.
CurvatureResult curvature_of_measure(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                                     double n = kInfDim, const CurvatureOptions& opts = {});

// Bakry-Emery curvature K_n(x), i.e. K_n(delta_x) for the arithmetic mean.
CurvatureResult bakry_emery_vertex(const MarkovChain& chain, int x, double n = kInfDim,
                                   const CurvatureOptions& opts = {});

struct GlobalCurvature {
  double value = 0.0;
  int argmin = 0;
  std::vector<double> per_vertex;
};
GlobalCurvature bakry_emery_global(const MarkovChain& chain, double n = kInfDim,
                                   const CurvatureOptions& opts = {});

// dK_n(rho)/drho from eigenvector sensitivity, with a finite-difference
// fallback when the smallest pencil eigenvalue is nearly degenerate.
struct CurvatureGradient {
  double value = 0.0;
  Vector grad;
  bool finite_difference = false;
};
CurvatureGradient curvature_gradient(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                                     double n = kInfDim);

struct EntropicOptions {
  int starts = 32;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iters = 500;
  int jobs = 1;
  double n = kInfDim;
};

struct StartResult {
  double k = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string kind;  // "equilibrium", "dirac:<state>", "dirichlet"
};

struct EntropicEstimate {
  double k_hat = kPosInf;
  Vector rho_star;
  int starts = 0;
  std::vector<StartResult> per_start;
  bool certified_nonnegative = false;  // heuristic: k_hat >= -1e-6
  double min_evaluated = kPosInf;      // lowest K over every evaluated rho
  long evaluations = 0;
};

// Multi-start quasi-Newton minimisation of rho -> K_n(rho) for the logarithmic
// mean. Every evaluated value is an upper bound on K_n(X).
EntropicEstimate entropic_curvature_estimate(const MarkovChain& chain,
                                             const EntropicOptions& opts = {});

// Smallest positive eigenvalue of -Delta.
double lambda1(const MarkovChain& chain);

struct LichnerowiczReport {
  std::string mean;
  double lambda1 = 0.0;
  double k_inf = 0.0;
  bool exact = false;  // false when k_inf is the heuristic entropic estimate
  bool sharp = false;  // lambda1 - k_inf <= 1e-6
};
LichnerowiczReport lichnerowicz_check(const MarkovChain& chain, const Mean& mean,
                                      const EntropicOptions& entropic = {});

struct ProfilePoint {
  double s = 0.0;  // 1/n
  double k = 0.0;
};
struct CurvatureProfile {
  std::vector<ProfilePoint> points;  // sorted by s
  bool concave = true;
  double worst_concavity = 0.0;  // most negative K(s_j) - chord value
};
// K as a function of s = 1/n over the grid of dimensions (inf allowed).
CurvatureProfile curvature_profile(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                                   const std::vector<double>& n_grid);

// Simple random walk on a hypercube with bitstring state names, as produced
// by hypercube(). Stores the dimension when requested.
bool is_hypercube_walk(const MarkovChain& chain, int* dimension = nullptr);

// Status of "the chain satisfies CD_mean(K, n)". Arithmetic: exact, from the
// vertex curvatures. Logarithmic: exact on hypercube walks for K <= 2/N and
// n = inf, otherwise heuristic from the multi-start estimate (unmet when the
// estimate already falls below K). Other means: heuristic, unchecked.
Precondition curvature_precondition(const MarkovChain& chain, const Mean& mean, double k,
                                    double n, const EntropicOptions& entropic = {});

}  // namespace curvkit
