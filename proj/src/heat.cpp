#include "curvkit/heat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "curvkit/errors.hpp"
#include "curvkit/gamma.hpp"

namespace curvkit {

namespace {

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw NegativeTime("time must be finite and nonnegative, got " + std::to_string(t));
}

// (1 - e^{-2Kt})/K, equal to 2t at K = 0.
double decay_factor(double k, double t) {
  if (k == 0.0) return 2.0 * t;
  return -std::expm1(-2.0 * k * t) / k;
}

// (e^{2Kt} - 1)/K and ((e^{2Kt} - 1)/K - 2t)/K, by series when |Kt| is small.
std::pair<double, double> growth_factors(double k, double t) {
  const double x = k * t;
  if (std::abs(x) < 1e-3) {
    const double e1 = 2.0 * t * (1.0 + x + (2.0 / 3.0) * x * x + (1.0 / 3.0) * x * x * x);
    const double e2 = 2.0 * t * t * (1.0 + (2.0 / 3.0) * x + (1.0 / 3.0) * x * x +
                                     (2.0 / 15.0) * x * x * x);
    return {e1, e2};
  }
  const double e1 = std::expm1(2.0 * x) / k;
  return {e1, (e1 - 2.0 * t) / k};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vector random_function(int size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector f(size);
  for (int i = 0; i < size; ++i) f(i) = unif(rng);
  return f;
}

Precondition mean_below_arithmetic(const Mean& mean) {
  Precondition p;
  p.name = "theta <= arithmetic mean";
  if (mean.kind() != MeanKind::custom) {
    p.status = PreconditionStatus::exact;
    return p;
  }
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> expo(std::log(1e-6), std::log(1e6));
  for (int i = 0; i < 2000; ++i) {
    const double r = std::exp(expo(rng)), s = std::exp(expo(rng));
    if (mean(r, s) > 0.5 * (r + s) * (1.0 + 1e-12)) {
      p.status = PreconditionStatus::unmet;
      p.detail = "violated at (" + std::to_string(r) + ", " + std::to_string(s) + ")";
      return p;
    }
  }
  p.status = PreconditionStatus::heuristic;
  p.detail = "checked on 2000 samples";
  return p;
}

// Residual of a sampled inequality at (rho, f, t), nonnegative when it holds.
using SampleFn = std::function<double(const Vector& rho, const Vector& f, double t, double* lhs,
                                      double* rhs)>;

// Coordinate search on (log rho, f, log t) that drives the residual down.
void probe(const MarkovChain& chain, const SampleFn& residual_at, int iters, double tol,
           InequalityReport& rep) {
  if (!rep.witness) return;
  const int n = chain.size();
  Vector lr = rep.witness->rho.array().log().matrix();
  Vector f = rep.witness->f;
  double lt = std::log(std::max(rep.witness->t, 1e-6));
  auto eval = [&](const Vector& lrv, const Vector& fv, double ltv, double* l, double* r) {
    Vector rho = lrv.array().exp().matrix();
    rho /= rho.dot(chain.pi());
    return residual_at(rho, fv, std::exp(ltv), l, r);
  };
  double l = 0.0, r = 0.0;
  double best = eval(lr, f, lt, &l, &r);
  double step_rho = 0.5, step_f = 0.5, step_t = 0.5;
  for (int it = 0; it < iters && best >= -10.0 * tol; ++it) {
    bool improved = false;
    auto attempt = [&](auto mutate) {
      for (double sign : {1.0, -1.0}) {
        Vector lr2 = lr, f2 = f;
        double lt2 = lt;
        mutate(lr2, f2, lt2, sign);
        lt2 = std::clamp(lt2, std::log(1e-6), std::log(1e3));
        double l2 = 0.0, r2 = 0.0;
        const double v = eval(lr2, f2, lt2, &l2, &r2);
        if (v < best) {
          best = v;
          lr = lr2;
          f = f2;
          lt = lt2;
          l = l2;
          r = r2;
          improved = true;
          return;
        }
      }
    };
    for (int i = 0; i < n; ++i) {
      attempt([&](Vector& a, Vector&, double&, double s) { a(i) += s * step_rho; });
      attempt([&](Vector&, Vector& b, double&, double s) { b(i) += s * step_f; });
    }
    attempt([&](Vector&, Vector&, double& c, double s) { c += s * step_t; });
    if (!improved) {
      step_rho *= 0.5;
      step_f *= 0.5;
      step_t *= 0.5;
    }
  }
  if (best < rep.worst_residual) {
    Vector rho = lr.array().exp().matrix();
    rho /= rho.dot(chain.pi());
    rep.worst_residual = best;
    rep.lhs = l;
    rep.rhs = r;
    rep.witness = Witness{rho, f, std::exp(lt)};
  }
  rep.notes.push_back("sharpness probe: " + std::to_string(iters) + " sweeps");
}

InequalityReport run_sampled(const MarkovChain& chain, const std::string& name,
                             const std::string& relation, const VerifyOptions& opts,
                             const SampleFn& residual_at, std::vector<Precondition> pre) {
  InequalityReport rep;
  rep.name = name;
  rep.relation = relation;
  rep.preconditions = std::move(pre);
  rep.worst_residual = kPosInf;
  int count = 0;
  for (int trial = 0; trial < opts.trials; ++trial) {
    std::mt19937_64 rng(mix_seed(opts.seed, static_cast<std::uint64_t>(trial)));
    const Vector rho = random_density(chain, rng());
    const Vector f = random_function(chain.size(), rng);
    for (double t : opts.t_grid) {
      double l = 0.0, r = 0.0;
      const double res = residual_at(rho, f, t, &l, &r);
      ++count;
      if (res < rep.worst_residual) {
        rep.worst_residual = res;
        rep.lhs = l;
        rep.rhs = r;
        rep.witness = Witness{rho, f, t};
      }
    }
  }
  rep.trials = count;
  if (count == 0) rep.worst_residual = 0.0;
  if (opts.probe_iters > 0) probe(chain, residual_at, opts.probe_iters, opts.tol, rep);
  rep.slack = relation == ">=" ? rep.lhs - rep.rhs : rep.rhs - rep.lhs;
  finalize(rep, opts.tol);
  return rep;
}

}  // namespace

HeatSystem spectral_decompose(const MarkovChain& chain) {
  const int n = chain.size();
  HeatSystem sys;
  sys.pi = chain.pi();
  sys.sqrt_pi = sys.pi.cwiseSqrt();
  const Matrix gen = chain.q() - Matrix::Identity(n, n);
  Matrix s = -(sys.sqrt_pi.asDiagonal() * gen * sys.sqrt_pi.cwiseInverse().asDiagonal());
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  sys.eigenvalues = es.eigenvalues();
  sys.eigenvalues(0) = 0.0;
  sys.basis = sys.sqrt_pi.cwiseInverse().asDiagonal() * es.eigenvectors();
  if (sys.basis(0, 0) < 0.0) sys.basis.col(0) *= -1.0;
  return sys;
}

Vector heat_apply(const HeatSystem& sys, double t, const Vector& f) {
  check_time(t);
  if (f.size() != sys.size()) throw ShapeMismatch("function length does not match chain");
  const Vector coeff = sys.basis.transpose() * sys.pi.cwiseProduct(f);
  const Vector decay = (-sys.eigenvalues.array() * t).exp().matrix();
  return sys.basis * decay.cwiseProduct(coeff);
}

double heat_kernel(const HeatSystem& sys, double t, int x, int y) {
  check_time(t);
  const Vector decay = (-sys.eigenvalues.array() * t).exp().matrix();
  return (sys.basis.row(x).transpose().cwiseProduct(decay)).dot(sys.basis.row(y).transpose());
}

Matrix heat_kernel_matrix(const HeatSystem& sys, double t) {
  check_time(t);
  const Vector decay = (-sys.eigenvalues.array() * t).exp().matrix();
  return sys.basis * decay.asDiagonal() * sys.basis.transpose();
}

Matrix heat_transition_uniformized(const MarkovChain& chain, double t) {
  check_time(t);
  const int n = chain.size();
  int squarings = 0;
  double tt = t;
  while (tt > 16.0) {
    tt *= 0.5;
    ++squarings;
  }
  Matrix term = std::exp(-tt) * Matrix::Identity(n, n);
  Matrix sum = term;
  for (int k = 1; k < 10000; ++k) {
    term = (tt / k) * (term * chain.q());
    sum += term;
    if (k > n && k > tt) {
      bool negligible = true;
      for (int i = 0; i < n && negligible; ++i)
        for (int j = 0; j < n; ++j)
          if (term(i, j) > 1e-18 * sum(i, j)) {
            negligible = false;
            break;
          }
      if (negligible) break;
    }
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

double mixing_distance(const HeatSystem& sys, double t) {
  const Matrix p = heat_kernel_matrix(sys, t);
  double acc = 0.0;
  for (int x = 0; x < sys.size(); ++x)
    for (int y = 0; y < sys.size(); ++y) acc += sys.pi(x) * sys.pi(y) * std::abs(p(x, y) - 1.0);
  return acc;
}

MixingResult avg_mixing_time(const HeatSystem& sys, double eps) {
  if (!(eps > 0.0)) throw InvalidParameters("mixing threshold eps must be positive");
  MixingResult res;
  res.eps = eps;
  std::vector<std::pair<double, double>> trace;
  auto phi = [&](double t) {
    const double v = mixing_distance(sys, t);
    trace.emplace_back(t, v);
    ++res.evaluations;
    return v;
  };
  res.phi0 = phi(0.0);
  if (res.phi0 <= eps) {
    res.eps_too_large = true;
    res.tau = 0.0;
    return res;
  }
  double lo = 0.0, hi = 1.0;
  while (phi(hi) > eps) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) throw NumericalFailure("mixing distance did not fall below eps by t = 1e9");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > eps ? lo : hi) = mid;
  }
  res.tau = hi;
  std::sort(trace.begin(), trace.end());
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i].second > trace[i - 1].second + 1e-12) res.monotone = false;
  return res;
}

Vector random_density(const MarkovChain& chain, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Vector w(chain.size());
  for (int x = 0; x < chain.size(); ++x) w(x) = expo(rng);
  w /= w.sum();
  Vector rho = w.cwiseQuotient(chain.pi());
  for (int x = 0; x < chain.size(); ++x) rho(x) = std::max(rho(x), 1e-9);
  return rho / rho.dot(chain.pi());
}

InequalityReport verify_gradient_estimate(const MarkovChain& chain, const Mean& mean, double k,
                                          double n, const VerifyOptions& opts,
                                          const Precondition& curvature) {
  const HeatSystem sys = spectral_decompose(chain);
  const double inv_n = std::isinf(n) ? 0.0 : 1.0 / n;
  SampleFn residual = [&](const Vector& rho, const Vector& f, double t, double* lhs, double* rhs) {
    const Vector prho = heat_apply(sys, t, rho).cwiseMax(1e-300);
    const Vector pf = heat_apply(sys, t, f);
    const double e = std::exp(-2.0 * k * t);
    const double a1 = a_form(chain, mean, prho, f);
    const double a2 = a_form(chain, mean, rho, pf);
    const Vector lpf = laplacian(chain, pf);
    const double d = inner_pi(chain, rho, lpf.cwiseProduct(lpf));
    const double r = inv_n == 0.0 ? 0.0 : decay_factor(k, t) * inv_n * d;
    const double l = e * a1 - a2;
    *lhs = l;
    *rhs = r;
    const double scale = std::abs(e * a1) + std::abs(a2) + std::abs(r);
    return scale > 0.0 ? (l - r) / scale : 0.0;
  };
  InequalityReport rep = run_sampled(chain, "gradient_estimate", ">=", opts, residual, {curvature});
  rep.values.emplace_back("K", k);
  rep.values.emplace_back("n", n);
  return rep;
}

ReversePoincareSides reverse_poincare_sides(const MarkovChain& chain, const HeatSystem& sys,
                                            const Mean& mean, double k, double n, const Vector& rho,
                                            const Vector& f, double t) {
  const Vector prho = heat_apply(sys, t, rho);
  const Vector pf = heat_apply(sys, t, f);
  const double l1 = inner_pi(chain, f.cwiseProduct(f), prho);
  const double l2 = inner_pi(chain, pf.cwiseProduct(pf), rho);
  const auto [e1, e2] = growth_factors(k, t);
  const double a = a_form(chain, mean, rho, pf);
  double second = 0.0;
  if (!std::isinf(n)) {
    const Vector lpf = laplacian(chain, pf);
    second = e2 / n * inner_pi(chain, rho, lpf.cwiseProduct(lpf));
  }
  ReversePoincareSides s;
  s.lhs = l1 - l2;
  s.rhs = e1 * a + second;
  s.scale = std::abs(l1) + std::abs(l2) + std::abs(e1 * a) + std::abs(second);
  return s;
}

InequalityReport verify_reverse_poincare(const MarkovChain& chain, const Mean& mean, double k,
                                         double n, const VerifyOptions& opts,
                                         const Precondition& curvature) {
  const HeatSystem sys = spectral_decompose(chain);
  SampleFn residual = [&](const Vector& rho, const Vector& f, double t, double* lhs, double* rhs) {
    const ReversePoincareSides s = reverse_poincare_sides(chain, sys, mean, k, n, rho, f, t);
    *lhs = s.lhs;
    *rhs = s.rhs;
    return s.scale > 0.0 ? (s.lhs - s.rhs) / s.scale : 0.0;
  };
  InequalityReport rep = run_sampled(chain, "reverse_poincare", ">=", opts, residual,
                                     {mean_below_arithmetic(mean), curvature});
  rep.values.emplace_back("K", k);
  rep.values.emplace_back("n", n);
  return rep;
}

InequalityReport check_linf_gradient_bound(const MarkovChain& chain, const VerifyOptions& opts,
                                           const Precondition& curvature) {
  const HeatSystem sys = spectral_decompose(chain);
  const double q_min = chain.stats().q_min;
  SampleFn residual = [&](const Vector&, const Vector& f, double t, double* lhs, double* rhs) {
    const Vector pf = heat_apply(sys, t, f);
    double worst = 0.0;
    for (int x = 0; x < chain.size(); ++x)
      for (int y : chain.neighbors(x)) worst = std::max(worst, std::abs(pf(y) - pf(x)));
    const double bound = t > 0.0 ? f.lpNorm<Eigen::Infinity>() / std::sqrt(t * q_min) : kPosInf;
    *lhs = worst;
    *rhs = bound;
    if (std::isinf(bound)) return 1.0;
    const double scale = worst + bound;
    return scale > 0.0 ? (bound - worst) / scale : 0.0;
  };
  InequalityReport rep =
      run_sampled(chain, "linf_gradient_bound", "<=", opts, residual, {curvature});
  rep.values.emplace_back("q_min", q_min);
  return rep;
}

InequalityReport check_heat_kernel_bound(const MarkovChain& chain,
                                         const std::vector<double>& t_grid) {
  InequalityReport rep;
  rep.name = "heat_kernel_bound";
  rep.relation = "<=";
  rep.worst_residual = kPosInf;
  const IntMatrix dist = distance_matrix(chain);
  const HeatSystem sys = spectral_decompose(chain);
  int count = 0;
  double spectral_gap = 0.0;
  for (double t : t_grid) {
    if (!(t > 0.0)) throw NegativeTime("heat kernel bound needs t > 0");
    const Matrix p = heat_transition_uniformized(chain, t);
    const Matrix ps = heat_kernel_matrix(sys, t);
    for (int x = 0; x < chain.size(); ++x)
      for (int y = 0; y < chain.size(); ++y) {
        const int r = dist(x, y);
        const double kernel = p(x, y) / chain.pi(y);
        spectral_gap = std::max(spectral_gap, std::abs(kernel - ps(x, y)) * chain.pi(y));
        const double bound = std::exp(r * std::log(t) - std::lgamma(r + 1.0)) / chain.pi(x);
        const double res = normalized_slack(kernel, bound, kernel + bound);
        ++count;
        if (res < rep.worst_residual) {
          rep.worst_residual = res;
          rep.lhs = kernel;
          rep.rhs = bound;
          Vector pair = Vector::Zero(chain.size());
          pair(x) = 1.0;
          pair(y) = pair(y) - 1.0;
          rep.witness = Witness{pair, Vector(), t};
        }
      }
  }
  rep.trials = count;
  rep.slack = rep.rhs - rep.lhs;
  rep.values.emplace_back("max_uniformized_vs_spectral", spectral_gap);
  finalize(rep, 1e-12);
  return rep;
}

}  // namespace curvkit
