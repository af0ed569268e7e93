#include "curvkit/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "curvkit/errors.hpp"
#include "curvkit/heat.hpp"

namespace curvkit {

namespace {

constexpr double kBarrierGap = 1e-9;
constexpr int kNewtonSteps = 30;

double gamma_at(const MarkovChain& chain, const Vector& f, int z) {
  double acc = 0.0;
  for (int w : chain.neighbors(z)) {
    const double d = f(w) - f(z);
    acc += chain.q(z, w) * d * d;
  }
  return 0.5 * acc;
}

Precondition simple_pre(const std::string& name, bool ok, const std::string& detail = {}) {
  Precondition p;
  p.name = name;
  p.status = ok ? PreconditionStatus::exact : PreconditionStatus::unmet;
  p.detail = detail;
  return p;
}

Precondition below_arithmetic(const Mean& mean) {
  Precondition p;
  p.name = "theta <= arithmetic mean";
  if (mean.kind() == MeanKind::custom) {
    p.status = PreconditionStatus::heuristic;
    p.detail = "custom mean, not checked";
  }
  return p;
}

double ratio_residual(double small, double large) {
  const double scale = std::abs(small) + std::abs(large);
  return scale > 0.0 ? (large - small) / scale : 0.0;
}

double tau_quarter(const MarkovChain& chain) {
  const MixingResult mr = avg_mixing_time(spectral_decompose(chain), 0.25);
  return mr.eps_too_large ? 0.0 : mr.tau;
}

}  // namespace

DGammaResult d_gamma_solve(const MarkovChain& chain, int x, int y) {
  const int n = chain.size();
  if (x < 0 || y < 0 || x >= n || y >= n) throw InvalidParameters("state index out of range");
  DGammaResult res;
  res.potential = Vector::Zero(n);
  if (x == y) return res;

  // Free coordinates: every state except x.
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int z = 0; z < n; ++z)
    if (z != x) idx[z] = m++;

  Vector f = Vector::Zero(n);
  auto barrier = [&](const Vector& g, double t, bool* feasible) {
    double acc = -t * g(y);
    for (int z = 0; z < n; ++z) {
      const double s = 1.0 - gamma_at(chain, g, z);
      if (!(s > 0.0)) {
        *feasible = false;
        return kPosInf;
      }
      acc -= std::log(s);
    }
    *feasible = true;
    return acc;
  };

  double t = 1.0;
  bool last_stage_converged = true;
  for (;;) {
    bool stage_converged = false;
    for (int it = 0; it < kNewtonSteps; ++it) {
      Vector grad = Vector::Zero(m);
      Matrix hess = Matrix::Zero(m, m);
      if (idx[y] >= 0) grad(idx[y]) -= t;
      for (int z = 0; z < n; ++z) {
        const double s = 1.0 - gamma_at(chain, f, z);
        // gradient of Gamma f(z) in full coordinates, supported on {z} and its neighbours
        std::vector<std::pair<int, double>> gz;
        double self = 0.0;
        for (int w : chain.neighbors(z)) {
          const double c = chain.q(z, w) * (f(w) - f(z));
          gz.emplace_back(w, c);
          self -= c;
          const double hq = chain.q(z, w) / s;
          const int iw = idx[w], iz = idx[z];
          if (iw >= 0) hess(iw, iw) += hq;
          if (iz >= 0) hess(iz, iz) += hq;
          if (iw >= 0 && iz >= 0) {
            hess(iw, iz) -= hq;
            hess(iz, iw) -= hq;
          }
        }
        gz.emplace_back(z, self);
        for (const auto& [a, va] : gz) {
          if (idx[a] < 0) continue;
          grad(idx[a]) += va / s;
          for (const auto& [b, vb] : gz)
            if (idx[b] >= 0) hess(idx[a], idx[b]) += va * vb / (s * s);
        }
      }
      const Vector step = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(step);
      ++res.newton_steps;
      if (!std::isfinite(decrement)) break;
      if (decrement * 0.5 < 1e-12) {
        stage_converged = true;
        break;
      }
      bool feasible = false;
      const double phi0 = barrier(f, t, &feasible);
      double alpha = 1.0;
      Vector trial = f;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt, alpha *= 0.5) {
        trial = f;
        for (int z = 0; z < n; ++z)
          if (idx[z] >= 0) trial(z) += alpha * step(idx[z]);
        const double phi = barrier(trial, t, &feasible);
        if (feasible && phi <= phi0 - 0.25 * alpha * decrement) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        stage_converged = true;  // no further progress at machine precision
        break;
      }
      f = trial;
    }
    last_stage_converged = stage_converged;
    if (n / t < kBarrierGap) break;
    t *= 10.0;
  }
  res.value = f(y) - f(x);
  res.gap = n / t;
  res.converged = last_stage_converged;
  res.potential = f;
  return res;
}

double d_gamma(const MarkovChain& chain, int x, int y) { return d_gamma_solve(chain, x, y).value; }

Matrix d_gamma_matrix(const MarkovChain& chain) {
  const int n = chain.size();
  Matrix d = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) d(x, y) = d(y, x) = d_gamma(chain, x, y);
  return d;
}

double diam_gamma(const MarkovChain& chain) { return d_gamma_matrix(chain).maxCoeff(); }

int diam_combinatorial(const MarkovChain& chain) { return distance_matrix(chain).maxCoeff(); }

double boundary_measure(const MarkovChain& chain, const std::vector<int>& w) {
  std::vector<char> in(chain.size(), 0);
  for (int x : w) in[x] = 1;
  double acc = 0.0;
  for (int x : w)
    for (int y : chain.neighbors(x))
      if (!in[y]) acc += chain.weight(x, y);
  return acc;
}

CheegerResult cheeger(const MarkovChain& chain) {
  const int n = chain.size();
  if (n > 32) throw TooLarge("exact Cheeger enumeration supports at most 32 states");
  CheegerResult best;
  best.h = kPosInf;
  if (n < 2) return best;

  // T ranges over subsets of the first n-1 states; W is T or its complement.
  const int bits = n - 1;
  std::vector<std::vector<std::pair<int, double>>> nb(n);
  for (int x = 0; x < n; ++x)
    for (int y : chain.neighbors(x)) nb[x].emplace_back(y, chain.weight(x, y));

  auto exact = [&](std::uint64_t mask, double* cut, double* p) {
    *cut = 0.0;
    *p = 0.0;
    for (int x = 0; x < bits; ++x) {
      if (!((mask >> x) & 1U)) continue;
      *p += chain.pi(x);
      for (const auto& [y, w] : nb[x])
        if (!((mask >> y) & 1U)) *cut += w;
    }
  };
  auto members = [&](std::uint64_t mask, bool complement) {
    std::vector<int> out;
    for (int x = 0; x < n; ++x) {
      const bool in = x < bits && ((mask >> x) & 1U);
      if (in != complement) out.push_back(x);
    }
    return out;
  };
  auto consider = [&](std::uint64_t mask, double cut, double p) {
    const double half = 0.5 * (1.0 + 1e-12);
    for (int side = 0; side < 2; ++side) {
      const double measure = side == 0 ? p : 1.0 - p;
      if (measure > half || measure <= 0.0) continue;
      if (cut < best.h * measure * (1.0 - 1e-12)) {
        double c = 0.0, q = 0.0;
        exact(mask, &c, &q);
        const double mm = side == 0 ? q : 1.0 - q;
        if (c / mm < best.h) {
          best.h = c / mm;
          best.boundary = c;
          best.measure = mm;
          best.argmin = members(mask, side == 1);
        }
      }
    }
  };

  std::uint64_t mask = 0;
  double cut = 0.0, p = 0.0;
  const std::uint64_t total = std::uint64_t{1} << bits;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int v = std::countr_zero(i);
    const std::uint64_t bit = std::uint64_t{1} << v;
    const bool adding = !(mask & bit);
    mask ^= bit;
    double delta = 0.0;
    for (const auto& [y, w] : nb[v]) {
      const bool y_in = y < bits && ((mask >> y) & 1U);
      delta += y_in ? -w : w;
    }
    if (adding) {
      cut += delta;
      p += chain.pi(v);
    } else {
      cut -= delta;
      p -= chain.pi(v);
    }
    if ((i & 0xFFFFU) == 0) exact(mask, &cut, &p);
    consider(mask, cut, p);
  }
  return best;
}

CheegerResult cheeger_bruteforce(const MarkovChain& chain) {
  const int n = chain.size();
  if (n > 24) throw TooLarge("brute-force Cheeger enumeration supports at most 24 states");
  CheegerResult best;
  best.h = kPosInf;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<int> w;
    double p = 0.0;
    for (int x = 0; x < n; ++x)
      if ((mask >> x) & 1U) {
        w.push_back(x);
        p += chain.pi(x);
      }
    if (p > 0.5 * (1.0 + 1e-12)) continue;
    const double cut = boundary_measure(chain, w);
    if (cut / p < best.h) {
      best.h = cut / p;
      best.argmin = w;
      best.boundary = cut;
      best.measure = p;
    }
  }
  return best;
}

double gradient_l1(const MarkovChain& chain, const Vector& f) {
  double acc = 0.0;
  for (int x = 0; x < chain.size(); ++x)
    for (int y : chain.neighbors(x)) acc += std::abs(f(y) - f(x)) * chain.weight(x, y);
  return 0.5 * acc;
}

InequalityReport check_cheeger_l1(const MarkovChain& chain, int trials, std::uint64_t seed,
                                  const CheegerResult* h_in) {
  const CheegerResult h = h_in ? *h_in : cheeger(chain);
  InequalityReport rep;
  rep.name = "cheeger_l1";
  rep.relation = ">=";
  rep.worst_residual = kPosInf;
  const Vector& pi = chain.pi();
  auto sample = [&](Vector f) {
    f.array() -= f.dot(pi);
    const double l = gradient_l1(chain, f);
    const double r = 0.5 * h.h * f.cwiseAbs().dot(pi);
    const double res = ratio_residual(r, l);
    if (res < rep.worst_residual) {
      rep.worst_residual = res;
      rep.lhs = l;
      rep.rhs = r;
      rep.witness = Witness{Vector(), f, 0.0};
    }
    return std::make_pair(l, r);
  };
  Vector ind = Vector::Zero(chain.size());
  for (int x : h.argmin) ind(x) = 1.0;
  const auto [il, ir] = sample(ind);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < trials; ++i) {
    Vector f(chain.size());
    for (int x = 0; x < chain.size(); ++x) f(x) = unif(rng);
    sample(f);
  }
  rep.trials = trials + 1;
  rep.slack = rep.lhs - rep.rhs;
  rep.values.emplace_back("h", h.h);
  rep.values.emplace_back("indicator_ratio", ir > 0.0 ? il / ir : kPosInf);
  finalize(rep);
  return rep;
}

InequalityReport check_diameter_bound_ent(const MarkovChain& chain, double k,
                                          const Precondition& curvature, const Matrix* dgamma) {
  InequalityReport rep;
  rep.name = "diameter_bound_entropic";
  rep.relation = "<=";
  rep.preconditions.push_back(simple_pre("K > 0", k > 0.0, "K = " + std::to_string(k)));
  rep.preconditions.push_back(curvature);
  const double dpi = chain.stats().deg_pi_max;
  const double c = std::abs(dpi - 1.0) < 1e-12 ? 1.0 : dpi * std::log(dpi) / (dpi - 1.0);
  const double diam_g = dgamma ? dgamma->maxCoeff() : diam_gamma(chain);
  const double diam_d = diam_combinatorial(chain);
  const double rhs_g = k > 0.0 ? (2.0 / k) * std::sqrt(2.0 * c) : kPosInf;
  const double rhs_d = k > 0.0 ? (2.0 / k) * std::sqrt(c) : kPosInf;
  rep.lhs = diam_g;
  rep.rhs = rhs_g;
  rep.slack = rhs_g - diam_g;
  rep.worst_residual = std::min(ratio_residual(diam_g, rhs_g), ratio_residual(diam_d, rhs_d));
  rep.values = {{"K", k}, {"D_pi", dpi}, {"diam_d", diam_d}, {"rhs_d", rhs_d}};
  finalize(rep);
  return rep;
}

InequalityReport check_diameter_bound_finite_n(const MarkovChain& chain, const Mean& mean, double k,
                                               double n, const Precondition& curvature,
                                               const Matrix* dgamma) {
  InequalityReport rep;
  rep.name = "diameter_bound_finite_dimension";
  rep.relation = "<=";
  rep.preconditions.push_back(simple_pre("K > 0", k > 0.0, "K = " + std::to_string(k)));
  rep.preconditions.push_back(simple_pre("n finite", std::isfinite(n) && n > 0.0));
  rep.preconditions.push_back(below_arithmetic(mean));
  rep.preconditions.push_back(curvature);
  const double dmax = chain.stats().deg_weighted_max;
  const double diam_g = dgamma ? dgamma->maxCoeff() : diam_gamma(chain);
  const double diam_d = diam_combinatorial(chain);
  const bool ok = k > 0.0 && std::isfinite(n);
  const double rhs_g = ok ? std::numbers::pi * std::sqrt(n / k) : kPosInf;
  const double rhs_d = ok ? std::numbers::pi * std::sqrt(dmax * n / (2.0 * k)) : kPosInf;
  rep.lhs = diam_g;
  rep.rhs = rhs_g;
  rep.slack = rhs_g - diam_g;
  rep.worst_residual = std::min(ratio_residual(diam_g, rhs_g), ratio_residual(diam_d, rhs_d));
  rep.values = {{"K", k}, {"n", n}, {"D", dmax}, {"diam_d", diam_d}, {"rhs_d", rhs_d}};
  finalize(rep);
  return rep;
}

InequalityReport check_tau_lower_bound(const MarkovChain& chain) {
  const ChainStats& st = chain.stats();
  InequalityReport rep;
  rep.name = "mixing_time_lower_bound";
  rep.relation = ">=";
  rep.preconditions.push_back(simple_pre("pi_max < 1/4", st.pi_max < 0.25));
  rep.preconditions.push_back(simple_pre("Q_min < 1", st.q_min < 1.0));
  if (!(st.pi_max < 0.25 && st.q_min < 1.0)) {
    finalize(rep);
    return rep;
  }
  const double r0 = std::log(4.0 * st.pi_max) / std::log(st.q_min);
  const double rhs = std::pow(st.pi_min / (8.0 * st.pi_max), 1.0 / r0) * (st.q_min / std::numbers::e) * r0;
  const double tau = tau_quarter(chain);
  rep.lhs = tau;
  rep.rhs = rhs;
  rep.slack = tau - rhs;
  rep.worst_residual = ratio_residual(rhs, tau);
  rep.values = {{"R0", r0}, {"tau_avg", tau}};
  finalize(rep);
  return rep;
}

InequalityReport check_buser(const MarkovChain& chain, const Precondition& curvature,
                             const CheegerResult* h_in) {
  const CheegerResult h = h_in ? *h_in : cheeger(chain);
  const double q_min = chain.stats().q_min;
  InequalityReport rep;
  rep.name = "buser";
  rep.relation = "<=";
  rep.preconditions.push_back(curvature);
  rep.lhs = lambda1(chain);
  rep.rhs = 16.0 * std::numbers::ln2 * h.h * h.h / q_min;
  rep.slack = rep.rhs - rep.lhs;
  rep.worst_residual = ratio_residual(rep.lhs, rep.rhs);
  rep.values = {{"h", h.h}, {"q_min", q_min}};
  finalize(rep);
  return rep;
}

InequalityReport check_lambda_tau(const MarkovChain& chain, const Precondition& curvature) {
  const double q_min = chain.stats().q_min;
  InequalityReport rep;
  rep.name = "lambda1_tau";
  rep.relation = "<=";
  rep.preconditions.push_back(curvature);
  const double l1 = lambda1(chain);
  const double tau = tau_quarter(chain);
  rep.lhs = l1 * tau;
  rep.rhs = 256.0 * std::numbers::ln2 / (q_min * q_min);
  rep.slack = rep.rhs - rep.lhs;
  rep.worst_residual = ratio_residual(rep.lhs, rep.rhs);
  rep.values = {{"lambda1", l1}, {"tau_avg", tau}};
  finalize(rep);
  return rep;
}

int regular_degree(const MarkovChain& chain) {
  const int d = static_cast<int>(chain.neighbors(0).size());
  if (d == 0) return 0;
  for (int x = 0; x < chain.size(); ++x) {
    if (static_cast<int>(chain.neighbors(x).size()) != d || chain.q(x, x) != 0.0) return 0;
    for (int y : chain.neighbors(x))
      if (std::abs(chain.q(x, y) - 1.0 / d) > 1e-12) return 0;
  }
  return d;
}

std::vector<InequalityReport> check_expander_bounds(const MarkovChain& chain,
                                                    const Precondition& curvature) {
  const ChainStats& st = chain.stats();
  const double l1 = lambda1(chain);
  std::vector<InequalityReport> out;

  InequalityReport a;
  a.name = "expander_lambda1_bound";
  a.relation = "<=";
  a.preconditions.push_back(simple_pre("pi_max < 1/4", st.pi_max < 0.25));
  a.preconditions.push_back(simple_pre("Q_min < 1", st.q_min < 1.0));
  a.preconditions.push_back(curvature);
  a.lhs = l1;
  if (st.pi_max < 0.25 && st.q_min < 1.0) {
    const double r0 = std::log(4.0 * st.pi_max) / std::log(st.q_min);
    a.rhs = 483.0 / std::pow(st.q_min, 3) * std::pow(8.0 * st.pi_max / st.pi_min, 1.0 / r0) / r0;
    a.slack = a.rhs - a.lhs;
    a.worst_residual = ratio_residual(a.lhs, a.rhs);
    a.values = {{"R0", r0}};
  }
  finalize(a);
  out.push_back(a);

  InequalityReport b;
  b.name = "expander_regular_bound";
  b.relation = "<=";
  const int d = regular_degree(chain);
  const int size = chain.size();
  b.preconditions.push_back(simple_pre("simple random walk on a d-regular graph, d >= 2", d >= 2,
                                       "d = " + std::to_string(d)));
  b.preconditions.push_back(simple_pre("|X| >= 4d", d >= 2 && size >= 4 * d));
  b.preconditions.push_back(curvature);
  if (d >= 2 && size >= 4 * d) {
    b.lhs = d * l1;
    b.rhs = 4000.0 * std::pow(d, 4) * std::log(d) / std::log(size / 4.0);
    b.slack = b.rhs - b.lhs;
    b.worst_residual = ratio_residual(b.lhs, b.rhs);
    b.values = {{"d", d}};
  }
  finalize(b);
  out.push_back(b);
  return out;
}

InequalityReport check_dd_gamma(const MarkovChain& chain, const Matrix* dgamma) {
  const Matrix dg = dgamma ? *dgamma : d_gamma_matrix(chain);
  const IntMatrix d = distance_matrix(chain);
  const double factor = std::sqrt(chain.stats().deg_weighted_max / 2.0);
  InequalityReport rep;
  rep.name = "combinatorial_vs_gamma_distance";
  rep.relation = "<=";
  rep.worst_residual = kPosInf;
  int count = 0;
  for (int x = 0; x < chain.size(); ++x)
    for (int y = x + 1; y < chain.size(); ++y) {
      const double a = d(x, y), b = factor * dg(x, y), c = dg(x, y) / std::numbers::sqrt2;
      const double res = std::min(ratio_residual(a, b), ratio_residual(b, c));
      ++count;
      if (res < rep.worst_residual) {
        rep.worst_residual = res;
        rep.lhs = a;
        rep.rhs = b;
      }
    }
  if (count == 0) rep.worst_residual = 0.0;
  rep.trials = count;
  rep.slack = rep.rhs - rep.lhs;
  rep.values = {{"sqrt_D_over_2", factor}};
  finalize(rep);
  return rep;
}

}  // namespace curvkit
