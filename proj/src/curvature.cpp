#include "curvkit/curvature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "curvkit/errors.hpp"
#include "curvkit/heat.hpp"

namespace curvkit {

namespace {

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

CurvatureResult solve_pencil(const Matrix& m, const Matrix& n) {
  CurvatureResult res;
  res.method = SolverMethod::pencil;
  const int size = static_cast<int>(m.rows());
  res.witness = Vector::Zero(size);

  Eigen::SelfAdjointEigenSolver<Matrix> esn(n);
  const Vector& nev = esn.eigenvalues();
  const double nscale = size > 0 ? nev.cwiseAbs().maxCoeff() : 0.0;
  if (nscale == 0.0) {
    res.value = kPosInf;
    res.warnings.push_back("N vanishes identically; curvature is +inf");
    return res;
  }
  const double ntol = 1e-12 * nscale;
  std::vector<int> null_idx, pos_idx;
  for (int i = 0; i < size; ++i) (nev(i) > ntol ? pos_idx : null_idx).push_back(i);
  const int k = static_cast<int>(null_idx.size());
  const int r = static_cast<int>(pos_idx.size());
  res.null_dim = k;

  Matrix u(size, k), v(size, r);
  Vector d(r);
  for (int i = 0; i < k; ++i) u.col(i) = esn.eigenvectors().col(null_idx[i]);
  for (int i = 0; i < r; ++i) {
    v.col(i) = esn.eigenvectors().col(pos_idx[i]);
    d(i) = nev(pos_idx[i]);
  }

  const double mscale = std::max(spectral_norm(m), 1e-300);
  Matrix s = v.transpose() * m * v;
  Matrix a_pinv_bt = Matrix::Zero(k, r);  // A^+ B^T
  if (k > 0) {
    Matrix a = u.transpose() * m * u;
    a = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> esa(a);
    const double atol = 1e-10 * mscale;
    if (esa.eigenvalues()(0) < -atol) {
      res.value = kNegInf;
      res.witness = u * esa.eigenvectors().col(0);
      res.warnings.push_back("M is indefinite on null(N)");
      return res;
    }
    const Matrix b = v.transpose() * m * u;  // r x k
    Matrix a_pinv = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      const double ai = esa.eigenvalues()(i);
      const Vector vi = esa.eigenvectors().col(i);
      if (ai > atol) {
        a_pinv += vi * vi.transpose() / ai;
      } else if ((b * vi).norm() > 1e-8 * mscale) {
        res.value = kNegInf;
        res.witness = u * vi;
        res.warnings.push_back("range of B^T not contained in range of M on null(N)");
        return res;
      }
    }
    a_pinv_bt = a_pinv * b.transpose();
    s -= b * a_pinv_bt;
  }
  const Vector dm = d.cwiseSqrt().cwiseInverse();
  Matrix t = dm.asDiagonal() * s * dm.asDiagonal();
  t = 0.5 * (t + t.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> est(t);
  res.value = est.eigenvalues()(0);
  if (r > 1) res.eigen_gap = est.eigenvalues()(1) - est.eigenvalues()(0);
  const Vector g = dm.cwiseProduct(est.eigenvectors().col(0));
  res.witness = v * g - u * (a_pinv_bt * g);
  return res;
}

CurvatureResult solve_bisection(const Matrix& m, const Matrix& n, double q_min) {
  CurvatureResult res;
  res.method = SolverMethod::bisection;
  const double sm = spectral_norm(m), sn = spectral_norm(n);
  if (sn == 0.0) {
    res.value = kPosInf;
    res.warnings.push_back("N vanishes identically; curvature is +inf");
    return res;
  }
  auto psd = [&](double k) {
    return min_eigenvalue(m - k * n) >= -1e-13 * (sm + std::abs(k) * sn);
  };
  constexpr double cap = 1e6;
  double lo = -4.0 / std::max(q_min, 1e-12), hi = 4.0;
  while (!psd(lo)) {
    hi = lo;
    lo *= 2.0;
    if (lo < -cap) {
      res.value = kNegInf;
      res.bracket_lo = lo;
      res.bracket_hi = hi;
      return res;
    }
  }
  while (psd(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) {
      res.value = hi;
      res.warnings.push_back("bisection bracket exceeded the cap on |K|");
      return res;
    }
  }
  int it = 0;
  while (hi - lo > 1e-13 * std::max(1.0, std::abs(lo)) && it < 200) {
    const double mid = 0.5 * (lo + hi);
    (psd(mid) ? lo : hi) = mid;
    ++it;
  }
  res.value = 0.5 * (lo + hi);
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  res.iterations = it;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m - res.value * n);
  res.witness = es.eigenvectors().col(0);
  return res;
}

CurvatureResult curvature_of_measure(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                                     double n, const CurvatureOptions& opts) {
  const FormPair fp = assemble_forms(chain, mean, rho, n, /*restrict_to_support=*/true);
  CurvatureResult res = solve_pencil(fp.m, fp.n_form);
  res.witness = fp.expand(res.witness, chain.size());
  if (chain.size() == 1) {
    res.warnings.push_back("single-state chain: curvature is +inf");
    return res;
  }
  if (!opts.cross_check) return res;

  const CurvatureResult bis = solve_bisection(fp.m, fp.n_form, chain.stats().q_min);
  res.bisection_value = bis.value;
  res.bracket_lo = bis.bracket_lo;
  res.bracket_hi = bis.bracket_hi;
  res.iterations = bis.iterations;
  const bool both_neg_inf = std::isinf(res.value) && std::isinf(bis.value) && res.value < 0 &&
                            bis.value < 0;
  if (!both_neg_inf) {
    const double diff = std::abs(res.value - bis.value);
    if (!(diff <= opts.agreement_tol * std::max(1.0, std::abs(res.value))))
      throw NumericalFailure("pencil (" + std::to_string(res.value) + ") and bisection (" +
                             std::to_string(bis.value) + ") curvature disagree");
  }
  return res;
}

CurvatureResult bakry_emery_vertex(const MarkovChain& chain, int x, double n,
                                   const CurvatureOptions& opts) {
  return curvature_of_measure(chain, Mean::arithmetic(), dirac(chain, x), n, opts);
}

GlobalCurvature bakry_emery_global(const MarkovChain& chain, double n,
                                   const CurvatureOptions& opts) {
  GlobalCurvature g;
  g.value = kPosInf;
  for (int x = 0; x < chain.size(); ++x) {
    const double k = bakry_emery_vertex(chain, x, n, opts).value;
    g.per_vertex.push_back(k);
    if (k < g.value) {
      g.value = k;
      g.argmin = x;
    }
  }
  return g;
}

CurvatureGradient curvature_gradient(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                                     double n) {
  CurvatureGradient out;
  const FormPair fp = assemble_forms(chain, mean, rho, n, false);
  const CurvatureResult res = solve_pencil(fp.m, fp.n_form);
  out.value = res.value;
  const int size = chain.size();
  out.grad = Vector::Zero(size);
  if (!std::isfinite(res.value)) return out;

  if (res.eigen_gap >= 1e-7) {
    const Vector& f = res.witness;
    const double denom = f.dot(fp.n_form * f);
    const FormGradient fg = form_gradient(chain, mean, rho, n, f);
    out.grad = (fg.d_m - res.value * fg.d_n) / denom;
    return out;
  }
  out.finite_difference = true;
  CurvatureOptions fast;
  fast.cross_check = false;
  for (int i = 0; i < size; ++i) {
    const double h = 1e-6 * rho(i);
    Vector rp = rho, rm = rho;
    rp(i) += h;
    rm(i) -= h;
    const double kp = curvature_of_measure(chain, mean, rp, n, fast).value;
    const double km = curvature_of_measure(chain, mean, rm, n, fast).value;
    out.grad(i) = (kp - km) / (2.0 * h);
  }
  return out;
}

namespace {

struct StartOutcome {
  StartResult summary;
  double best_k = kPosInf;
  Vector best_rho;
  long evaluations = 0;
};

class EntropicObjective {
 public:
  EntropicObjective(const MarkovChain& chain, double n) : chain_(chain), n_(n) {}

  Vector density(const Vector& u) const {
    Vector rho = (u.array() - u.maxCoeff()).exp().matrix();
    return rho / rho.dot(chain_.pi());
  }

  // K at rho(u) and its gradient in u.
  double operator()(const Vector& u, Vector& grad, StartOutcome& out) const {
    const Vector rho = density(u);
    const CurvatureGradient cg = curvature_gradient(chain_, Mean::logarithmic(), rho, n_);
    ++out.evaluations;
    if (cg.value < out.best_k) {
      out.best_k = cg.value;
      out.best_rho = rho;
    }
    const double proj = cg.grad.dot(rho);
    grad = rho.cwiseProduct(cg.grad) - proj * rho.cwiseProduct(chain_.pi());
    return cg.value;
  }

 private:
  const MarkovChain& chain_;
  double n_;
};

StartOutcome run_start(const MarkovChain& chain, const EntropicOptions& opts, Vector u,
                       std::string kind) {
  StartOutcome out;
  out.summary.kind = std::move(kind);
  const EntropicObjective obj(chain, opts.n);
  const int dim = static_cast<int>(u.size());

  auto clamp = [](Vector& x) {
    const double top = x.maxCoeff();
    for (int i = 0; i < x.size(); ++i) x(i) = std::max(x(i), top - 25.0);
  };

  Vector g(dim);
  double f = obj(u, g, out);
  if (!std::isfinite(f)) {
    out.summary.k = out.best_k;
    return out;
  }
  Matrix h = Matrix::Identity(dim, dim);
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-10) {
      converged = true;
      break;
    }
    Vector p = -h * g;
    if (g.dot(p) >= 0.0) {
      h.setIdentity();
      p = -g;
    }
    double alpha = 1.0;
    const double pmax = p.lpNorm<Eigen::Infinity>();
    if (pmax > 5.0) alpha = 5.0 / pmax;
    Vector u_new, g_new(dim);
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      u_new = u + alpha * p;
      clamp(u_new);
      f_new = obj(u_new, g_new, out);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * alpha * g.dot(p)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No descent along p: a kink of the minimal eigenvalue or a flat minimum.
      converged = g.lpNorm<Eigen::Infinity>() < 1e-6;
      break;
    }
    const Vector s = u_new - u;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho_k = 1.0 / sy;
      const Matrix i_sy = Matrix::Identity(dim, dim) - rho_k * s * y.transpose();
      h = i_sy * h * i_sy.transpose() + rho_k * s * s.transpose();
    }
    const double drop = f - f_new;
    u = u_new;
    g = g_new;
    f = f_new;
    if (drop < opts.tol * std::max(1.0, std::abs(f))) {
      converged = true;
      ++it;
      break;
    }
  }
  out.summary.k = out.best_k;
  out.summary.converged = converged;
  out.summary.iterations = it;
  return out;
}

}  // namespace

EntropicEstimate entropic_curvature_estimate(const MarkovChain& chain, const EntropicOptions& opts) {
  if (opts.starts < 1) throw InvalidParameters("entropic estimate needs at least one start");
  if (!(opts.n > 0.0)) throw InvalidParameters("dimension n must lie in (0, inf]");
  const int size = chain.size();
  const int dirac_starts = std::min({8, size, opts.starts - 1});

  // Initial points are fixed up front so results do not depend on scheduling.
  std::vector<Vector> inits;
  std::vector<std::string> kinds;
  inits.push_back(Vector::Zero(size));
  kinds.emplace_back("equilibrium");
  for (int x = 0; x < dirac_starts; ++x) {
    Vector rho = 0.1 * Vector::Ones(size);
    rho(x) += 0.9 / chain.pi(x);
    inits.push_back(rho.array().log().matrix());
    kinds.push_back("dirac:" + chain.state(x));
  }
  for (int i = static_cast<int>(inits.size()); i < opts.starts; ++i) {
    std::mt19937_64 rng(splitmix64(opts.seed ^ splitmix64(static_cast<std::uint64_t>(i))));
    std::exponential_distribution<double> expo(1.0);
    Vector rho(size);
    for (int x = 0; x < size; ++x) rho(x) = expo(rng);
    rho /= rho.sum();
    for (int x = 0; x < size; ++x) rho(x) = std::max(rho(x) / chain.pi(x), 1e-9);
    inits.push_back(rho.array().log().matrix());
    kinds.emplace_back("dirichlet");
  }

  std::vector<StartOutcome> outcomes(inits.size());
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < static_cast<int>(inits.size()); i = next++)
      outcomes[i] = run_start(chain, opts, inits[i], kinds[i]);
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(inits.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  EntropicEstimate est;
  est.starts = static_cast<int>(inits.size());
  for (const auto& o : outcomes) {
    est.per_start.push_back(o.summary);
    est.evaluations += o.evaluations;
    if (o.best_k < est.k_hat) {
      est.k_hat = o.best_k;
      est.rho_star = o.best_rho;
    }
  }
  est.min_evaluated = est.k_hat;
  est.certified_nonnegative = est.k_hat >= -1e-6;
  return est;
}

double lambda1(const MarkovChain& chain) {
  if (chain.size() < 2) return kPosInf;
  return spectral_decompose(chain).eigenvalues(1);
}

LichnerowiczReport lichnerowicz_check(const MarkovChain& chain, const Mean& mean,
                                      const EntropicOptions& entropic) {
  LichnerowiczReport rep;
  rep.mean = mean.name();
  rep.lambda1 = lambda1(chain);
  if (mean.kind() == MeanKind::arithmetic) {
    rep.k_inf = bakry_emery_global(chain, kInfDim).value;
    rep.exact = true;
  } else if (mean.kind() == MeanKind::logarithmic) {
    EntropicOptions o = entropic;
    o.n = kInfDim;
    rep.k_inf = entropic_curvature_estimate(chain, o).k_hat;
    rep.exact = false;
  } else {
    throw InvalidParameters("Lichnerowicz check supports the arithmetic and logarithmic means");
  }
  rep.sharp = rep.lambda1 - rep.k_inf <= 1e-6;
  return rep;
}

CurvatureProfile curvature_profile(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                                   const std::vector<double>& n_grid) {
  CurvatureProfile prof;
  for (double n : n_grid) {
    if (!(n > 0.0)) throw InvalidParameters("profile dimensions must lie in (0, inf]");
    const double s = std::isinf(n) ? 0.0 : 1.0 / n;
    prof.points.push_back({s, curvature_of_measure(chain, mean, rho, n).value});
  }
  std::sort(prof.points.begin(), prof.points.end(),
            [](const ProfilePoint& a, const ProfilePoint& b) { return a.s < b.s; });
  const auto& p = prof.points;
  for (std::size_t j = 1; j + 1 < p.size(); ++j) {
    const auto& a = p[j - 1];
    const auto& b = p[j + 1];
    if (!std::isfinite(a.k) || !std::isfinite(b.k) || !std::isfinite(p[j].k) || b.s == a.s)
      continue;
    const double chord = a.k + (b.k - a.k) * (p[j].s - a.s) / (b.s - a.s);
    prof.worst_concavity = std::min(prof.worst_concavity, p[j].k - chord);
  }
  prof.concave = prof.worst_concavity >= -1e-9;
  return prof;
}

bool is_hypercube_walk(const MarkovChain& chain, int* dimension) {
  const int size = chain.size();
  int dim = 0;
  while ((1 << dim) < size) ++dim;
  if ((1 << dim) != size || dim < 1) return false;
  for (int x = 0; x < size; ++x) {
    const std::string& id = chain.state(x);
    if (static_cast<int>(id.size()) != dim) return false;
    if (id.find_first_not_of("01") != std::string::npos) return false;
  }
  for (int x = 0; x < size; ++x) {
    if (static_cast<int>(chain.neighbors(x).size()) != dim) return false;
    if (std::abs(chain.q(x, x)) > 0.0) return false;
    for (int y : chain.neighbors(x)) {
      int diff = 0;
      for (int b = 0; b < dim; ++b) diff += chain.state(x)[b] != chain.state(y)[b];
      if (diff != 1 || std::abs(chain.q(x, y) - 1.0 / dim) > kChainTolerance) return false;
    }
  }
  if (dimension) *dimension = dim;
  return true;
}

Precondition curvature_precondition(const MarkovChain& chain, const Mean& mean, double k,
                                    double n, const EntropicOptions& entropic) {
  Precondition p;
  p.name = "CD_" + mean.name() + "(" + std::to_string(k) + ", " +
           (std::isinf(n) ? std::string("inf") : std::to_string(n)) + ")";
  if (mean.kind() == MeanKind::arithmetic) {
    const double kx = bakry_emery_global(chain, n).value;
    p.status = k <= kx + 1e-9 ? PreconditionStatus::exact : PreconditionStatus::unmet;
    p.detail = "min vertex curvature " + std::to_string(kx);
    return p;
  }
  if (mean.kind() == MeanKind::logarithmic) {
    int dim = 0;
    if (std::isinf(n) && is_hypercube_walk(chain, &dim) && k <= 2.0 / dim + 1e-12) {
      p.status = PreconditionStatus::exact;
      p.detail = "hypercube walk of dimension " + std::to_string(dim) + " has entropic curvature 2/N";
      return p;
    }
    EntropicOptions o = entropic;
    o.n = n;
    const double kh = entropic_curvature_estimate(chain, o).k_hat;
    p.status = kh >= k - 1e-6 ? PreconditionStatus::heuristic : PreconditionStatus::unmet;
    p.detail = "multi-start estimate " + std::to_string(kh) + " (upper bound on the true value)";
    return p;
  }
  p.status = PreconditionStatus::heuristic;
  p.detail = "curvature bound not checked for the " + mean.name() + " mean";
  return p;
}

}  // namespace curvkit
