#include "curvkit/optimal_sets.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "curvkit/curvature.hpp"
#include "curvkit/errors.hpp"

namespace curvkit {

namespace {

constexpr double kKernelThreshold = 1e-8;
constexpr double kGammaVanish = 1e-9;
constexpr double kGammaPositive = 1e-10;
constexpr int kRandomDraws = 100;

std::vector<int> sorted_unique(std::vector<int> set, int size) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  for (int x : set)
    if (x < 0 || x >= size) throw InvalidParameters("state index out of range: " + std::to_string(x));
  return set;
}

}  // namespace

OptimalityOracle::OptimalityOracle(const MarkovChain& chain, double n, std::uint64_t seed)
    : chain_(chain), n_(n), seed_(seed) {
  const GlobalCurvature g = bakry_emery_global(chain, n);
  k_ = g.value;
  per_vertex_ = g.per_vertex;
  for (int x = 0; x < chain.size(); ++x)
    if (per_vertex_[x] <= k_ + 1e-9) zero_cells_.push_back(x);
  const Mean arith = Mean::arithmetic();
  for (int x = 0; x < chain.size(); ++x) {
    Vector e = Vector::Zero(chain.size());
    e(x) = 1.0;
    const FormPair fp = assemble_forms(chain, arith, e, n, false);
    q_.push_back(fp.m - k_ * fp.n_form);
    g_.push_back(fp.n_form);
    scale_.push_back(fp.m.norm() + std::abs(k_) * fp.n_form.norm());
  }
}

OptimalityCertificate OptimalityOracle::test(const std::vector<int>& set_in) const {
  const int size = chain_.size();
  const std::vector<int> set = sorted_unique(set_in, size);
  if (set.empty()) throw InvalidParameters("optimality needs a nonempty set");

  OptimalityCertificate cert;
  cert.k_global = k_;
  Matrix s = Matrix::Zero(size, size);
  double form_scale = 0.0;
  for (int x : set) {
    s += q_[x];
    form_scale += scale_[x];
  }
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  // The sum can vanish identically (Lichnerowicz-sharp chains), so the
  // threshold never drops below the size of the forms it was built from.
  const double smax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), form_scale);
  std::vector<int> cols;
  for (int i = 0; i < size; ++i)
    if (std::abs(es.eigenvalues()(i)) <= kKernelThreshold * smax || smax == 0.0) cols.push_back(i);
  Matrix basis(size, static_cast<int>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) basis.col(j) = es.eigenvectors().col(cols[j]);
  cert.kernel_dim = static_cast<int>(cols.size());

  // Gamma restricted to the kernel at each vertex of the set.
  std::vector<Matrix> local;
  for (int x : set) {
    const Matrix gx = basis.transpose() * g_[x] * basis;
    const double scale = std::max(g_[x].cwiseAbs().maxCoeff(), 1e-300);
    if (gx.cwiseAbs().maxCoeff() <= kGammaVanish * scale) {
      cert.failing_vertex = x;
      return cert;
    }
    local.push_back(gx);
  }

  auto min_gamma = [&](const Vector& c) {
    double lo = kPosInf;
    for (std::size_t i = 0; i < set.size(); ++i)
      lo = std::min(lo, c.dot(local[i] * c) / chain_.pi(set[i]));
    return lo;
  };

  std::mt19937_64 rng(seed_ ^ (0x5851f42d4c957f2dULL * (set.size() + 1)));
  std::normal_distribution<double> normal;
  Vector c(basis.cols());
  bool found = false;
  for (int draw = 0; draw < kRandomDraws && !found; ++draw) {
    for (int i = 0; i < c.size(); ++i) c(i) = normal(rng);
    c.normalize();
    found = min_gamma(c) > kGammaPositive;
  }
  if (!found) {
    // Add each vertex's leading direction with a step small enough to keep
    // the vertices already made positive.
    c.setZero();
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (c.dot(local[i] * c) / chain_.pi(set[i]) > kGammaPositive) continue;
      Eigen::SelfAdjointEigenSolver<Matrix> li(local[i]);
      const Vector v = li.eigenvectors().col(local[i].cols() - 1);
      double eps = 1.0;
      for (int k = 0; k < 60; ++k, eps *= 0.5) {
        const Vector trial = c + eps * v;
        bool ok = trial.dot(local[i] * trial) / chain_.pi(set[i]) > kGammaPositive;
        for (std::size_t j = 0; j < i && ok; ++j)
          ok = trial.dot(local[j] * trial) / chain_.pi(set[j]) > kGammaPositive;
        if (ok) {
          c = trial;
          break;
        }
      }
    }
    found = min_gamma(c) > kGammaPositive;
    if (!found) throw NumericalFailure("no kernel combination with positive Gamma on the set");
  }

  Vector f = basis * c;
  f /= f.lpNorm<Eigen::Infinity>();
  const Vector gf = gamma(chain_, f, f);
  const Vector g2f = gamma2(chain_, f, f);
  const Vector lf = laplacian(chain_, f);
  const double inv_n = std::isinf(n_) ? 0.0 : 1.0 / n_;
  cert.min_gamma = kPosInf;
  for (int x : set) {
    const double defect = g2f(x) - inv_n * lf(x) * lf(x) - k_ * gf(x);
    const double scale = std::max({1.0, std::abs(g2f(x)), std::abs(k_ * gf(x))});
    cert.max_defect = std::max(cert.max_defect, std::abs(defect) / scale);
    cert.min_gamma = std::min(cert.min_gamma, gf(x));
  }
  cert.is_optimal = true;
  cert.witness_f = f;
  return cert;
}

OptimalityCertificate is_optimal_set(const MarkovChain& chain, const std::vector<int>& set,
                                     double n) {
  return OptimalityOracle(chain, n).test(set);
}

OptimalComplex optimal_complex(const MarkovChain& chain, double n, int max_size) {
  if (chain.size() > 24) throw TooLarge("optimal complex enumeration supports at most 24 states");
  const OptimalityOracle oracle(chain, n);
  OptimalComplex out;
  out.zero_cells = oracle.zero_cells();
  out.k_global = oracle.k_global();
  const int cap = std::min<int>(max_size, static_cast<int>(out.zero_cells.size()));

  ++out.sets_tested;
  if (static_cast<int>(out.zero_cells.size()) <= cap && oracle.test(out.zero_cells).is_optimal) {
    out.facets.push_back(out.zero_cells);
    out.dimension = static_cast<int>(out.zero_cells.size()) - 1;
    return out;
  }

  std::set<std::vector<int>> level;
  for (int x : out.zero_cells) {
    ++out.sets_tested;
    if (oracle.test({x}).is_optimal) level.insert({x});
  }
  std::vector<std::vector<int>> facets;
  for (int k = 1; !level.empty(); ++k) {
    std::set<std::vector<int>> next;
    if (k < cap) {
      const std::vector<std::vector<int>> items(level.begin(), level.end());
      for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = i + 1; j < items.size(); ++j) {
          if (!std::equal(items[i].begin(), items[i].end() - 1, items[j].begin())) break;
          std::vector<int> cand = items[i];
          cand.push_back(items[j].back());
          bool closed = true;
          for (std::size_t drop = 0; drop + 2 < cand.size() && closed; ++drop) {
            std::vector<int> sub = cand;
            sub.erase(sub.begin() + static_cast<long>(drop));
            closed = level.count(sub) > 0;
          }
          if (!closed) continue;
          ++out.sets_tested;
          if (oracle.test(cand).is_optimal) next.insert(cand);
        }
    }
    for (const auto& s : level) {
      const bool covered = std::any_of(next.begin(), next.end(), [&](const std::vector<int>& t) {
        return std::includes(t.begin(), t.end(), s.begin(), s.end());
      });
      if (!covered) facets.push_back(s);
    }
    level = std::move(next);
  }
  std::sort(facets.begin(), facets.end());
  out.facets = facets;
  for (const auto& f : facets) out.dimension = std::max(out.dimension, static_cast<int>(f.size()) - 1);
  return out;
}

EquilibriumCheck check_equilibrium_optimality(const MarkovChain& chain) {
  EquilibriumCheck out;
  std::vector<int> all(chain.size());
  for (int x = 0; x < chain.size(); ++x) all[x] = x;
  const OptimalityOracle oracle(chain, kInfDim);
  out.equilibrium_optimal = oracle.test(all).is_optimal;
  const LichnerowiczReport lr = lichnerowicz_check(chain, Mean::arithmetic());
  out.lichnerowicz_sharp = lr.sharp;
  out.lambda1 = lr.lambda1;
  out.k_inf = lr.k_inf;
  out.agree = out.equilibrium_optimal == out.lichnerowicz_sharp;
  return out;
}

InequalityReport check_union_optimality(const MarkovChain& chain, const std::vector<int>& a0,
                                         const std::vector<int>& a1, double n) {
  InequalityReport rep;
  rep.name = "union_of_optimal_sets";
  rep.relation = "==";
  const OptimalityOracle oracle(chain, n);
  const IntMatrix dist = distance_matrix(chain);
  int d = std::numeric_limits<int>::max();
  for (int x : a0)
    for (int y : a1) d = std::min(d, dist(x, y));

  auto optimal_pre = [&](const std::string& name, const std::vector<int>& a) {
    Precondition p;
    p.name = name + " optimal";
    p.status = oracle.test(a).is_optimal ? PreconditionStatus::exact : PreconditionStatus::unmet;
    return p;
  };
  rep.preconditions.push_back(optimal_pre("A0", a0));
  rep.preconditions.push_back(optimal_pre("A1", a1));
  Precondition far;
  far.name = "d(A0, A1) >= 5";
  far.status = d >= 5 ? PreconditionStatus::exact : PreconditionStatus::unmet;
  far.detail = "distance " + std::to_string(d);
  rep.preconditions.push_back(far);

  std::vector<int> uni = a0;
  uni.insert(uni.end(), a1.begin(), a1.end());
  const bool optimal = oracle.test(uni).is_optimal;
  rep.lhs = optimal ? 1.0 : 0.0;
  rep.rhs = 1.0;
  rep.slack = rep.lhs - rep.rhs;
  rep.worst_residual = optimal ? 0.0 : -1.0;
  rep.values.emplace_back("distance", d);
  rep.values.emplace_back("union_optimal", optimal ? 1.0 : 0.0);
  finalize(rep);
  return rep;
}

}  // namespace curvkit
