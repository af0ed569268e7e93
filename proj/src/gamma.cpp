#include "curvkit/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "curvkit/errors.hpp"

namespace curvkit {

namespace {

void check_length(const MarkovChain& chain, const Vector& f, const char* what) {
  if (f.size() != chain.size())
    throw ShapeMismatch(std::string(what) + " has length " + std::to_string(f.size()) +
                        ", chain has " + std::to_string(chain.size()) + " states");
}

// c(x,y) = d1theta(rho_x, rho_y) Q(x,y) on adjacent pairs.
Matrix edge_coefficients(const MarkovChain& chain, const Mean& mean, const Vector& rho) {
  const int n = chain.size();
  Matrix c = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y : chain.neighbors(x)) c(x, y) = mean.d1(rho(x), rho(y)) * chain.q(x, y);
  return c;
}

double weighted_degree(const MarkovChain& chain, int x) { return chain.stats().deg_weighted(x); }

}  // namespace

VectorField::VectorField(const MarkovChain& chain, Matrix v) : v_(std::move(v)) {
  const int n = chain.size();
  if (v_.rows() != n || v_.cols() != n)
    throw ShapeMismatch("vector field must be " + std::to_string(n) + "x" + std::to_string(n));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (!chain.adjacent(x, y) && v_(x, y) != 0.0)
        throw InvalidParameters("vector field nonzero on non-adjacent pair (" + chain.state(x) +
                                ", " + chain.state(y) + ")");
      if (v_(x, y) != -v_(y, x))
        throw InvalidParameters("vector field not antisymmetric at (" + chain.state(x) + ", " +
                                chain.state(y) + ")");
    }
}

Vector laplacian(const MarkovChain& chain, const Vector& f) {
  check_length(chain, f, "f");
  Vector out = Vector::Zero(chain.size());
  for (int x = 0; x < chain.size(); ++x) {
    double acc = 0.0;
    for (int y : chain.neighbors(x)) acc += (f(y) - f(x)) * chain.q(x, y);
    out(x) = acc;
  }
  return out;
}

VectorField gradient_field(const MarkovChain& chain, const Vector& f) {
  check_length(chain, f, "f");
  const int n = chain.size();
  Matrix v = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y : chain.neighbors(x)) v(x, y) = f(y) - f(x);
  return VectorField(std::move(v));
}

Vector divergence(const MarkovChain& chain, const VectorField& v) {
  const int n = chain.size();
  if (v.values().rows() != n) throw ShapeMismatch("vector field size does not match chain");
  Vector out = Vector::Zero(n);
  for (int x = 0; x < n; ++x) {
    double acc = 0.0;
    for (int y : chain.neighbors(x)) acc += v(x, y) * chain.q(x, y);
    out(x) = acc;
  }
  return out;
}

double inner_pi(const MarkovChain& chain, const Vector& f, const Vector& g) {
  check_length(chain, f, "f");
  check_length(chain, g, "g");
  return (f.array() * g.array() * chain.pi().array()).sum();
}

double inner_rho_pi(const MarkovChain& chain, const Vector& rho, const Vector& f, const Vector& g) {
  check_length(chain, rho, "rho");
  return (f.array() * g.array() * rho.array() * chain.pi().array()).sum();
}

double inner_field(const MarkovChain& chain, const VectorField& v1, const VectorField& v2) {
  double acc = 0.0;
  for (int x = 0; x < chain.size(); ++x)
    for (int y : chain.neighbors(x)) acc += v1(x, y) * v2(x, y) * chain.weight(x, y);
  return 0.5 * acc;
}

double inner_field_rho(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                       const VectorField& v1, const VectorField& v2) {
  const Matrix hat = rho_hat(chain, mean, rho);
  double acc = 0.0;
  for (int x = 0; x < chain.size(); ++x)
    for (int y : chain.neighbors(x)) acc += hat(x, y) * v1(x, y) * v2(x, y) * chain.weight(x, y);
  return 0.5 * acc;
}

Vector dirac(const MarkovChain& chain, int x) {
  if (x < 0 || x >= chain.size()) throw InvalidParameters("state index out of range");
  Vector d = Vector::Zero(chain.size());
  d(x) = 1.0 / chain.pi(x);
  return d;
}

Vector indicator(const MarkovChain& chain, const std::vector<int>& set) {
  Vector v = Vector::Zero(chain.size());
  for (int x : set) {
    if (x < 0 || x >= chain.size()) throw InvalidParameters("state index out of range");
    v(x) = 1.0;
  }
  return v;
}

Vector ones(const MarkovChain& chain) { return Vector::Ones(chain.size()); }

void validate_density(const MarkovChain& chain, const Mean& mean, const Vector& rho) {
  check_length(chain, rho, "rho");
  for (int x = 0; x < chain.size(); ++x) {
    if (!std::isfinite(rho(x)) || rho(x) < 0.0)
      throw NegativeInput("rho(" + chain.state(x) + ") = " + std::to_string(rho(x)) +
                          " is not a finite nonnegative value");
    if (rho(x) == 0.0 && mean.domain_class() == DomainClass::open)
      throw DomainError("rho(" + chain.state(x) + ") = 0 is outside the domain of the " +
                        mean.name() + " mean, which requires strictly positive densities");
  }
  if (rho.maxCoeff() <= 0.0) throw DomainError("rho vanishes identically");
}

Vector rho_laplacian(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                     const Vector& f) {
  validate_density(chain, mean, rho);
  check_length(chain, f, "f");
  Vector out = Vector::Zero(chain.size());
  for (int x = 0; x < chain.size(); ++x) {
    double acc = 0.0;
    for (int y : chain.neighbors(x))
      acc += 2.0 * mean.d1(rho(x), rho(y)) * (f(y) - f(x)) * chain.q(x, y);
    out(x) = acc;
  }
  return out;
}

Vector gamma_rho(const MarkovChain& chain, const Mean& mean, const Vector& rho, const Vector& f,
                 const Vector& g) {
  validate_density(chain, mean, rho);
  check_length(chain, f, "f");
  check_length(chain, g, "g");
  Vector out = Vector::Zero(chain.size());
  for (int x = 0; x < chain.size(); ++x) {
    double acc = 0.0;
    for (int y : chain.neighbors(x))
      acc += mean.d1(rho(x), rho(y)) * (f(y) - f(x)) * (g(y) - g(x)) * chain.q(x, y);
    out(x) = acc;
  }
  return out;
}

Vector gamma_rho_product_rule(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                              const Vector& f, const Vector& g) {
  const Vector fg = f.cwiseProduct(g);
  const Vector lfg = rho_laplacian(chain, mean, rho, fg);
  const Vector lf = rho_laplacian(chain, mean, rho, f);
  const Vector lg = rho_laplacian(chain, mean, rho, g);
  return 0.5 * (lfg - f.cwiseProduct(lg) - g.cwiseProduct(lf));
}

Vector gamma(const MarkovChain& chain, const Vector& f, const Vector& g) {
  return gamma_rho(chain, Mean::arithmetic(), ones(chain), f, g);
}

Vector gamma2_rho(const MarkovChain& chain, const Mean& mean, const Vector& rho, const Vector& f,
                  const Vector& g) {
  const Vector lf = laplacian(chain, f);
  const Vector lg = laplacian(chain, g);
  const Vector gfg = gamma_rho(chain, mean, rho, f, g);
  return 0.5 * (laplacian(chain, gfg) - gamma_rho(chain, mean, rho, f, lg) -
                gamma_rho(chain, mean, rho, g, lf));
}

Vector gamma2(const MarkovChain& chain, const Vector& f, const Vector& g) {
  return gamma2_rho(chain, Mean::arithmetic(), ones(chain), f, g);
}

Matrix rho_hat(const MarkovChain& chain, const Mean& mean, const Vector& rho) {
  validate_density(chain, mean, rho);
  const int n = chain.size();
  Matrix hat = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y : chain.neighbors(x)) hat(x, y) = mean(rho(x), rho(y));
  return hat;
}

Matrix delta_hat_rho(const MarkovChain& chain, const Mean& mean, const Vector& rho) {
  validate_density(chain, mean, rho);
  const Vector lr = laplacian(chain, rho);
  const int n = chain.size();
  Matrix hat = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y : chain.neighbors(x))
      hat(x, y) = mean.d1(rho(x), rho(y)) * lr(x) + mean.d2(rho(x), rho(y)) * lr(y);
  return hat;
}

double a_form(const MarkovChain& chain, const Mean& mean, const Vector& rho, const Vector& f) {
  const Matrix hat = rho_hat(chain, mean, rho);
  const VectorField gf = gradient_field(chain, f);
  double acc = 0.0;
  for (int x = 0; x < chain.size(); ++x)
    for (int y : chain.neighbors(x)) acc += hat(x, y) * gf(x, y) * gf(x, y) * chain.weight(x, y);
  return 0.5 * acc;
}

double b_form(const MarkovChain& chain, const Mean& mean, const Vector& rho, const Vector& f) {
  const Matrix rh = rho_hat(chain, mean, rho);
  const Matrix dh = delta_hat_rho(chain, mean, rho);
  const VectorField gf = gradient_field(chain, f);
  const VectorField glf = gradient_field(chain, laplacian(chain, f));
  double first = 0.0, second = 0.0;
  for (int x = 0; x < chain.size(); ++x)
    for (int y : chain.neighbors(x)) {
      const double w = chain.weight(x, y);
      first += dh(x, y) * gf(x, y) * gf(x, y) * w;
      second += rh(x, y) * gf(x, y) * glf(x, y) * w;
    }
  return 0.5 * (0.5 * first) - 0.5 * second;
}

Vector FormPair::expand(const Vector& local, int full_size) const {
  Vector full = Vector::Zero(full_size);
  for (std::size_t i = 0; i < support.size(); ++i) full(support[i]) = local(static_cast<int>(i));
  return full;
}

Vector FormPair::restrict(const Vector& full) const {
  Vector local(static_cast<int>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) local(static_cast<int>(i)) = full(support[i]);
  return local;
}

FormPair assemble_forms(const MarkovChain& chain, const Mean& mean, const Vector& rho, double n,
                        bool restrict_to_support) {
  validate_density(chain, mean, rho);
  if (!(n > 0.0)) throw InvalidParameters("dimension n must lie in (0, inf]");
  const int size = chain.size();

  FormPair fp;
  fp.mean = mean.name();
  fp.rho = rho;
  fp.dimension = n;
  if (restrict_to_support) {
    std::vector<int> supp;
    for (int x = 0; x < size; ++x)
      if (rho(x) > 0.0) supp.push_back(x);
    fp.support = ball(chain, supp, 2);
  } else {
    fp.support.resize(size);
    for (int x = 0; x < size; ++x) fp.support[x] = x;
  }
  std::vector<int> local(size, -1);
  for (std::size_t i = 0; i < fp.support.size(); ++i) local[fp.support[i]] = static_cast<int>(i);
  const int m = static_cast<int>(fp.support.size());

  const Vector lr = laplacian(chain, rho);
  const Matrix c = edge_coefficients(chain, mean, rho);
  const double inv_n = std::isinf(n) ? 0.0 : 1.0 / n;

  Matrix mm = Matrix::Zero(m, m);
  Matrix nn = Matrix::Zero(m, m);

  // Laplacian row of z as (local index, coefficient) pairs.
  auto lap_row = [&](int z) {
    std::vector<std::pair<int, double>> row;
    row.emplace_back(local[z], -weighted_degree(chain, z));
    for (int y : chain.neighbors(z)) row.emplace_back(local[y], chain.q(z, y));
    return row;
  };

  for (int x = 0; x < size; ++x) {
    const double rx = rho(x) * chain.pi(x);
    const double dx = 0.5 * lr(x) * chain.pi(x);
    if (rx == 0.0 && dx == 0.0) continue;
    const int lx = local[x];
    for (int y : chain.neighbors(x)) {
      const int ly = local[y];
      const double cxy = c(x, y);
      // (e_y - e_x)(e_y - e_x)^T weighted
      const double wn = rx * cxy;
      const double wm = dx * cxy;
      if (wn != 0.0) {
        nn(ly, ly) += wn;
        nn(lx, lx) += wn;
        nn(lx, ly) -= wn;
        nn(ly, lx) -= wn;
      }
      if (wm != 0.0) {
        mm(ly, ly) += wm;
        mm(lx, lx) += wm;
        mm(lx, ly) -= wm;
        mm(ly, lx) -= wm;
      }
      if (rx == 0.0) continue;
      // -(e_y - e_x)(l_y - l_x)^T weighted by rho_x pi_x c_xy
      for (const auto& [k, v] : lap_row(y)) {
        mm(ly, k) -= wn * v;
        mm(lx, k) += wn * v;
      }
      for (const auto& [k, v] : lap_row(x)) {
        mm(ly, k) += wn * v;
        mm(lx, k) -= wn * v;
      }
    }
    if (rx != 0.0 && inv_n != 0.0) {
      const auto row = lap_row(x);
      for (const auto& [i, a] : row)
        for (const auto& [j, b] : row) mm(i, j) -= inv_n * rx * a * b;
    }
  }
  fp.m = 0.5 * (mm + mm.transpose());
  fp.n_form = 0.5 * (nn + nn.transpose());
  return fp;
}

FormGradient form_gradient(const MarkovChain& chain, const Mean& mean, const Vector& rho, double n,
                           const Vector& f) {
  validate_density(chain, mean, rho);
  check_length(chain, f, "f");
  const int size = chain.size();
  const Vector lf = laplacian(chain, f);
  const Vector lr = laplacian(chain, rho);
  const double inv_n = std::isinf(n) ? 0.0 : 1.0 / n;

  FormGradient g{Vector::Zero(size), Vector::Zero(size)};
  Vector beta = Vector::Zero(size);  // coefficient of (Delta rho)_z in f'Mf

  for (int x = 0; x < size; ++x) {
    const double r = rho(x);
    for (int y : chain.neighbors(x)) {
      const double s = rho(y);
      const double w = chain.weight(x, y);
      const double df = f(y) - f(x);
      const double gsq = df * df;
      const double h = df * (lf(y) - lf(x));
      const double t1 = mean.d1(r, s), t2 = mean.d1(s, r);

      // 1/4 sum delta_hat g w
      const double a = 0.25 * gsq * w;
      g.d_m(x) += a * (mean.d11(r, s) * lr(x) + mean.d12(s, r) * lr(y));
      g.d_m(y) += a * (mean.d12(r, s) * lr(x) + mean.d11(s, r) * lr(y));
      beta(x) += a * t1;
      beta(y) += a * t2;

      // -1/2 sum rho_hat h w
      g.d_m(x) -= 0.5 * h * w * t1;
      g.d_m(y) -= 0.5 * h * w * t2;

      g.d_n(x) += 0.5 * gsq * w * t1;
      g.d_n(y) += 0.5 * gsq * w * t2;
    }
    g.d_m(x) -= inv_n * chain.pi(x) * lf(x) * lf(x);
  }
  // Through Delta rho: d(Delta rho)_z / d rho_i = Q(z,i) for i ~ z, -D(z) at i = z.
  for (int z = 0; z < size; ++z) {
    if (beta(z) == 0.0) continue;
    g.d_m(z) -= beta(z) * weighted_degree(chain, z);
    for (int i : chain.neighbors(z)) g.d_m(i) += beta(z) * chain.q(z, i);
  }
  return g;
}

GreenReport check_geometric_green(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                                  int trials, std::uint64_t seed) {
  validate_density(chain, mean, rho);
  GreenReport rep;
  rep.mean = mean.name();
  rep.trials = trials;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int n = chain.size();
  for (int t = 0; t < trials; ++t) {
    Vector f1(n), f2(n);
    for (int i = 0; i < n; ++i) f1(i) = unif(rng);
    for (int i = 0; i < n; ++i) f2(i) = unif(rng);
    const double lhs = inner_rho_pi(chain, rho, rho_laplacian(chain, mean, rho, f1), f2);
    const double rhs =
        inner_field_rho(chain, mean, rho, gradient_field(chain, f1), gradient_field(chain, f2));
    const double res = std::abs(lhs + rhs);
    const double scale = std::abs(lhs) + std::abs(rhs);
    rep.max_abs_residual = std::max(rep.max_abs_residual, res);
    if (scale > 0.0) rep.max_rel_residual = std::max(rep.max_rel_residual, res / scale);
  }
  return rep;
}

}  // namespace curvkit
