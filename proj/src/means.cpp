#include "curvkit/means.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "curvkit/errors.hpp"

namespace curvkit {

namespace {

// Below this |u| = |s-r|/(s+r) the logarithmic mean and its derivatives are
// evaluated from their Taylor series in u; the closed forms lose about
// eps/|u| relative accuracy to cancellation.
constexpr double kLogSeriesThreshold = 1e-2;

// log(r) - log(s), accurate both near r = s and for extreme ratios.
double log_ratio(double r, double s) {
  const double diff = r - s;
  if (std::abs(diff) <= 0.5 * std::max(r, s)) return std::log1p(diff / s);
  return std::log(r) - std::log(s);
}

double poly(const std::array<double, 9>& c, double u) {
  double acc = 0.0;
  for (int k = 8; k >= 0; --k) acc = acc * u + c[k];
  return acc;
}

// theta_log(m(1-u), m(1+u)) / m
constexpr std::array<double, 9> kThetaSeries = {
    1.0, 0.0, -1.0 / 3.0, 0.0, -4.0 / 45.0, 0.0, -44.0 / 945.0, 0.0, -428.0 / 14175.0};
// d1 theta_log(m(1-u), m(1+u))
constexpr std::array<double, 9> kD1Series = {
    0.5,          1.0 / 3.0,    1.0 / 6.0,     8.0 / 45.0,      2.0 / 15.0,
    44.0 / 315.0, 22.0 / 189.0, 1712.0 / 14175.0, 214.0 / 2025.0};
// m * d11 theta_log(m(1-u), m(1+u))
constexpr std::array<double, 9> kD11Series = {
    -1.0 / 6.0,        -1.0 / 3.0,         -13.0 / 30.0,     -8.0 / 15.0,
    -194.0 / 315.0,    -44.0 / 63.0,       -10942.0 / 14175.0, -1712.0 / 2025.0,
    -142382.0 / 155925.0};

double log_mean(double r, double s) {
  if (r == 0.0 || s == 0.0) return 0.0;
  const double m = 0.5 * (r + s);
  const double u = (s - r) / (s + r);
  if (std::abs(u) <= kLogSeriesThreshold) return m * poly(kThetaSeries, u);
  return (r - s) / log_ratio(r, s);
}

double log_mean_d1(double r, double s) {
  if (s == 0.0) return 0.0;
  const double u = (s - r) / (s + r);
  if (std::abs(u) <= kLogSeriesThreshold) return poly(kD1Series, u);
  const double l = log_ratio(r, s);
  return (l - (r - s) / r) / (l * l);
}

double log_mean_d11(double r, double s) {
  if (s == 0.0) return 0.0;
  const double m = 0.5 * (r + s);
  const double u = (s - r) / (s + r);
  if (std::abs(u) <= kLogSeriesThreshold) return poly(kD11Series, u) / m;
  const double l = log_ratio(r, s);
  return (1.0 / r - s / (r * r)) / (l * l) - 2.0 * (l - (r - s) / r) / (l * l * l * r);
}

}  // namespace

Mean Mean::arithmetic() { return Mean(MeanKind::arithmetic, "arithmetic", DomainClass::closed); }
Mean Mean::logarithmic() { return Mean(MeanKind::logarithmic, "logarithmic", DomainClass::open); }
Mean Mean::geometric() { return Mean(MeanKind::geometric, "geometric", DomainClass::open); }

Mean Mean::custom(std::string name, Fn eval, Fn d1, DomainClass domain, Fn d11) {
  if (!eval || !d1) throw InvalidParameters("custom mean needs both eval and d1 callables");
  Mean m(MeanKind::custom, std::move(name), domain);
  m.eval_ = std::move(eval);
  m.d1_ = std::move(d1);
  m.d11_ = std::move(d11);
  return m;
}

Mean Mean::from_name(std::string_view name) {
  if (name == "arithmetic" || name == "a") return arithmetic();
  if (name == "logarithmic" || name == "log" || name == "ent") return logarithmic();
  if (name == "geometric" || name == "g") return geometric();
  throw InvalidParameters("unknown mean '" + std::string(name) +
                          "' (expected arithmetic, logarithmic or geometric)");
}

double Mean::operator()(double r, double s) const {
  if (r < 0.0 || s < 0.0 || std::isnan(r) || std::isnan(s))
    throw NegativeInput("mean arguments must be nonnegative, got (" + std::to_string(r) + ", " +
                        std::to_string(s) + ")");
  switch (kind_) {
    case MeanKind::arithmetic: return 0.5 * (r + s);
    case MeanKind::logarithmic: return log_mean(r, s);
    case MeanKind::geometric: return std::sqrt(r * s);
    case MeanKind::custom: return eval_(r, s);
  }
  return 0.0;
}

double Mean::d1(double r, double s) const {
  if (r < 0.0 || s < 0.0 || std::isnan(r) || std::isnan(s))
    throw NegativeInput("mean arguments must be nonnegative");
  if (kind_ == MeanKind::arithmetic) return 0.5;
  if (r == 0.0 && domain_ == DomainClass::open)
    throw DomainError("d1 of the " + name_ + " mean is undefined at r = 0");
  switch (kind_) {
    case MeanKind::logarithmic: return log_mean_d1(r, s);
    case MeanKind::geometric: return 0.5 * std::sqrt(s / r);
    case MeanKind::custom: return d1_(r, s);
    default: return 0.5;
  }
}

double Mean::d11(double r, double s) const {
  if (kind_ == MeanKind::arithmetic) return 0.0;
  if (r <= 0.0 && domain_ == DomainClass::open)
    throw DomainError("d11 of the " + name_ + " mean is undefined at r = 0");
  switch (kind_) {
    case MeanKind::logarithmic: return log_mean_d11(r, s);
    case MeanKind::geometric: return -0.25 * std::sqrt(s) / (r * std::sqrt(r));
    case MeanKind::custom: {
      if (d11_) return d11_(r, s);
      const double h = 1e-5 * std::max(r, 1e-300);
      return (d1_(r + h, s) - d1_(r - h, s)) / (2.0 * h);
    }
    default: return 0.0;
  }
}

double Mean::d12(double r, double s) const {
  if (kind_ == MeanKind::arithmetic) return 0.0;
  if (s == 0.0) return 0.0;
  return -(r / s) * d11(r, s);
}

double eval_mean(const Mean& mean, double r, double s) { return mean(r, s); }
double d1_mean(const Mean& mean, double r, double s) { return mean.d1(r, s); }

bool MeanAxiomReport::axioms_hold(double tol) const {
  return symmetry <= tol && homogeneity <= tol && monotonicity <= tol && normalization <= tol &&
         diagonal_derivative <= tol && euler_identity <= tol;
}

MeanAxiomReport check_mean_axioms(const Mean& mean, int sample_count, std::uint64_t seed) {
  MeanAxiomReport rep;
  rep.mean = mean.name();
  rep.samples = sample_count;
  rep.domain_class = mean.domain_class();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> expo(std::log(1e-6), std::log(1e6));
  const std::array<double, 3> lambdas = {1e-3, 1.0, 1e3};
  const Mean geo = Mean::geometric(), lg = Mean::logarithmic(), ar = Mean::arithmetic();

  auto rel = [](double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
  };

  rep.normalization = std::abs(mean(1.0, 1.0) - 1.0);
  for (int i = 0; i < sample_count; ++i) {
    const double r = std::exp(expo(rng));
    const double s = std::exp(expo(rng));
    const double t = std::exp(expo(rng));
    const double th = mean(r, s);

    rep.symmetry = std::max(rep.symmetry, rel(th, mean(s, r)));
    for (double lam : lambdas)
      rep.homogeneity = std::max(rep.homogeneity, rel(mean(lam * r, lam * s), lam * th));

    const double lo = std::min(r, t), hi = std::max(r, t);
    const double mono = mean(lo, s) - mean(hi, s);
    if (mono > 0.0) rep.monotonicity = std::max(rep.monotonicity, mono / mean(hi, s));

    rep.diagonal_derivative = std::max(rep.diagonal_derivative, std::abs(mean.d1(r, r) - 0.5));
    const double euler = r * mean.d1(r, s) + s * mean.d2(r, s);
    rep.euler_identity = std::max(rep.euler_identity, rel(euler, th));

    rep.vanishing_at_zero = std::max(rep.vanishing_at_zero, mean(0.0, s) / s);

    const double g = geo(r, s), l = lg(r, s), a = ar(r, s);
    const double scale = a;
    rep.ordering = std::max(rep.ordering,
                            (std::max(0.0, g - l) + std::max(0.0, l - a)) / scale - 1e-15);
  }
  rep.ordering = std::max(rep.ordering, 0.0);
  rep.vanishes_at_zero = rep.vanishing_at_zero == 0.0;
  return rep;
}

}  // namespace curvkit
