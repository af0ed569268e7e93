#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace curvkit {

enum class MeanKind { arithmetic, logarithmic, geometric, custom };

// open: theta(0,s) = 0, densities must be strictly positive.
// closed: theta(0,s) > 0, densities may vanish.
enum class DomainClass { open, closed };

// A mean theta(r,s) together with its first partial derivative in r and the
// second derivative d^2 theta / dr^2 (used by curvature gradients).
// Value type; the built-in kinds carry no state.
class Mean {
 public:
  using Fn = std::function<double(double, double)>;

  static Mean arithmetic();
  static Mean logarithmic();
  static Mean geometric();
  // d11 may be empty, in which case it is taken by central differences of d1.
  static Mean custom(std::string name, Fn eval, Fn d1, DomainClass domain, Fn d11 = {});
  // "arithmetic", "logarithmic" (or "log"), "geometric".
  static Mean from_name(std::string_view name);

  MeanKind kind() const { return kind_; }
  DomainClass domain_class() const { return domain_; }
  const std::string& name() const { return name_; }

  // Throw NegativeInput for r < 0 or s < 0.
  double operator()(double r, double s) const;
  // Throws DomainError at r = 0 for open-domain means.
  double d1(double r, double s) const;
  double d2(double r, double s) const { return d1(s, r); }
  double d11(double r, double s) const;
  // Mixed partial, from degree-zero homogeneity of d1: r d11 + s d12 = 0.
  double d12(double r, double s) const;

 private:
  Mean(MeanKind kind, std::string name, DomainClass domain)
      : kind_(kind), name_(std::move(name)), domain_(domain) {}

  MeanKind kind_;
  std::string name_;
  DomainClass domain_;
  Fn eval_, d1_, d11_;
};

double eval_mean(const Mean& mean, double r, double s);
double d1_mean(const Mean& mean, double r, double s);

// Largest violation of each axiom over random samples (r,s) log-uniform in
// (1e-6, 1e6) and lambda in {1e-3, 1, 1e3}. Violations are relative.
struct MeanAxiomReport {
  std::string mean;
  int samples = 0;
  double symmetry = 0.0;
  double homogeneity = 0.0;
  double monotonicity = 0.0;
  double normalization = 0.0;
  double diagonal_derivative = 0.0;
  double euler_identity = 0.0;
  // Property theta(0,s) = 0; the arithmetic mean fails it.
  double vanishing_at_zero = 0.0;
  bool vanishes_at_zero = false;
  // max over samples of (theta_g - theta_log)^+ + (theta_log - theta_a)^+.
  double ordering = 0.0;
  DomainClass domain_class = DomainClass::closed;

  // Axioms symmetry..Euler identity all within tol.
  bool axioms_hold(double tol = 1e-10) const;
};

MeanAxiomReport check_mean_axioms(const Mean& mean, int sample_count, std::uint64_t seed);

}  // namespace curvkit
