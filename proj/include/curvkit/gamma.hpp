#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "curvkit/chain.hpp"
#include "curvkit/means.hpp"

namespace curvkit {

inline constexpr double kInfDim = std::numeric_limits<double>::infinity();

// Antisymmetric V(x,y), nonzero only on adjacent pairs.
class VectorField {
 public:
  // Throws ShapeMismatch or InvalidParameters if v is not a valid field for chain.
  VectorField(const MarkovChain& chain, Matrix v);
  const Matrix& values() const { return v_; }
  double operator()(int x, int y) const { return v_(x, y); }

 private:
  friend VectorField gradient_field(const MarkovChain& chain, const Vector& f);
  explicit VectorField(Matrix v) : v_(std::move(v)) {}
  Matrix v_;
};

Vector laplacian(const MarkovChain& chain, const Vector& f);
VectorField gradient_field(const MarkovChain& chain, const Vector& f);
Vector divergence(const MarkovChain& chain, const VectorField& v);

// <f,g>_pi
double inner_pi(const MarkovChain& chain, const Vector& f, const Vector& g);
// <f,g>_{rho.pi}
double inner_rho_pi(const MarkovChain& chain, const Vector& rho, const Vector& f, const Vector& g);
// 1/2 sum V1 V2 Q pi
double inner_field(const MarkovChain& chain, const VectorField& v1, const VectorField& v2);
// 1/2 sum theta(rho_x,rho_y) V1 V2 Q pi
double inner_field_rho(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                       const VectorField& v1, const VectorField& v2);

// delta_x(y) = 1/pi(x) at y = x.
Vector dirac(const MarkovChain& chain, int x);
// 1_x = pi(x) delta_x, the indicator of x.
Vector indicator(const MarkovChain& chain, const std::vector<int>& set);
Vector ones(const MarkovChain& chain);

// ShapeMismatch for a wrong length, NegativeInput for negative or non-finite
// entries, DomainError for a zero entry under an open-domain mean.
void validate_density(const MarkovChain& chain, const Mean& mean, const Vector& rho);

Vector rho_laplacian(const MarkovChain& chain, const Mean& mean, const Vector& rho, const Vector& f);

// Sum form: sum_y d1theta(rho_x,rho_y) (f_y-f_x)(g_y-g_x) Q(x,y).
Vector gamma_rho(const MarkovChain& chain, const Mean& mean, const Vector& rho, const Vector& f,
                 const Vector& g);
// 2 Gamma_rho(f,g) = Delta_rho(fg) - f Delta_rho g - g Delta_rho f.
Vector gamma_rho_product_rule(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                              const Vector& f, const Vector& g);
Vector gamma(const MarkovChain& chain, const Vector& f, const Vector& g);

// 2 Gamma2_rho(f,g) = Delta Gamma_rho(f,g) - Gamma_rho(f, Delta g) - Gamma_rho(g, Delta f),
// with the standard Laplacian outside.
Vector gamma2_rho(const MarkovChain& chain, const Mean& mean, const Vector& rho, const Vector& f,
                  const Vector& g);
Vector gamma2(const MarkovChain& chain, const Vector& f, const Vector& g);

// Edge arrays rho_hat(x,y) = theta(rho_x,rho_y) and
// delta_hat(x,y) = d1theta Delta rho(x) + d2theta Delta rho(y), zero off adjacency.
Matrix rho_hat(const MarkovChain& chain, const Mean& mean, const Vector& rho);
Matrix delta_hat_rho(const MarkovChain& chain, const Mean& mean, const Vector& rho);

// ||grad f||_rho^2 from rho_hat.
double a_form(const MarkovChain& chain, const Mean& mean, const Vector& rho, const Vector& f);
// 1/2 <delta_hat grad f, grad f>_pi - <rho_hat grad f, grad Delta f>_pi.
double b_form(const MarkovChain& chain, const Mean& mean, const Vector& rho, const Vector& f);

// Quadratic forms f'Mf = <rho, Gamma2_rho f - (1/n)(Delta f)^2>_pi and
// f'Nf = <rho, Gamma_rho f>_pi. When restricted, M and N live on `support`
// (the 2-ball of supp rho); otherwise support lists every state.
struct FormPair {
  Matrix m;
  Matrix n_form;
  std::vector<int> support;
  std::string mean;
  Vector rho;
  double dimension = kInfDim;

  // Lift a function on the support to all of X (zero outside).
  Vector expand(const Vector& local, int full_size) const;
  Vector restrict(const Vector& full) const;
};

FormPair assemble_forms(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                        double n = kInfDim, bool restrict_to_support = false);

// Derivatives of f'Mf and f'Nf with respect to each rho_i, for fixed f.
struct FormGradient {
  Vector d_m;
  Vector d_n;
};
FormGradient form_gradient(const MarkovChain& chain, const Mean& mean, const Vector& rho, double n,
                           const Vector& f);

// Residual of <Delta_rho f1, f2>_{rho.pi} + <grad f1, grad f2>_rho over random
// f1, f2 with entries in [-1,1]. Vanishes for the geometric mean.
struct GreenReport {
  std::string mean;
  int trials = 0;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
};
GreenReport check_geometric_green(const MarkovChain& chain, const Mean& mean, const Vector& rho,
                                  int trials, std::uint64_t seed);

}  // namespace curvkit
