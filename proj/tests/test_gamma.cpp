#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvkit/errors.hpp"
#include "curvkit/gamma.hpp"
#include "support.hpp"

using namespace curvkit;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Direct sum for Gamma f(x) = 1/2 sum_y Q(x,y) (f_y - f_x)^2.
Vector gamma_direct(const MarkovChain& c, const Vector& f) {
  Vector g = Vector::Zero(c.size());
  for (int x = 0; x < c.size(); ++x)
    for (int y = 0; y < c.size(); ++y) g(x) += 0.5 * c.q(x, y) * (f(y) - f(x)) * (f(y) - f(x));
  return g;
}

}  // namespace

TEST(Operators, TwoStateLaplacian) {
  const MarkovChain c = hypercube(1);
  EXPECT_TRUE(laplacian(c, vec({0, 1})).isApprox(vec({1, -1})));
  EXPECT_TRUE(gamma(c, vec({0, 1}), vec({0, 1})).isApprox(vec({0.5, 0.5})));
}

TEST(Operators, LaplacianIsDivergenceOfGradient) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const MarkovChain c = testsupport::random_chain(rng);
    const Vector f = testsupport::random_signed(c.size(), rng);
    const Vector g = testsupport::random_signed(c.size(), rng);
    EXPECT_LT((laplacian(c, f) - divergence(c, gradient_field(c, f))).cwiseAbs().maxCoeff(), 1e-13);
    // Self-adjoint and negative: <Delta f, g> = -<grad f, grad g>.
    const double lhs = inner_pi(c, laplacian(c, f), g);
    EXPECT_NEAR(lhs, inner_pi(c, f, laplacian(c, g)), 1e-13);
    EXPECT_NEAR(lhs, -inner_field(c, gradient_field(c, f), gradient_field(c, g)), 1e-13);
  }
}

TEST(Operators, DivergenceAdjoint) {
  std::mt19937_64 rng(12);
  const MarkovChain c = testsupport::random_chain(rng, 5, 5);
  Matrix v = Matrix::Zero(5, 5);
  for (int x = 0; x < 5; ++x)
    for (int y : c.neighbors(x))
      if (x < y) v(x, y) = -(v(y, x) = testsupport::random_signed(1, rng)(0));
  const VectorField field(c, v);
  const Vector f = testsupport::random_signed(5, rng);
  EXPECT_NEAR(inner_pi(c, divergence(c, field), f), -inner_field(c, field, gradient_field(c, f)),
              1e-13);
}

TEST(Operators, VectorFieldValidation) {
  const MarkovChain c = cycle(4);
  Matrix sym = Matrix::Zero(4, 4);
  sym(0, 1) = sym(1, 0) = 1.0;
  EXPECT_THROW(VectorField(c, sym), InvalidParameters);
  Matrix off = Matrix::Zero(4, 4);
  off(0, 2) = 1.0;
  off(2, 0) = -1.0;
  EXPECT_THROW(VectorField(c, off), InvalidParameters);
  EXPECT_THROW(VectorField(c, Matrix::Zero(3, 3)), ShapeMismatch);
}

TEST(Operators, DiracAndIndicator) {
  const MarkovChain c = path(4);
  EXPECT_NEAR(inner_pi(c, dirac(c, 1), ones(c)), 1.0, 1e-15);
  EXPECT_TRUE(indicator(c, {0, 2}).isApprox(vec({1, 0, 1, 0})));
}

TEST(RhoLaplacian, ReducesToLaplacianAtConstantDensity) {
  std::mt19937_64 rng(13);
  for (const Mean& m : {Mean::arithmetic(), Mean::logarithmic(), Mean::geometric()})
    for (int i = 0; i < 10; ++i) {
      const MarkovChain c = testsupport::random_chain(rng);
      const Vector f = testsupport::random_signed(c.size(), rng);
      const Vector rho = Vector::Constant(c.size(), 2.5);
      EXPECT_LT((rho_laplacian(c, m, rho, f) - laplacian(c, f)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((gamma_rho(c, m, rho, f, f) - gamma(c, f, f)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((gamma2_rho(c, m, rho, f, f) - gamma2(c, f, f)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(RhoLaplacian, TwoStateLogarithmic) {
  // Delta_rho f(x) = 2 sum_y d1theta(rho_x, rho_y) (f_y - f_x) Q(x,y).
  const MarkovChain c = hypercube(1);
  const Mean lm = Mean::logarithmic();
  const Vector out = rho_laplacian(c, lm, vec({1, 2}), vec({0, 1}));
  // d1theta(1,2) = (1 - log 2) / log(2)^2 for theta = (s - r)/log(s/r).
  const double l2 = std::log(2.0);
  EXPECT_NEAR(out(0), 2 * (1 - l2) / (l2 * l2), 1e-14);
  EXPECT_NEAR(out(1), -2 * lm.d1(2, 1), 1e-14);
}

TEST(GammaRho, ProductRuleMatchesSumForm) {
  std::mt19937_64 rng(14);
  for (const Mean& m : {Mean::arithmetic(), Mean::logarithmic(), Mean::geometric()})
    for (int i = 0; i < 15; ++i) {
      const MarkovChain c = testsupport::random_chain(rng);
      const Vector rho = testsupport::random_positive(c.size(), rng);
      const Vector f = testsupport::random_signed(c.size(), rng);
      const Vector g = testsupport::random_signed(c.size(), rng);
      const Vector a = gamma_rho(c, m, rho, f, g);
      const Vector b = gamma_rho_product_rule(c, m, rho, f, g);
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Gamma, DirectSumAndCycleClosedForm) {
  std::mt19937_64 rng(15);
  const MarkovChain c = cycle(6);
  const Vector f = testsupport::random_signed(6, rng);
  EXPECT_LT((gamma(c, f, f) - gamma_direct(c, f)).cwiseAbs().maxCoeff(), 1e-14);
  // f = cos(2 pi k x / n) is an eigenfunction with eigenvalue 1 - cos(2 pi k/n).
  Vector e(6);
  for (int x = 0; x < 6; ++x) e(x) = std::cos(2 * M_PI * x / 6);
  EXPECT_LT((laplacian(c, e) + (1 - std::cos(2 * M_PI / 6)) * e).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gamma2, TwoState) {
  // Gamma2 f = s^2 for f = (0, s) on the flip chain.
  const MarkovChain c = hypercube(1);
  for (double s : {0.5, 1.0, 3.0}) {
    const Vector f = vec({0, s});
    EXPECT_TRUE(gamma2(c, f, f).isApprox(Vector::Constant(2, s * s)));
  }
}

TEST(Forms, IdentitiesWithRho) {
  std::mt19937_64 rng(16);
  for (const Mean& m : {Mean::arithmetic(), Mean::logarithmic(), Mean::geometric()})
    for (int i = 0; i < 15; ++i) {
      const MarkovChain c = testsupport::random_chain(rng);
      const Vector rho = testsupport::random_positive(c.size(), rng);
      const Vector f = testsupport::random_signed(c.size(), rng);
      const Vector gf = gamma_rho(c, m, rho, f, f);
      const Vector g2 = gamma2_rho(c, m, rho, f, f);
      const Vector lf = laplacian(c, f);
      const double a = a_form(c, m, rho, f);
      EXPECT_NEAR(a, inner_pi(c, rho, gf), 1e-12 * (1 + std::abs(a)));
      EXPECT_NEAR(b_form(c, m, rho, f), inner_pi(c, rho, g2), 1e-11);
      // f'Mf and f'Nf against the direct sums.
      for (double n : {kInfDim, 3.0}) {
        const FormPair fp = assemble_forms(c, m, rho, n);
        const double direct_m =
            inner_pi(c, rho, g2 - (std::isinf(n) ? Vector::Zero(c.size()) : Vector(lf.cwiseAbs2() / n)));
        EXPECT_NEAR(f.dot(fp.m * f), direct_m, 1e-10);
        EXPECT_NEAR(f.dot(fp.n_form * f), inner_pi(c, rho, gf), 1e-10);
        EXPECT_LT((fp.m * ones(c)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((fp.n_form * ones(c)).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
}

TEST(Forms, RestrictedAssemblyAgrees) {
  const MarkovChain c = cycle(9);
  const Vector rho = indicator(c, {0});
  const FormPair full = assemble_forms(c, Mean::arithmetic(), rho, kInfDim, false);
  const FormPair local = assemble_forms(c, Mean::arithmetic(), rho, kInfDim, true);
  EXPECT_EQ(local.support, (std::vector<int>{0, 1, 2, 7, 8}));
  std::mt19937_64 rng(17);
  const Vector f = testsupport::random_signed(9, rng);
  const Vector fl = local.restrict(f);
  const Vector lifted = local.expand(fl, 9);
  EXPECT_NEAR(lifted.dot(full.m * lifted), fl.dot(local.m * fl), 1e-13);
  EXPECT_NEAR(f.dot(full.m * f), fl.dot(local.m * fl), 1e-13);
}

TEST(Forms, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(18);
  for (const Mean& m : {Mean::arithmetic(), Mean::logarithmic()})
    for (int i = 0; i < 5; ++i) {
      const MarkovChain c = testsupport::random_chain(rng, 3, 6);
      const Vector rho = testsupport::random_positive(c.size(), rng, 0.5, 2.0);
      const Vector f = testsupport::random_signed(c.size(), rng);
      const FormGradient g = form_gradient(c, m, rho, 4.0, f);
      const double h = 1e-6;
      for (int k = 0; k < c.size(); ++k) {
        Vector up = rho, dn = rho;
        up(k) += h;
        dn(k) -= h;
        const FormPair a = assemble_forms(c, m, up, 4.0), b = assemble_forms(c, m, dn, 4.0);
        EXPECT_NEAR(g.d_m(k), (f.dot(a.m * f) - f.dot(b.m * f)) / (2 * h), 1e-7);
        EXPECT_NEAR(g.d_n(k), (f.dot(a.n_form * f) - f.dot(b.n_form * f)) / (2 * h), 1e-7);
      }
    }
}

TEST(Forms, ArithmeticQuadraticUpperBound) {
  // For the arithmetic mean, ||grad f||^2_rho <= <rho, Gamma f>_pi holds with equality.
  std::mt19937_64 rng(19);
  for (int i = 0; i < 20; ++i) {
    const MarkovChain c = testsupport::random_chain(rng);
    const Vector rho = testsupport::random_positive(c.size(), rng);
    const Vector f = testsupport::random_signed(c.size(), rng);
    EXPECT_NEAR(a_form(c, Mean::arithmetic(), rho, f), inner_pi(c, rho, gamma(c, f, f)), 1e-12);
    // Laplacian square bound: (Delta f)^2 <= 2 D Gamma f pointwise.
    const Vector lf = laplacian(c, f), gf = gamma(c, f, f);
    for (int x = 0; x < c.size(); ++x)
      EXPECT_LE(lf(x) * lf(x), 2 * c.stats().deg_weighted(x) * gf(x) + 1e-14);
  }
}

TEST(Green, GeometricOnlyVanishes) {
  std::mt19937_64 rng(20);
  const MarkovChain c = testsupport::random_chain(rng, 6, 6);
  const Vector rho = testsupport::random_positive(6, rng);
  EXPECT_LE(check_geometric_green(c, Mean::geometric(), rho, 50, 1).max_abs_residual, 1e-11);
  EXPECT_GT(check_geometric_green(c, Mean::logarithmic(), rho, 50, 1).max_abs_residual, 1e-3);
}

TEST(Density, Validation) {
  const MarkovChain c = cycle(4);
  EXPECT_THROW(validate_density(c, Mean::arithmetic(), Vector::Ones(3)), ShapeMismatch);
  EXPECT_THROW(validate_density(c, Mean::arithmetic(), vec({1, -1, 1, 1})), NegativeInput);
  EXPECT_THROW(validate_density(c, Mean::logarithmic(), vec({1, 0, 1, 1})), DomainError);
  EXPECT_NO_THROW(validate_density(c, Mean::arithmetic(), vec({1, 0, 1, 1})));
}
