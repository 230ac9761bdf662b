#include <cmath>
#include <functional>
#include <numbers>

#include <gtest/gtest.h>

#include "svgd/errors.hpp"
#include "svgd/kernels.hpp"

using namespace svgd;

namespace {

KernelSpec rbf(double h = 1.0) { return {KernelFamily::GaussianRBF, h, 0.5}; }
KernelSpec imq(double beta, double h = 1.0) { return {KernelFamily::IMQ, h, beta}; }

// Independent kernel formulas, written straight from the radial definitions.
double rbf_direct(double h, const Vector& x, const Vector& y) {
  double r2 = 0;
  for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - y[j]) * (x[j] - y[j]);
  return std::exp(-r2 / (2 * h * h));
}
double imq_direct(double beta, double h, const Vector& x, const Vector& y) {
  double r2 = 0;
  for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - y[j]) * (x[j] - y[j]);
  return std::pow(1 + r2 / (h * h), -beta);
}

// Central difference of f along coordinate j of the first argument.
double fd_x(const std::function<double(const Vector&, const Vector&)>& f, Vector x, const Vector& y,
            std::size_t j, double step = 1e-5) {
  Vector xp = x, xm = x;
  xp[j] += step;
  xm[j] -= step;
  return (f(xp, y) - f(xm, y)) / (2 * step);
}

double fd_cross(const std::function<double(const Vector&, const Vector&)>& f, const Vector& x,
                const Vector& y, std::size_t j, double step = 1e-4) {
  Vector yp = y, ym = y;
  yp[j] += step;
  ym[j] -= step;
  return (fd_x(f, x, yp, j, step) - fd_x(f, x, ym, j, step)) / (2 * step);
}

}  // namespace

TEST(Kernels, RbfClosedFormConstants) {
  const auto kc = kernel_constants(rbf());
  EXPECT_NEAR(kc.kappa2, 3.0, 1e-15);
  EXPECT_NEAR(kc.kappa, std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(kc.gamma, 2.0 / std::numbers::e, 1e-15);
}

TEST(Kernels, RbfBandwidthScaling) {
  // D^I_x D^I_y k at x = y scales like h^{-2|I|}; for h < 1 the order-2 term dominates.
  const auto kc = kernel_constants(rbf(0.5));
  EXPECT_NEAR(kc.kappa2, 3.0 / std::pow(0.5, 4), 1e-9);
  EXPECT_NEAR(kc.gamma, 2.0 / std::numbers::e, 1e-15);
}

TEST(Kernels, GridCheckPassesForRbfAndImq) {
  EXPECT_NO_THROW(kernel_constants(rbf(), CheckBox{-5, 5, 1, 10000}));
  EXPECT_NO_THROW(kernel_constants(imq(0.5), CheckBox{-5, 5, 1, 10000}));
  EXPECT_NO_THROW(kernel_constants(rbf(0.7), CheckBox{-3, 3, 2, 60}));
}

TEST(Kernels, ImqGammaMatchesBruteForceSup) {
  for (double beta : {0.2, 0.5, 0.8}) {
    const KernelSpec s = imq(beta);
    double sup = 0;
    for (int i = 1; i <= 200000; ++i) {
      const double r = i * 1e-4;
      const Vector x{r}, y{0.0};
      sup = std::max(sup, r * std::abs(k_grad_x(s, x, y)[0]));
    }
    EXPECT_NEAR(kernel_constants(s).gamma, sup, 1e-6) << beta;
  }
}

TEST(Kernels, EvaluationMatchesDirectFormulas) {
  const Vector x{0.3, -1.2}, y{1.1, 0.4};
  EXPECT_NEAR(k_eval(rbf(1.3), x, y), rbf_direct(1.3, x, y), 1e-15);
  EXPECT_NEAR(k_eval(imq(0.5, 0.8), x, y), imq_direct(0.5, 0.8, x, y), 1e-15);
}

TEST(Kernels, GradientAndCrossTraceMatchFiniteDifferences) {
  const Vector x{0.3, -1.2, 0.5}, y{1.1, 0.4, -0.2};
  for (const KernelSpec& s : {rbf(1.0), rbf(0.7), imq(0.5), imq(0.3, 1.5)}) {
    auto f = [&](const Vector& a, const Vector& b) {
      return s.family == KernelFamily::GaussianRBF ? rbf_direct(s.bandwidth, a, b)
                                                   : imq_direct(s.imq_exponent, s.bandwidth, a, b);
    };
    const Vector g = k_grad_x(s, x, y);
    double trace = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(g[j], fd_x(f, x, y, j), 1e-8);
      trace += fd_cross(f, x, y, j);
    }
    EXPECT_NEAR(k_cross_hess_trace(s, x, y), trace, 1e-5);
  }
}

TEST(Kernels, MixedDerivativesMatchFiniteDifferences) {
  const Vector x{0.4, -0.3}, y{-0.2, 0.6};
  const KernelSpec s = rbf(1.2);
  auto f = [&](const Vector& a, const Vector& b) { return rbf_direct(1.2, a, b); };
  EXPECT_NEAR(mixed_derivative(s, x, y, {0, 0}), f(x, y), 1e-14);
  EXPECT_NEAR(mixed_derivative(s, x, y, {1, 0}), fd_cross(f, x, y, 0), 1e-6);
  EXPECT_NEAR(mixed_derivative(s, x, y, {0, 1}), fd_cross(f, x, y, 1), 1e-6);
  // I = (1, 1): d_x0 d_x1 d_y0 d_y1 k via nested differences.
  const double hstep = 1e-3;
  double acc = 0;
  for (int a : {-1, 1})
    for (int b : {-1, 1})
      for (int c : {-1, 1})
        for (int d : {-1, 1}) {
          const Vector xx{x[0] + a * hstep, x[1] + b * hstep};
          const Vector yy{y[0] + c * hstep, y[1] + d * hstep};
          acc += a * b * c * d * f(xx, yy);
        }
  EXPECT_NEAR(mixed_derivative(s, x, y, {1, 1}), acc / std::pow(2 * hstep, 4), 1e-4);
}

TEST(Kernels, MultiIndexEnumeration) {
  EXPECT_EQ(multi_indices_up_to_order2(1).size(), 3u);  // 0, 1, 2
  EXPECT_EQ(multi_indices_up_to_order2(2).size(), 6u);  // 1 + 2 + 3
  EXPECT_EQ(multi_indices_up_to_order2(3).size(), 10u);
  for (const auto& I : multi_indices_up_to_order2(3)) {
    int total = 0;
    for (int v : I) total += v;
    EXPECT_LE(total, 2);
  }
}

TEST(Kernels, DiagonalBoundedByKappaSquared) {
  for (const KernelSpec& s : {rbf(), rbf(0.6), imq(0.5), imq(0.9, 0.5)}) {
    const auto kc = kernel_constants(s);
    const Vector x{0.7, -0.1};
    for (const auto& I : multi_indices_up_to_order2(2)) {
      EXPECT_LE(mixed_derivative(s, x, x, I), kc.kappa2 + 1e-12);
    }
  }
}

TEST(Kernels, GammaBoundHoldsOnRandomPairs) {
  for (const KernelSpec& s : {rbf(), imq(0.5)}) {
    const double gamma = kernel_constants(s).gamma;
    for (int i = 1; i < 500; ++i) {
      const double r = 0.013 * i;
      const Vector x{r * 0.6, r * 0.8}, y{0.0, 0.0};
      EXPECT_LE(norm2(k_grad_x(s, x, y)), gamma / r + 1e-12);
    }
  }
}

TEST(Kernels, ValidationRejectsBadSpecs) {
  EXPECT_THROW(rbf(0.0).validate(), ContractViolation);
  EXPECT_THROW(rbf(-1.0).validate(), ContractViolation);
  EXPECT_THROW(imq(1.0).validate(), ContractViolation);
  EXPECT_THROW(imq(0.0).validate(), ContractViolation);
  EXPECT_NO_THROW(imq(0.5).validate());
  const Vector a{1.0}, b{1.0, 2.0};
  EXPECT_THROW(k_eval(rbf(), a, b), ContractViolation);
  const Vector nan{std::nan("")};
  EXPECT_THROW(k_eval(rbf(), nan, a), DomainError);
}

TEST(Kernels, FamilyNamesRoundTrip) {
  for (auto f : {KernelFamily::GaussianRBF, KernelFamily::IMQ}) {
    EXPECT_EQ(kernel_family_from_string(to_string(f)), f);
  }
  EXPECT_THROW(kernel_family_from_string("matern"), ContractViolation);
}
