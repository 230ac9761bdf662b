#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "svgd/errors.hpp"
#include "svgd/targets.hpp"
#include "test_util.hpp"

using namespace svgd;

namespace {

Target mixture_1d() {
  Eigen::VectorXd a(1), b(1);
  a << -1.0;
  b << 1.0;
  return Target(TargetSpec::mixture({0.5, 0.5}, {a, b}, 1.0, 0.25));
}

Target correlated_2d() {
  Eigen::VectorXd m(2);
  m << 0.5, -1.0;
  Eigen::MatrixXd S(2, 2);
  S << 2.0, 0.6, 0.6, 1.0;
  return Target(TargetSpec::gaussian(m, S));
}

}  // namespace

TEST(Targets, ScoreMatchesFiniteDifferenceOfLogDensity) {
  const std::vector<Target> targets = {test::std_normal(), mixture_1d(), correlated_2d()};
  for (const auto& t : targets) {
    Vector x(t.dim());
    for (int j = 0; j < t.dim(); ++j) x[j] = 0.37 - 0.9 * j;
    const Vector s = score(t, x);
    for (int j = 0; j < t.dim(); ++j) {
      Vector xp = x, xm = x;
      xp[j] += 1e-5;
      xm[j] -= 1e-5;
      EXPECT_NEAR(s[j], (log_density(t, xp) - log_density(t, xm)) / 2e-5, 1e-7);
    }
  }
}

TEST(Targets, LogDensityIsNormalized) {
  const auto t = mixture_1d();
  double mass = 0;
  const double h = 1e-3;
  for (double x = -15; x <= 15; x += h) mass += std::exp(log_density(t, Vector{x})) * h;
  EXPECT_NEAR(mass, 1.0, 1e-6);
  EXPECT_NEAR(log_density(test::std_normal(), Vector{0.0}), -0.5 * std::log(2 * std::numbers::pi), 1e-14);
}

TEST(Targets, GaussianConstants) {
  const auto tc = target_constants(test::std_normal());
  EXPECT_DOUBLE_EQ(tc.L, 1.0);
  EXPECT_DOUBLE_EQ(tc.lambda, 1.0);
  EXPECT_NEAR(tc.m_P, std::sqrt(2.0 / std::numbers::pi), 1e-15);
  EXPECT_DOUBLE_EQ(tc.M_P, 1.0);
  EXPECT_TRUE(tc.m_P_exact);
  ASSERT_EQ(tc.x_star.size(), 1u);
  EXPECT_DOUBLE_EQ(tc.x_star[0], 0.0);

  const auto tc2 = target_constants(correlated_2d());
  Eigen::MatrixXd S(2, 2);
  S << 2.0, 0.6, 0.6, 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  EXPECT_NEAR(tc2.L, 1.0 / eig.eigenvalues().minCoeff(), 1e-12);
  EXPECT_NEAR(tc2.lambda, 1.0 / eig.eigenvalues().maxCoeff(), 1e-12);
  EXPECT_NEAR(tc2.M_P, 0.25 + 1.0 + 3.0, 1e-12);
  EXPECT_FALSE(tc2.m_P_exact);
}

TEST(Targets, MixtureConstants) {
  const auto t = mixture_1d();
  const auto tc = target_constants(t);
  // Gap 2, sigma 1: unimodal, single root at 0. s'(0) = 0 there, so s is cubic
  // near the root and the location is only resolved to about 1e-5.
  EXPECT_NEAR(score(t, tc.x_star)[0], 0.0, 1e-10);
  EXPECT_NEAR(tc.x_star[0], 0.0, 1e-4);
  // L is an upper bound on the grid maximum of |s'|.
  EXPECT_GE(tc.L + 1e-12, tc.L_grid);
  EXPECT_DOUBLE_EQ(tc.lambda, 0.25);
  EXPECT_NEAR(tc.M_P, 2.0, 1e-14);
  // E|Z| by numerical integration.
  double m = 0;
  const double h = 1e-3;
  for (double x = -15; x <= 15; x += h) m += std::abs(x) * std::exp(log_density(t, Vector{x})) * h;
  EXPECT_NEAR(tc.m_P, m, 1e-6);
}

TEST(Targets, BimodalMixtureRootIsSmallest) {
  Eigen::VectorXd a(1), b(1);
  a << -3.0;
  b << 3.0;
  const Target t(TargetSpec::mixture({0.5, 0.5}, {a, b}, 1.0, 0.05));
  const auto tc = target_constants(t);
  EXPECT_NEAR(score(t, tc.x_star)[0], 0.0, 1e-9);
  // Roots near -3, 0 and 3; the smallest sits near the left mode.
  EXPECT_LT(tc.x_star[0], -2.5);
}

TEST(Targets, MixtureWithoutLambdaReportsNaN) {
  Eigen::VectorXd a(1), b(1);
  a << -1.0;
  b << 1.0;
  const Target t(TargetSpec::mixture({0.3, 0.7}, {a, b}, 0.5));
  EXPECT_TRUE(std::isnan(target_constants(t).lambda));
}

TEST(Targets, ValidationErrors) {
  Eigen::VectorXd m(2);
  m << 0, 0;
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(Target(TargetSpec::gaussian(m, bad)), ContractViolation);
  Eigen::VectorXd a(1);
  a << 0.0;
  EXPECT_THROW(Target(TargetSpec::mixture({0.5, 0.6}, {a, a}, 1.0)), ContractViolation);
  EXPECT_THROW(Target(TargetSpec::mixture({1.0}, {a}, -1.0)), ContractViolation);
  EXPECT_THROW(score(test::std_normal(), Vector{0.0, 1.0}), ContractViolation);
}

TEST(Targets, SamplingIsDeterministicAndHasRightMoments) {
  const auto t = correlated_2d();
  const auto a = sample(t, 20000, 42);
  const auto b = sample(t, 20000, 42);
  EXPECT_EQ(a.positions(), b.positions());
  EXPECT_NE(a.positions(), sample(t, 20000, 43).positions());
  const Eigen::RowVectorXd mean = a.positions().colwise().mean();
  EXPECT_NEAR(mean[0], 0.5, 0.05);
  EXPECT_NEAR(mean[1], -1.0, 0.05);
  const Eigen::MatrixXd centred = a.positions().rowwise() - mean;
  const Eigen::MatrixXd cov = centred.transpose() * centred / (a.size() - 1);
  EXPECT_NEAR(cov(0, 0), 2.0, 0.08);
  EXPECT_NEAR(cov(0, 1), 0.6, 0.05);
  EXPECT_NEAR(cov(1, 1), 1.0, 0.04);
}

TEST(Targets, GaussianKl) {
  auto g = [](double m, double v) {
    GaussianParams p;
    p.mean = Eigen::VectorXd::Constant(1, m);
    p.covariance = Eigen::MatrixXd::Constant(1, 1, v);
    return p;
  };
  EXPECT_NEAR(gaussian_kl(g(0, 4), g(0, 1)), 0.5 * (4 - 1 - std::log(4.0)), 1e-15);
  EXPECT_NEAR(gaussian_kl(g(1, 1), g(0, 1)), 0.5, 1e-15);
  EXPECT_NEAR(gaussian_kl(g(2, 3), g(2, 3)), 0.0, 1e-15);
  // Independent coordinates add.
  GaussianParams q, p;
  q.mean = Eigen::Vector2d(1, 0);
  q.covariance = Eigen::Vector2d(4, 2).asDiagonal();
  p.mean = Eigen::Vector2d(0, 0);
  p.covariance = Eigen::Matrix2d::Identity();
  EXPECT_NEAR(gaussian_kl(q, p), gaussian_kl(g(1, 4), g(0, 1)) + gaussian_kl(g(0, 2), g(0, 1)), 1e-14);
}

TEST(Targets, ExpectedDistanceMatchesMonteCarlo) {
  GaussianParams q;
  q.mean = Eigen::Vector2d(0.3, -0.2);
  q.covariance = Eigen::Matrix2d::Identity() * 1.5;
  const Vector c{1.0, 0.5};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  double acc = 0;
  const int N = 400000;
  for (int i = 0; i < N; ++i) {
    const double x = 0.3 + std::sqrt(1.5) * n01(rng) - 1.0;
    const double y = -0.2 + std::sqrt(1.5) * n01(rng) - 0.5;
    acc += std::hypot(x, y);
  }
  EXPECT_NEAR(gaussian_expected_distance(q, c), acc / N, 1e-2);
  // Centred isotropic: sigma * chi mean.
  GaussianParams z;
  z.mean = Eigen::Vector3d::Zero();
  z.covariance = Eigen::Matrix3d::Identity() * 4.0;
  EXPECT_NEAR(gaussian_expected_distance(z, Vector{0, 0, 0}), 2.0 * 2.0 * std::sqrt(2.0 / std::numbers::pi),
              1e-14);
}

TEST(Targets, ExpectedDistanceOneDimensional) {
  const auto t = test::std_normal();
  EXPECT_NEAR(t.expected_distance_1d(0.0), std::sqrt(2.0 / std::numbers::pi), 1e-15);
  // E|c - Z| for large c approaches c.
  EXPECT_NEAR(t.expected_distance_1d(30.0), 30.0, 1e-12);
  EXPECT_NEAR(t.expected_sq_distance(Vector{2.0}), 5.0, 1e-14);
}
