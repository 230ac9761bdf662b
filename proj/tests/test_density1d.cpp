#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "svgd/density1d.hpp"
#include "svgd/errors.hpp"
#include "svgd/transport.hpp"
#include "test_util.hpp"

using namespace svgd;

namespace {

const KernelSpec kRbf{KernelFamily::GaussianRBF, 1.0, 0.5};
const double kKL0 = 0.5 * (4.0 - 1.0 - std::log(4.0));

}  // namespace

TEST(Density1d, QuadratureIsValidAndNormalized) {
  const auto t = test::std_normal();
  const auto q = default_quadrature(0.0, 2.0, t, 2001);
  EXPECT_NO_THROW(q.validate());
  EXPECT_DOUBLE_EQ(q.nodes.front(), -24.0);
  EXPECT_DOUBLE_EQ(q.nodes.back(), 24.0);
  EXPECT_NEAR(density_mass(q), 1.0, 1e-10);
}

TEST(Density1d, InitialKlMatchesClosedForm) {
  const auto t = test::std_normal();
  EXPECT_NEAR(kl_to_target(default_quadrature(0.0, 2.0, t, 2001), t), kKL0, 1e-6);
  EXPECT_NEAR(kl_to_target(default_quadrature(1.0, 1.0, t, 2001), t), 0.5, 1e-6);
  EXPECT_NEAR(kl_to_target(default_quadrature(0.0, 1.0, t, 2001), t), 0.0, 1e-9);
}

TEST(Density1d, KlErrorShrinksWithResolution) {
  const auto t = test::std_normal();
  double prev = INFINITY;
  for (int n : {51, 101, 201, 401}) {
    const double err = std::abs(kl_to_target(default_quadrature(0.0, 2.0, t, n), t) - kKL0);
    EXPECT_LE(err, prev + 1e-12) << n;
    prev = err;
  }
}

TEST(Density1d, JacobianMatchesFiniteDifferenceOfMap) {
  const auto t = test::std_normal();
  const auto q = default_quadrature(0.0, 2.0, t, 401);
  const auto ens = to_ensemble(q);
  const double eps = 0.05;
  auto T = [&](double x) { return x + eps * svgd_direction(ens, Vector{x}, t, kRbf)[0]; };
  for (double x : {-3.0, -0.4, 0.0, 1.1, 5.0}) {
    const double h = 1e-5;
    EXPECT_NEAR(transport_jacobian_1d(q, x, eps, t, kRbf), (T(x + h) - T(x - h)) / (2 * h), 1e-8);
  }
  EXPECT_DOUBLE_EQ(transport_jacobian_1d(q, 0.7, 0.0, t, kRbf), 1.0);
}

TEST(Density1d, PushMatchesParticleUpdateAndPreservesMass) {
  const auto t = test::std_normal();
  const auto q = default_quadrature(0.0, 2.0, t, 801);
  const auto next = push_density(q, 1.0 / 30.0, t, kRbf);
  const auto moved = svgd_step(to_ensemble(q), t, kRbf, 1.0 / 30.0);
  for (int i = 0; i < q.size(); i += 50) EXPECT_NEAR(next.nodes[i], moved.particle(i)[0], 1e-12);
  EXPECT_EQ(next.weights, q.weights);
  EXPECT_NEAR(density_mass(next), 1.0, 1e-6);
  EXPECT_LT(kl_to_target(next, t), kl_to_target(q, t));
}

TEST(Density1d, ZeroStepIsIdentity) {
  const auto t = test::std_normal();
  const auto q = default_quadrature(0.0, 2.0, t, 101);
  const auto next = push_density(q, 0.0, t, kRbf);
  EXPECT_EQ(next.nodes, q.nodes);
  EXPECT_EQ(next.log_density_values, q.log_density_values);
}

TEST(Density1d, HugeStepIsRejected) {
  const auto t = test::std_normal();
  const auto q = default_quadrature(0.0, 2.0, t, 201);
  EXPECT_THROW(push_density(q, 50.0, t, kRbf), StepTooLarge);
}

TEST(Density1d, DescentInequalityHolds) {
  const auto t = test::std_normal();
  const auto q = default_quadrature(0.0, 2.0, t, 801);
  const std::vector<double> eps(10, 1.0 / 30.0);
  const auto traj = run_density(q, eps, t, kRbf);
  const auto rep = verify_descent(traj, eps, t, kRbf, 3.0, 1.0, 2.0);
  EXPECT_TRUE(rep.passed);
  EXPECT_GE(rep.worst_slack, -kDescentTolerance);
  EXPECT_LE(rep.aggregate_lhs, rep.aggregate_mid + 1e-12);
  EXPECT_LE(rep.aggregate_mid, rep.aggregate_rhs + 1e-12);
  for (std::size_t r = 1; r < rep.kl.size(); ++r) EXPECT_LT(rep.kl[r], rep.kl[r - 1]);
}

TEST(Density1d, CoarseGridNegativeKlIsDiagnosed) {
  QuadratureMeasure m;
  m.nodes = {-1.0, 0.0, 1.0};
  m.weights = {0.25, 0.5, 0.25};
  m.log_density_values = {-10.0, -10.0, -10.0};
  EXPECT_THROW(kl_to_target(m, test::std_normal()), DiscretizationFailure);
}

TEST(Density1d, ValidationErrors) {
  QuadratureMeasure m;
  m.nodes = {0.0, 0.0};
  m.weights = {0.5, 0.5};
  m.log_density_values = {0.0, 0.0};
  EXPECT_THROW(m.validate(), ContractViolation);
  EXPECT_THROW(gaussian_quadrature(0.0, -1.0, -1.0, 1.0, 11), ContractViolation);
  EXPECT_THROW(gaussian_quadrature(0.0, 1.0, 1.0, -1.0, 11), ContractViolation);
  const Target t2(TargetSpec::isotropic_gaussian(2, 0.0, 1.0));
  EXPECT_THROW(default_quadrature(0.0, 1.0, t2, 11), ContractViolation);
}

TEST(Density1d, DensityCsv) {
  const auto q = gaussian_quadrature(0.0, 1.0, -1.0, 1.0, 3);
  std::ostringstream os;
  write_density_header(os);
  write_density_rows(os, 2, q);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "round,node,weight,log_density");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
  EXPECT_EQ(s.find("2,-1,"), s.find('\n') + 1);
}
