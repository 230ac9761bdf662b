#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "svgd/errors.hpp"
#include "svgd/theory.hpp"

using namespace svgd;

namespace {

const double kE = std::numbers::e;
const double kMP = std::sqrt(2.0 / std::numbers::pi);
const double kKL0 = 0.5 * (4.0 - 1.0 - std::log(4.0));

}  // namespace

TEST(Theory, StepSchedulePrefixSums) {
  const StepSchedule s({0.1, 0.2, 0.3});
  EXPECT_EQ(s.rounds(), 3);
  EXPECT_DOUBLE_EQ(s.before(0), 0.0);
  EXPECT_DOUBLE_EQ(s.before(1), 0.1);
  EXPECT_NEAR(s.before(3), 0.6, 1e-15);
  EXPECT_NEAR(s.total(), 0.6, 1e-15);
  EXPECT_THROW(StepSchedule({0.1, -0.1}), ContractViolation);
  EXPECT_EQ(StepSchedule::constant(0.5, 0).rounds(), 0);
}

TEST(Theory, PseudoLipschitzConstants) {
  const auto pl = pseudo_lipschitz_constants(3.0, 2.0 / kE, 1.0, 0.0, 1);
  EXPECT_NEAR(pl.c1, 3.0, 1e-15);
  EXPECT_NEAR(pl.c2, 3.0 + 3.0 + (2.0 / kE + 3.0), 1e-14);
  EXPECT_NEAR(pl.c2, 9.7358, 1e-4);
  const auto flat = pseudo_lipschitz_constants(3.0, 2.0 / kE, 0.0, 1.5, 2);
  EXPECT_DOUBLE_EQ(flat.c1, 6.0);
  EXPECT_DOUBLE_EQ(flat.c2, 6.0);
}

TEST(Theory, GrowthConstants) {
  const auto pl = pseudo_lipschitz_constants(3.0, 2.0 / kE, 1.0, 0.0, 1);
  const auto g = abc_constants(pl.c1, pl.c2, kMP, 1.0, 1.0, 3.0, 1.0, 1);
  EXPECT_NEAR(g.A, (pl.c1 + pl.c2) * (1.0 + kMP), 1e-13);
  EXPECT_NEAR(g.A, 22.897, 1e-3);
  EXPECT_NEAR(g.B, 12.7358, 1e-4);
  EXPECT_DOUBLE_EQ(g.C, 12.0);
  const auto z = abc_constants(2.0, 5.0, 0.0, 0.0, 0.0, 3.0, 1.0, 1);
  EXPECT_DOUBLE_EQ(z.A, 7.0);
  EXPECT_DOUBLE_EQ(z.B, 0.0);
  const auto zero = abc_constants(0.0, 0.0, 0.7, 1.0, 1.0, 3.0, 1.0, 1);
  EXPECT_DOUBLE_EQ(zero.A, 0.0);
  EXPECT_DOUBLE_EQ(zero.B, 0.0);
  EXPECT_DOUBLE_EQ(zero.C, 12.0);
}

TEST(Theory, MomentBounds) {
  const auto mb = moment_bound(1.0, 2.0, kMP, 12.0, StepSchedule({0.01}));
  ASSERT_EQ(mb.m_prod.size(), 2u);
  EXPECT_NEAR(mb.m_prod[1], 1.12 + kMP, 1e-14);
  EXPECT_NEAR(mb.m_prod[1], 1.91788, 1e-5);
  EXPECT_NEAR(mb.m_exp[1], std::exp(0.12) + kMP, 1e-14);
  EXPECT_NEAR(mb.m_exp[1], 1.9254, 1e-4);
  EXPECT_NEAR(mb.M_prod[1], 2.0 * 1.12 * 1.12, 1e-14);
  EXPECT_NEAR(mb.M_exp[1], 2.0 * std::exp(0.24), 1e-14);
  EXPECT_NEAR(mb.mP_prod[1], 1.12, 1e-15);

  const auto flat = moment_bound(1.0, 2.0, kMP, 12.0, StepSchedule::constant(0.0, 4));
  for (int r = 0; r <= 4; ++r) {
    EXPECT_DOUBLE_EQ(flat.m_prod[r], 1.0 + kMP);
    EXPECT_DOUBLE_EQ(flat.M_exp[r], 2.0);
  }
}

TEST(Theory, ProductFormNeverExceedsExpForm) {
  const auto mb = moment_bound(0.8, 1.7, 0.3, 9.0, StepSchedule({0.01, 0.05, 0.002, 0.1, 0.03}));
  for (std::size_t r = 0; r < mb.m_prod.size(); ++r) {
    EXPECT_LE(mb.m_prod[r], mb.m_exp[r] * (1 + 1e-15));
    EXPECT_LE(mb.M_prod[r], mb.M_exp[r] * (1 + 1e-15));
  }
}

TEST(Theory, WassersteinBound) {
  const auto s = StepSchedule({0.5});
  const auto seq = wass_discretization_bound(0.1, 1.0, 1.0, 1.0, s);
  EXPECT_DOUBLE_EQ(seq.values[0], 0.1);
  EXPECT_NEAR(seq.values[1], 0.1 * std::exp(0.5 * (1.0 + std::exp(0.5))), 1e-15);
  EXPECT_NEAR(seq.values[1], 0.3760, 1e-4);
  const auto zero = wass_discretization_bound(0.0, 5.0, 5.0, 5.0, StepSchedule::constant(1.0, 10));
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  // Shifted form uses b_r and is never smaller.
  const auto sh = wass_discretization_bound_shifted(0.1, 1.0, 1.0, 1.0, s, 0.5);
  EXPECT_NEAR(sh.values[0], seq.values[1], 1e-15);
  EXPECT_GE(sh.values[1], seq.values[1]);
}

TEST(Theory, DoubleExponentialSaturates) {
  const auto seq = wass_discretization_bound(0.1, 20.0, 20.0, 12.0, StepSchedule::constant(1.0, 100));
  EXPECT_FALSE(seq.saturated[0]);
  EXPECT_TRUE(seq.saturated.back());
  EXPECT_TRUE(std::isinf(seq.values.back()));
  for (double v : seq.values) EXPECT_FALSE(std::isnan(v));
}

TEST(Theory, KsdBound) {
  const double k = std::sqrt(3.0);
  const auto seq = ksd_discretization_bound(0.1, 1.0, 1.0, 1.0, k, 1.0, 1, 1.0, StepSchedule::constant(0.1, 3));
  EXPECT_NEAR(seq.values[0], k * 2.0 * 0.1 + k * std::sqrt(0.2), 1e-14);
  EXPECT_NEAR(seq.values[0], 1.1210, 1e-4);
  for (std::size_t r = 1; r < seq.values.size(); ++r) EXPECT_GT(seq.values[r], seq.values[r - 1]);
  const auto z = ksd_discretization_bound(0.0, 1.0, 1.0, 1.0, k, 1.0, 1, 1.0, StepSchedule::constant(0.1, 3));
  for (double v : z.values) EXPECT_EQ(v, 0.0);
  // At b = 0 the bound equals the pairwise KSD-W1 bound with M = M0P.
  EXPECT_NEAR(seq.values[0], ksd_wasserstein_bound(0.1, k, 1.0, 1, 1.0), 1e-15);
}

TEST(Theory, StepCap) {
  const auto cap = max_step(2.0, 3.0, 1.0, 1.0, kMP * 2.0, kKL0, 1);
  EXPECT_NEAR(cap.curvature_branch, 1.0 / 15.0, 1e-15);
  EXPECT_NEAR(cap.moment_branch, 1.0 + 2.0 * kMP + 2.0 * std::sqrt(2.0 * kKL0), 1e-14);
  EXPECT_NEAR(cap.moment_branch, 5.137, 1e-3);
  EXPECT_NEAR(cap.R, 1.0 / 15.0, 1e-15);
  EXPECT_NEAR(max_step(2.0, 3.0, 1.0, 1.0, 0.0, kKL0, 2).curvature_branch, 2.0 / 15.0, 1e-15);
  EXPECT_LT(max_step(1.0 + 1e-9, 3.0, 1.0, 1.0, 1.0, kKL0, 1).R, 1e-8);
  EXPECT_THROW(max_step(1.0, 3.0, 1.0, 1.0, 1.0, kKL0, 1), PreconditionError);
  EXPECT_THROW(max_step(2.0, 3.0, 1.0, 0.0, 1.0, kKL0, 1), PreconditionError);
  EXPECT_THROW(max_step(2.0, 3.0, 1.0, 1.0, 1.0, INFINITY, 1), PreconditionError);
  EXPECT_THROW(max_step(2.0, 3.0, 1.0, 1.0, 1.0, kKL0, 3), PreconditionError);
}

TEST(Theory, StepWeights) {
  const auto sw = step_weights({1.0 / 15.0}, 3.0, 1.0, 2.0);
  EXPECT_NEAR(sw.c_values[0], 1.0 / 30.0, 1e-15);
  EXPECT_DOUBLE_EQ(sw.pi[0], 1.0);
  const auto uni = step_weights(std::vector<double>(7, 0.02), 3.0, 1.0, 2.0);
  for (double p : uni.pi) EXPECT_NEAR(p, 1.0 / 7.0, 1e-15);
  EXPECT_THROW(step_weights({0.05, 0.07}, 3.0, 1.0, 2.0), PreconditionError);
  EXPECT_THROW(step_weights({0.05}, 3.0, 1.0, 2.0, 0.04), PreconditionError);
  EXPECT_THROW(step_weights({}, 3.0, 1.0, 2.0), PreconditionError);
  EXPECT_THROW(step_weights({0.0, 0.0}, 3.0, 1.0, 2.0), PreconditionError);
}

TEST(Theory, FiniteParticleBound) {
  const double R = 1.0 / 15.0;
  EXPECT_NEAR(finite_particle_bound(0.0, kKL0, R, 0.0), std::sqrt(2.0 * kKL0 * 15.0), 1e-14);
  EXPECT_NEAR(finite_particle_bound(0.0, kKL0, R, 0.0), 4.91992, 1e-5);
  EXPECT_DOUBLE_EQ(finite_particle_bound(0.7, 0.0, R, 1.0), 0.7);
  const double k = std::sqrt(3.0);
  EXPECT_DOUBLE_EQ(a_term(0.0, 1, 1, 1, k, 1, 1, 1, 0.0, R), 0.0);
  EXPECT_NEAR(a_term(0.1, 1, 1, 1, k, 1, 1, 1, 0.0, R), ksd_wasserstein_bound(0.1, k, 1, 1, 1), 1e-15);
}

TEST(Theory, GrowthFunctions) {
  EXPECT_NEAR(growth_phi(1.0), std::log(std::log(std::exp(kE) + 1.0)), 1e-15);
  EXPECT_NEAR(growth_phi(1.0), 1.0233, 1e-4);
  EXPECT_NEAR(growth_phi(1e300), 1.0, 1e-12);
  EXPECT_NEAR(growth_psi(1.0, 1.0, std::exp(-10.0), 2.0, 1.0), std::log(8.0), 1e-13);
  EXPECT_DOUBLE_EQ(growth_psi(5.0, 1.0, std::exp(-3.0), 0.0, 1.0), 0.0);
  EXPECT_THROW(growth_phi(0.0), DomainError);
  EXPECT_THROW(growth_psi(1.0, 1.0, -1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(growth_psi(1.0, 0.0, 0.5, 0.0, 1.0), DomainError);
  for (double w = 1e-12; w < 1e6; w *= 10) EXPECT_GE(growth_phi(w), 1.0);
}

TEST(Theory, StepBudgetClampsForLargeWbar) {
  const auto sb = step_budget(1.0, 22.9, 12.7, 12.0);
  EXPECT_DOUBLE_EQ(sb.b, 0.0);
  EXPECT_DOUBLE_EQ(sb.beta1, 1.0);
  EXPECT_DOUBLE_EQ(sb.beta2, 1.0);
}

TEST(Theory, StepBudgetFixedPoint) {
  const double w = std::exp(-100.0);
  const auto sb = step_budget(w, 0.0, 1.0, 1.0);
  EXPECT_GT(sb.b, 0.0);
  EXPECT_LE(sb.b, std::log(100.0));
  const double phi = growth_phi(w);
  EXPECT_LE(sb.b1, growth_psi(1.0, 1.0, w * std::sqrt(phi), 0.0, sb.b1) + 1e-12);
  EXPECT_LE(sb.b2, growth_psi(1.0, 1.0, w * phi, 2.0, sb.b2) + 1e-12);
  EXPECT_DOUBLE_EQ(sb.b, std::min(sb.b1, sb.b2));
}

TEST(Theory, StepBudgetNonincreasingInWbarForLedgerConstants) {
  // Constants of the 1-D reference ledger.
  double prev = INFINITY;
  for (int k = 400; k >= 0; --k) {
    const double b = step_budget(std::exp(-static_cast<double>(k)), 22.897, 12.7358, 12.0).b;
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, prev + 1e-12) << k;
    prev = b;
  }
}

TEST(Theory, StepBudgetIsNotMonotoneAcrossTheBetaClamp) {
  // When beta leaves its floor of 1 the budget can drop back to 0 before growing
  // again, so b is not monotone in wbar for every choice of constants.
  const double b5 = step_budget(std::exp(-5.0), 2.0, 1.5, 0.5).b;
  const double b10 = step_budget(std::exp(-10.0), 2.0, 1.5, 0.5).b;
  EXPECT_GT(b5, 0.0);
  EXPECT_EQ(b10, 0.0);
}

TEST(Theory, RateRhs) {
  RateInputs in;
  in.kappa = std::sqrt(3.0);
  in.L = 1.0;
  in.d = 1;
  in.M0P_inf = 5.0;
  in.KL0 = kKL0;
  in.R1 = 1.0 / 15.0;
  in.wbar = 0.0;
  in.b = 0.0;
  EXPECT_NEAR(rate_rhs(in), std::sqrt(2.0 * kKL0 * 15.0), 1e-14);

  in.wbar = std::exp(-100.0);
  in.Abar = 0.0;
  in.Bbar = 1.0;
  in.Cbar = 1.0;
  in.b = step_budget(in.wbar, in.Abar, in.Bbar, in.Cbar).b;
  const double phi = growth_phi(in.wbar);
  EXPECT_NEAR(std::sqrt(phi), 2.146, 1e-3);
  const double first = (in.kappa * 2.0 + in.kappa * std::sqrt(10.0)) / std::sqrt(phi);
  const double r = rate_rhs(in);
  EXPECT_GT(r, first);
  EXPECT_TRUE(std::isfinite(r));

  // Halving wbar never increases the nonzero branch.
  double prev = r;
  for (int i = 0; i < 40; ++i) {
    in.wbar *= 0.5;
    const double cur = rate_rhs(in);
    EXPECT_LE(cur, prev * (1 + 1e-12));
    prev = cur;
  }
}

TEST(Theory, IidInitBound) {
  EXPECT_NEAR(iid_init_bound(4.0, 100, 1, 0.1), 4.0, 1e-14);
  EXPECT_NEAR(iid_init_bound(1.0, 3, 2, 1.0), std::log(3.0) / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(iid_init_bound(1.0, 8, 3, 1.0), 0.5, 1e-15);
  EXPECT_THROW(iid_init_bound(1.0, 0, 1, 0.1), DomainError);
  EXPECT_THROW(iid_init_bound(1.0, 10, 1, 0.0), DomainError);
  EXPECT_THROW(iid_init_bound(1.0, 10, 1, 1.5), DomainError);
}

TEST(Theory, LedgerConsistency) {
  BoundConstants bc;
  bc.kappa = std::sqrt(3.0);
  bc.kappa2 = 3.0;
  bc.gamma = 2.0 / kE;
  bc.L = 1.0;
  bc.lambda = 1.0;
  bc.m_P = kMP;
  bc.M_P = 1.0;
  bc.m0P_n = 1.0;
  bc.m0P_inf = 1.0;
  bc.KL0 = kKL0;
  bc.init_mean_dist_to_xstar = 2.0 * kMP;
  complete_ledger(bc);
  EXPECT_NEAR(bc.R1, 1.0 / 15.0, 1e-15);
  EXPECT_NEAR(bc.R2, 2.0 / 15.0, 1e-15);
  EXPECT_LT(ledger_inconsistency(bc), 1e-12);
  bc.A += 1.0;
  EXPECT_NEAR(ledger_inconsistency(bc), 1.0, 1e-12);
  bc.KL0 = INFINITY;
  complete_ledger(bc);
  EXPECT_TRUE(std::isnan(bc.R1));
}
