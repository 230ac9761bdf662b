#include "svgd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "svgd/errors.hpp"

namespace svgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogMax = std::log(std::numeric_limits<double>::max());

// coef * exp(exponent) without overflowing to NaN; coef >= 0.
double scaled_exp(double coef, double exponent) {
  if (coef == 0.0) return 0.0;
  if (!std::isfinite(exponent)) return exponent > 0 ? kInf : 0.0;
  const double v = std::log(coef) + exponent;
  if (v >= kLogMax) return kInf;
  return std::exp(v);
}

// exp(x) with +inf instead of overflow.
double safe_exp(double x) { return x >= kLogMax ? kInf : std::exp(x); }

// b * (A + B exp(C b_inner)), with 0 * inf = 0.
double growth_exponent(double b, double A, double B, double C, double b_inner) {
  if (b == 0.0) return 0.0;
  const double inner = B == 0.0 ? 0.0 : B * safe_exp(C * b_inner);
  return b * (A + inner);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || std::isnan(v)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

StepSchedule::StepSchedule(std::vector<double> eps) : eps_(std::move(eps)) {
  prefix_.reserve(eps_.size() + 1);
  prefix_.push_back(0.0);
  for (double e : eps_) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw ContractViolation("StepSchedule: step sizes must be finite and nonnegative");
    }
    prefix_.push_back(prefix_.back() + e);
  }
}

StepSchedule StepSchedule::constant(double eps, int rounds) {
  if (rounds < 0) throw ContractViolation("StepSchedule: negative round count");
  return StepSchedule(std::vector<double>(rounds, eps));
}

PseudoLipschitz pseudo_lipschitz_constants(double kappa2, double gamma, double L,
                                           double x_star_norm, int d) {
  const double sd = std::sqrt(static_cast<double>(d));
  PseudoLipschitz pl;
  pl.c1 = std::max(sd * kappa2 * L, sd * kappa2 * L * x_star_norm + d * kappa2);
  pl.c2 = kappa2 * L + d * kappa2 + L * (gamma + sd * kappa2) * (1.0 + x_star_norm);
  return pl;
}

GrowthConstants abc_constants(double c1, double c2, double m_P, double m0P_n, double m0P_inf,
                              double kappa2, double L, int d) {
  return {(c1 + c2) * (1.0 + m_P), c1 * m0P_n + c2 * m0P_inf, kappa2 * (3.0 * L + d)};
}

MomentBounds moment_bound(double m0P, double M0P, double m_P, double C,
                          const StepSchedule& schedule) {
  MomentBounds mb;
  double prod = 1.0;
  for (int r = 0; r <= schedule.rounds(); ++r) {
    if (r > 0) prod *= 1.0 + schedule.eps()[r - 1] * C;
    const double b = schedule.before(r);
    mb.mP_prod.push_back(m0P * prod);
    mb.m_prod.push_back(m0P * prod + m_P);
    mb.m_exp.push_back(scaled_exp(m0P, C * b) + m_P);
    mb.M_prod.push_back(M0P * prod * prod);
    mb.M_exp.push_back(scaled_exp(M0P, 2.0 * C * b));
  }
  return mb;
}

BoundSequence wass_discretization_bound(double w0n, double A, double B, double C,
                                        const StepSchedule& schedule) {
  if (w0n < 0.0) throw DomainError("wass_discretization_bound: w0n must be nonnegative");
  BoundSequence seq;
  for (int r = 0; r <= schedule.rounds(); ++r) {
    const double b = schedule.before(r);
    const double v = scaled_exp(w0n, growth_exponent(b, A, B, C, b));
    seq.values.push_back(v);
    seq.saturated.push_back(std::isinf(v) ? 1 : 0);
  }
  return seq;
}

BoundSequence wass_discretization_bound_shifted(double w0n, double A, double B, double C,
                                                const StepSchedule& schedule,
                                                double final_step) {
  if (w0n < 0.0) throw DomainError("wass_discretization_bound: w0n must be nonnegative");
  BoundSequence seq;
  for (int r = 0; r <= schedule.rounds(); ++r) {
    const double b = r < schedule.rounds() ? schedule.before(r + 1) : schedule.total() + final_step;
    const double v = scaled_exp(w0n, growth_exponent(b, A, B, C, b));
    seq.values.push_back(v);
    seq.saturated.push_back(std::isinf(v) ? 1 : 0);
  }
  return seq;
}

double ksd_discretization_value(double w0n, double A, double B, double C, double kappa, double L,
                                int d, double M0P_inf, double b, double b_first) {
  if (w0n < 0.0) throw DomainError("ksd_discretization_bound: w0n must be nonnegative");
  const double first = scaled_exp(kappa * (d + L) * w0n, growth_exponent(b, A, B, C, b_first));
  const double second_coef =
      std::pow(static_cast<double>(d), 0.25) * kappa * L * std::sqrt(2.0 * M0P_inf * w0n);
  const double second_exp = b == 0.0 ? 0.0 : 0.5 * (2.0 * C * b + growth_exponent(b, A, B, C, b));
  return first + scaled_exp(second_coef, second_exp);
}

BoundSequence ksd_discretization_bound(double w0n, double A, double B, double C, double kappa,
                                       double L, int d, double M0P_inf,
                                       const StepSchedule& schedule) {
  BoundSequence seq;
  for (int r = 0; r <= schedule.rounds(); ++r) {
    const double b = schedule.before(r);
    const double v = ksd_discretization_value(w0n, A, B, C, kappa, L, d, M0P_inf, b, b);
    seq.values.push_back(v);
    seq.saturated.push_back(std::isinf(v) ? 1 : 0);
  }
  return seq;
}

double ksd_wasserstein_bound(double w1, double kappa, double L, int d, double M_nuP) {
  return kappa * (d + L) * w1 +
         std::pow(static_cast<double>(d), 0.25) * kappa * L * std::sqrt(2.0 * M_nuP * w1);
}

StepCap max_step(double alpha, double kappa2, double L, double lambda,
                 double init_mean_dist_to_xstar, double KL0, int p) {
  if (!(alpha > 1.0)) throw PreconditionError("max_step: alpha must exceed 1");
  if (!(lambda > 0.0)) throw PreconditionError("max_step: T1 constant lambda must be positive");
  if (!std::isfinite(KL0)) {
    throw PreconditionError("max_step: KL(Q_0 || P) is infinite (initialization not absolutely continuous)");
  }
  if (KL0 < 0.0) throw PreconditionError("max_step: KL must be nonnegative");
  if (p != 1 && p != 2) throw PreconditionError("max_step: p must be 1 or 2");
  StepCap cap;
  cap.curvature_branch = p / (kappa2 * (L + alpha * alpha));
  cap.moment_branch =
      (alpha - 1.0) * (1.0 + L * init_mean_dist_to_xstar + 2.0 * L * std::sqrt(2.0 * KL0 / lambda));
  cap.R = std::min(cap.curvature_branch, cap.moment_branch);
  return cap;
}

StepWeights step_weights(const std::vector<double>& eps, double kappa2, double L, double alpha,
                         std::optional<double> cap) {
  if (eps.empty()) throw PreconditionError("step_weights: empty step list");
  const double curv = kappa2 * (L + alpha * alpha);
  const double limit = 1.0 / curv;
  StepWeights sw;
  double total = 0.0;
  for (std::size_t r = 0; r < eps.size(); ++r) {
    const double e = eps[r];
    if (!(e >= 0.0)) throw PreconditionError("step_weights: negative step size");
    if (cap && e > *cap * (1.0 + 1e-12)) {
      throw PreconditionError("step_weights: step " + std::to_string(r) + " = " +
                              std::to_string(e) + " exceeds R_{alpha,1} = " + std::to_string(*cap));
    }
    if (e > limit * (1.0 + 1e-12)) {
      throw PreconditionError("step_weights: step " + std::to_string(r) +
                              " exceeds 1/(kappa^2 (L + alpha^2))");
    }
    const double c = e * (1.0 - 0.5 * curv * e);
    if (e > 0.0 && !(c >= 0.5 * e * (1.0 - 1e-12) && c < e)) {
      throw PreconditionError("step_weights: eps/2 <= c(eps) < eps fails at step " +
                              std::to_string(r));
    }
    sw.c_values.push_back(c);
    total += c;
  }
  if (!(total > 0.0)) throw PreconditionError("step_weights: all steps are zero");
  for (double c : sw.c_values) sw.pi.push_back(c / total);
  return sw;
}

double finite_particle_bound(double a_tm1, double KL0, double R1, double b_tm1) {
  return a_tm1 + std::sqrt(2.0 * KL0 / (R1 + b_tm1));
}

double a_term(double w0n, double A, double B, double C, double kappa, double L, int d,
              double M0P_inf, double b_tm1, double b_t) {
  return ksd_discretization_value(w0n, A, B, C, kappa, L, d, M0P_inf, b_tm1, b_t);
}

double growth_phi(double w) {
  require_positive(w, "growth_phi: w");
  return std::log(std::log(std::exp(std::numbers::e) + 1.0 / w));
}

double growth_psi(double Bbar, double Cbar, double x, double y, double beta) {
  require_positive(Bbar, "growth_psi: B");
  require_positive(Cbar, "growth_psi: C");
  require_positive(x, "growth_psi: x");
  require_positive(beta, "growth_psi: beta");
  const double inner = std::max(Bbar, std::log(1.0 / x) / beta - y);
  return std::log(inner / Bbar) / Cbar;
}

StepBudget step_budget(double wbar, double Abar, double Bbar, double Cbar) {
  require_positive(wbar, "step_budget: wbar");
  const double phi = growth_phi(wbar);
  const double x1 = wbar * std::sqrt(phi);
  const double x2 = wbar * phi;
  const double y1 = Abar;
  const double y2 = Abar + 2.0 * Cbar;
  StepBudget sb;
  sb.beta1 = std::max(1.0, growth_psi(Bbar, Cbar, x1, y1, 1.0));
  sb.beta2 = std::max(1.0, growth_psi(Bbar, Cbar, x2, y2, 1.0));
  sb.b1 = growth_psi(Bbar, Cbar, x1, y1, sb.beta1);
  sb.b2 = growth_psi(Bbar, Cbar, x2, y2, sb.beta2);
  sb.b = std::min(sb.b1, sb.b2);
  return sb;
}

double rate_rhs(const RateInputs& in) {
  const double root_d = std::pow(static_cast<double>(in.d), 0.25);
  if (in.b == 0.0) {
    return in.kappa * (in.d + in.L) * in.wbar +
           root_d * in.kappa * in.L * std::sqrt(2.0 * in.M0P_inf * in.wbar) +
           std::sqrt(2.0 * in.KL0 / in.R1);
  }
  const double phi = growth_phi(in.wbar);
  const double first =
      (in.kappa * (in.d + in.L) + root_d * in.kappa * in.L * std::sqrt(2.0 * in.M0P_inf)) /
      std::sqrt(phi);
  const double denom_beta = std::max(1.0, growth_psi(in.Bbar, in.Cbar, in.wbar, 0.0, 1.0));
  const double arg =
      (std::log(1.0 / (in.wbar * phi)) / denom_beta - in.Abar - 2.0 * in.Cbar) / in.Bbar;
  if (!(arg > 0.0)) return kInf;
  const double denom = in.R1 + std::log(arg) / in.Cbar;
  if (!(denom > 0.0)) return kInf;
  return first + std::sqrt(2.0 * in.KL0 / denom);
}

double iid_init_bound(double M_Q0, int n, int d, double delta) {
  if (n < 1) throw DomainError("iid_init_bound: n must be at least 1");
  if (!(delta > 0.0 && delta < 1.0) && delta != 1.0) {
    throw DomainError("iid_init_bound: delta must lie in (0, 1]");
  }
  const double nn = static_cast<double>(n);
  const double log_factor = d == 2 ? std::log(nn) : 1.0;
  return M_Q0 * log_factor / (delta * std::pow(nn, 1.0 / std::max(2, d)));
}

void complete_ledger(BoundConstants& bc) {
  const auto pl = pseudo_lipschitz_constants(bc.kappa2, bc.gamma, bc.L, bc.x_star_norm, bc.d);
  bc.c1 = pl.c1;
  bc.c2 = pl.c2;
  const auto g = abc_constants(bc.c1, bc.c2, bc.m_P, bc.m0P_n, bc.m0P_inf, bc.kappa2, bc.L, bc.d);
  bc.A = g.A;
  bc.B = g.B;
  bc.C = g.C;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    bc.R1 = max_step(bc.alpha, bc.kappa2, bc.L, bc.lambda, bc.init_mean_dist_to_xstar, bc.KL0, 1).R;
    bc.R2 = max_step(bc.alpha, bc.kappa2, bc.L, bc.lambda, bc.init_mean_dist_to_xstar, bc.KL0, 2).R;
  } catch (const PreconditionError&) {
    bc.R1 = nan;
    bc.R2 = nan;
  }
}

double ledger_inconsistency(const BoundConstants& bc) {
  BoundConstants fresh = bc;
  complete_ledger(fresh);
  return std::max({std::abs(fresh.c1 - bc.c1), std::abs(fresh.c2 - bc.c2),
                   std::abs(fresh.A - bc.A), std::abs(fresh.B - bc.B), std::abs(fresh.C - bc.C)});
}

}  // namespace svgd
