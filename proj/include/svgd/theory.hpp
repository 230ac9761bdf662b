#pragma once

#include <optional>
#include <vector>

namespace svgd {

// Step sizes with prefix sums: before(r) = b_{r-1} = sum_{s<r} eps_s.
class StepSchedule {
 public:
  StepSchedule() : prefix_{0.0} {}
  explicit StepSchedule(std::vector<double> eps);

  static StepSchedule constant(double eps, int rounds);

  int rounds() const { return static_cast<int>(eps_.size()); }
  const std::vector<double>& eps() const { return eps_; }
  double before(int r) const { return prefix_.at(r); }
  double total() const { return prefix_.back(); }

 private:
  std::vector<double> eps_;
  std::vector<double> prefix_;
};

// Values for rounds r = 0..t; saturated[r] marks an overflow clamped to +inf.
struct BoundSequence {
  std::vector<double> values;
  std::vector<char> saturated;
};

struct PseudoLipschitz {
  double c1 = 0.0;
  double c2 = 0.0;
};

// c1 = max(sqrt(d) k2 L, sqrt(d) k2 L |x*| + d k2)
// c2 = k2 L + d k2 + L (gamma + sqrt(d) k2)(1 + |x*|)
PseudoLipschitz pseudo_lipschitz_constants(double kappa2, double gamma, double L,
                                           double x_star_norm, int d);

struct GrowthConstants {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
};

// A = (c1 + c2)(1 + m_P), B = c1 m0P_n + c2 m0P_inf, C = k2 (3L + d).
GrowthConstants abc_constants(double c1, double c2, double m_P, double m0P_n, double m0P_inf,
                              double kappa2, double L, int d);

struct MomentBounds {
  std::vector<double> m_prod;    // m0P prod_{s<r}(1 + eps_s C) + m_P
  std::vector<double> m_exp;     // m0P exp(C b_{r-1}) + m_P
  std::vector<double> mP_prod;   // m0P prod_{s<r}(1 + eps_s C)       (bounds m_{mu_r,P})
  std::vector<double> M_prod;    // M0P prod_{s<r}(1 + eps_s C)^2
  std::vector<double> M_exp;     // M0P exp(2 C b_{r-1})
};

// Moment growth under SVGD for initial coupling moments m0P, M0P.
MomentBounds moment_bound(double m0P, double M0P, double m_P, double C,
                          const StepSchedule& schedule);

// w0n exp(b_{r-1}(A + B exp(C b_{r-1}))), evaluated in log space.
BoundSequence wass_discretization_bound(double w0n, double A, double B, double C,
                                        const StepSchedule& schedule);

// Same expression with b_r in place of b_{r-1}; b_t uses final_step.
BoundSequence wass_discretization_bound_shifted(double w0n, double A, double B, double C,
                                                const StepSchedule& schedule,
                                                double final_step = 0.0);

// kappa (d + L) w0n exp(b (A + B exp(C b_first)))
//   + d^{1/4} kappa L sqrt(2 M0P_inf w0n) exp(b (2C + A + B exp(C b)) / 2)
// with b the outer step sum. Returns +inf on overflow.
double ksd_discretization_value(double w0n, double A, double B, double C, double kappa, double L,
                                int d, double M0P_inf, double b, double b_first);

BoundSequence ksd_discretization_bound(double w0n, double A, double B, double C, double kappa,
                                       double L, int d, double M0P_inf,
                                       const StepSchedule& schedule);

// Right-hand side KSD-W1 bound for one pair of measures:
// kappa (d + L) W + d^{1/4} kappa L sqrt(2 M_nuP W).
double ksd_wasserstein_bound(double w1, double kappa, double L, int d, double M_nuP);

struct StepCap {
  double R = 0.0;
  double curvature_branch = 0.0;  // p / (k2 (L + alpha^2))
  double moment_branch = 0.0;     // (alpha - 1)(1 + L E|X - x*| + 2L sqrt(2 KL / lambda))
};

// R_{alpha,p}. Throws PreconditionError for alpha <= 1, lambda <= 0,
// infinite KL or p outside {1, 2}.
StepCap max_step(double alpha, double kappa2, double L, double lambda,
                 double init_mean_dist_to_xstar, double KL0, int p);

struct StepWeights {
  std::vector<double> c_values;
  std::vector<double> pi;
};

// c(eps) = eps (1 - k2 (L + alpha^2) eps / 2), pi_r = c(eps_r) / sum c.
// Every eps must satisfy eps <= cap (when given) and eps <= 1/(k2 (L + alpha^2)).
StepWeights step_weights(const std::vector<double>& eps, double kappa2, double L, double alpha,
                         std::optional<double> cap = std::nullopt);

// a_{t-1} + sqrt(2 KL0 / (R1 + b_{t-1})).
double finite_particle_bound(double a_tm1, double KL0, double R1, double b_tm1);

// a_{t-1}: the KSD discretization bound at step sum b_{t-1}, with b_t in the
// inner exponential of its first term.
double a_term(double w0n, double A, double B, double C, double kappa, double L, int d,
              double M0P_inf, double b_tm1, double b_t);

// phi(w) = log log(e^e + 1/w).
double growth_phi(double w);
// psi(x, y, beta) = (1/C) log((1/B) max(B, log(1/x)/beta - y)).
double growth_psi(double Bbar, double Cbar, double x, double y, double beta);

struct StepBudget {
  double b = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
};

StepBudget step_budget(double wbar, double Abar, double Bbar, double Cbar);

struct RateInputs {
  double kappa = 0.0;
  double L = 0.0;
  int d = 1;
  double M0P_inf = 0.0;
  double KL0 = 0.0;
  double R1 = 0.0;
  double wbar = 0.0;
  double Abar = 0.0;
  double Bbar = 1.0;
  double Cbar = 1.0;
  double b = 0.0;  // scheduled step sum b_{t-1}
};

// Two-branch bound on min_r KSD(Q_r^n || P). Returns +inf when the
// lower bound on b used by the nonzero branch is not positive enough to make
// the square-root denominator positive.
double rate_rhs(const RateInputs& in);

// M log(n)^{1[d=2]} / (delta n^{1/max(2, d)}).
double iid_init_bound(double M_Q0, int n, int d, double delta);

// Full constant ledger for one experiment.
struct BoundConstants {
  double kappa = 0.0, kappa2 = 0.0, gamma = 0.0;
  double L = 0.0;
  int d = 1;
  double x_star_norm = 0.0;
  double lambda = 0.0;
  double m_P = 0.0, M_P = 0.0;
  double c1 = 0.0, c2 = 0.0;
  double A = 0.0, B = 0.0, C = 0.0;
  double m0P_n = 0.0, m0P_inf = 0.0;
  double M0P_n = 0.0, M0P_inf = 0.0;
  double w0n = 0.0;
  double KL0 = 0.0;
  double init_mean_dist_to_xstar = 0.0;
  double alpha = 2.0;
  double R1 = 0.0, R2 = 0.0;
};

// Fills c1, c2, A, B, C and R1, R2 from the raw fields. R1/R2 are NaN when the
// step cap is undefined (no lambda, infinite KL).
void complete_ledger(BoundConstants& bc);

// Largest absolute difference between stored and recomputed c1, c2, A, B, C.
double ledger_inconsistency(const BoundConstants& bc);

}  // namespace svgd
