#pragma once

#include <ostream>
#include <vector>

#include "svgd/ensemble.hpp"
#include "svgd/kernels.hpp"
#include "svgd/targets.hpp"

namespace svgd {

// A continuous 1-D measure carried on nodes: mass weights[i] sits at nodes[i]
// and log_density_values[i] is the log density there. Pushing the measure moves
// nodes and updates densities; weights never change.
struct QuadratureMeasure {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> log_density_values;

  int size() const { return static_cast<int>(nodes.size()); }
  // Throws ContractViolation unless nodes increase strictly, weights are
  // positive and sum to 1, and all three arrays have the same length.
  void validate() const;
};

constexpr int kDefaultQuadratureNodes = 2001;
constexpr double kDescentTolerance = 1e-4;

// Trapezoid quadrature of N(mean, sd^2) on `nodes` uniform points over [lo, hi].
QuadratureMeasure gaussian_quadrature(double mean, double sd, double lo, double hi,
                                      int nodes = kDefaultQuadratureNodes);

// Grid spanning mean +/- 12 sd of the wider of the initial law and the target.
QuadratureMeasure default_quadrature(double init_mean, double init_sd, const Target& target,
                                     int nodes = kDefaultQuadratureNodes);

// d/dx of the transport map x + eps E_mu[s(X) k(X, x) + d_X k(X, x)].
// Throws StepTooLarge if the derivative is not positive.
double transport_jacobian_1d(const QuadratureMeasure& measure, double x, double eps,
                             const Target& target, const KernelSpec& kernel);

// One SVGD round at the measure level with the change-of-variables density
// update log q'(T(x)) = log q(x) - log T'(x).
QuadratureMeasure push_density(const QuadratureMeasure& measure, double eps, const Target& target,
                               const KernelSpec& kernel);

// sum_i w_i (log q_i - log p(x_i)). Values in [-1e-4, 0) are returned as is;
// anything lower throws DiscretizationFailure.
double kl_to_target(const QuadratureMeasure& measure, const Target& target);

// Trapezoid integral of exp(log_density_values) over the (moved) nodes.
double density_mass(const QuadratureMeasure& measure);

ParticleEnsemble to_ensemble(const QuadratureMeasure& measure);

struct DescentReport {
  std::vector<double> kl;       // KL_r, r = 0..t
  std::vector<double> ksd;      // KSD(mu_r || P), r = 0..t
  std::vector<double> slack;    // -c(eps_r) KSD_r^2 - (KL_{r+1} - KL_r), r = 0..t-1
  double worst_slack = 0.0;
  double aggregate_lhs = 0.0;   // sum_r pi_r KSD_r^2
  double aggregate_mid = 0.0;   // KL_0 / sum_r c(eps_r)
  double aggregate_rhs = 0.0;   // 2 KL_0 / sum_r eps_r
  double tolerance = kDescentTolerance;
  bool passed = false;
};

// Checks the per-round KL descent inequality and its averaged form on a
// trajectory mu_0..mu_t produced with steps eps_0..eps_{t-1}; the averaged
// form uses rounds 0..t-1.
DescentReport verify_descent(const std::vector<QuadratureMeasure>& trajectory,
                             const std::vector<double>& eps, const Target& target,
                             const KernelSpec& kernel, double kappa2, double L, double alpha,
                             double tolerance = kDescentTolerance);

// Pushes mu_0 through every step; trajectory[r] = mu_r.
std::vector<QuadratureMeasure> run_density(const QuadratureMeasure& init,
                                           const std::vector<double>& eps, const Target& target,
                                           const KernelSpec& kernel);

// CSV rows: round, node, weight, log_density.
void write_density_header(std::ostream& os);
void write_density_rows(std::ostream& os, int round, const QuadratureMeasure& measure);

}  // namespace svgd
