#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "svgd/ensemble.hpp"
#include "svgd/kernels.hpp"
#include "svgd/targets.hpp"

namespace svgd {

// Base kernel with the Langevin Stein operator applied in both arguments.
struct SteinKernelContext {
  const Target& target;
  KernelSpec kernel;
};

// k_p(x, y) = <s(x), s(y)> k + <s(x), grad_y k> + <s(y), grad_x k> + sum_j d_xj d_yj k.
double stein_kernel(const SteinKernelContext& ctx, Point x, Point y);

// Gram matrix [k_p(x_i, x_j)] over the particles of an ensemble.
Eigen::MatrixXd stein_gram(const SteinKernelContext& ctx, const ParticleEnsemble& ens);

// sqrt(sum_ij w_i w_j k_p(x_i, x_j)) (V-statistic). Throws
// NumericalInconsistency when the quadratic form is below -1e-8 (relative).
double ksd_to_target(const SteinKernelContext& ctx, const ParticleEnsemble& ens);

// sqrt(Q(mu, mu) - 2 Q(mu, nu) + Q(nu, nu)) with Q the weighted double sum of k_p.
double ksd_between(const SteinKernelContext& ctx, const ParticleEnsemble& mu,
                   const ParticleEnsemble& nu);

struct MomentOptions {
  int coupling_samples = 200000;  // Monte Carlo draws from P when dim > 1
  std::uint64_t seed = 7;
  double max_stderr = 1e-3;
};

struct Moments {
  double m_mu = 0.0;       // E_mu |X|
  double m_mu_p = 0.0;     // E |X - Z|,   X ~ mu independent of Z ~ P
  double M_mu_p = 0.0;     // E |X - Z|^2
  bool m_mu_p_exact = true;
  double m_mu_p_stderr = 0.0;
  bool precision_warning = false;
};

// m_mu exact; M_{mu,P} exact; m_{mu,P} in closed form for 1-D targets and by
// Monte Carlo over P otherwise.
Moments moments(const ParticleEnsemble& ens, const Target& target, const MomentOptions& opts = {});

}  // namespace svgd
