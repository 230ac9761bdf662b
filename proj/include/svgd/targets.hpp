#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "svgd/ensemble.hpp"
#include "svgd/numeric.hpp"

namespace svgd {

struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// sum_k w_k N(mean_k, sigma2 I).
struct MixtureParams {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  double sigma2 = 1.0;
};

struct TargetSpec {
  std::variant<GaussianParams, MixtureParams> family;
  // Talagrand T1 constant. Required for mixtures, ignored for Gaussians.
  std::optional<double> lambda_override;

  static TargetSpec gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
  static TargetSpec isotropic_gaussian(int dim, double mean, double variance);
  static TargetSpec mixture(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                            double sigma2, std::optional<double> lambda = std::nullopt);
};

// A normalized density p on R^d with score s_p = grad log p. Also used for the
// Gaussian initial distribution Q_0.
class Target {
 public:
  // Validates: SPD covariance, positive weights summing to 1, common dimension.
  explicit Target(TargetSpec spec);

  int dim() const { return dim_; }
  const TargetSpec& spec() const { return spec_; }
  bool is_gaussian() const { return std::holds_alternative<GaussianParams>(spec_.family); }

  // Unchecked; out must have dim() entries.
  void score_into(Point x, std::span<double> out) const;
  double log_density_unchecked(Point x) const;

  // E_{Z~P} |c - Z|^2, exact.
  double expected_sq_distance(Point c) const;
  // E_{Z~P} |c - Z| in closed form; only for dim() == 1.
  double expected_distance_1d(double c) const;

  // Mean and covariance of P.
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;

  // Draws one sample into out.
  template <class Rng>
  void draw(Rng& rng, std::span<double> out) const;

 private:
  TargetSpec spec_;
  int dim_ = 0;
  // Gaussian
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd chol_lower_;
  double log_norm_ = 0.0;
  // Mixture
  std::vector<double> log_weights_;
};

Vector score(const Target& target, Point x);
double log_density(const Target& target, Point x);

struct TargetConstants {
  double L = 0.0;        // Lipschitz constant of the score
  Vector x_star;         // a zero of the score
  double lambda = 0.0;   // T1 constant; NaN when unavailable
  double m_P = 0.0;      // E_P |Z|
  double M_P = 0.0;      // E_P |Z|^2
  bool m_P_exact = true; // false when m_P is a Monte Carlo estimate
  double m_P_stderr = 0.0;
  double L_grid = std::numeric_limits<double>::quiet_NaN();  // 1-D mixtures: grid max of |s_p'|
};

// Throws ConvergenceError if no zero of the score is found.
TargetConstants target_constants(const Target& target);

// n equal-weight i.i.d. draws, deterministic given seed.
ParticleEnsemble sample(const Target& target, int n, std::uint64_t seed);

// KL(N(m0, S0) || N(m1, S1)).
double gaussian_kl(const GaussianParams& q, const GaussianParams& p);

// E_{X~Q} |X - c| for a Gaussian Q: exact in 1-D and for centred isotropic
// covariance, otherwise a fixed-seed Monte Carlo estimate.
double gaussian_expected_distance(const GaussianParams& q, Point c);

}  // namespace svgd

#include "svgd/targets_impl.hpp"
