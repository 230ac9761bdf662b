#include "svgd/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "svgd/errors.hpp"

namespace svgd {

namespace {

constexpr std::uint64_t kMomentSeed = 0x5eed'c0ffee'2024ULL;
constexpr int kMomentSamples = 1'000'000;
constexpr double kRootTolerance = 1e-10;

// Posterior component responsibilities at x, written into resp; returns log p(x).
double mixture_responsibilities(const MixtureParams& m, const std::vector<double>& log_w, Point x,
                                std::vector<double>& resp) {
  const std::size_t K = m.weights.size();
  resp.resize(K);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = x[j] - m.means[k][j];
      d2 += diff * diff;
    }
    resp[k] = log_w[k] - 0.5 * d2 / m.sigma2;
    max_log = std::max(max_log, resp[k]);
  }
  double total = 0.0;
  for (auto& r : resp) {
    r = std::exp(r - max_log);
    total += r;
  }
  for (auto& r : resp) r /= total;
  const double d = static_cast<double>(x.size());
  return max_log + std::log(total) - 0.5 * d * std::log(2.0 * std::numbers::pi * m.sigma2);
}

// Variance of the mixture means under the posterior responsibilities at x (1-D).
double posterior_mean_variance_1d(const MixtureParams& m, const std::vector<double>& log_w,
                                  double x) {
  std::vector<double> resp;
  const double xs[1] = {x};
  mixture_responsibilities(m, log_w, Point(xs, 1), resp);
  double mean = 0.0, second = 0.0;
  for (std::size_t k = 0; k < resp.size(); ++k) {
    mean += resp[k] * m.means[k][0];
    second += resp[k] * m.means[k][0] * m.means[k][0];
  }
  return std::max(0.0, second - mean * mean);
}

double score_1d(const Target& t, double x) {
  double s = 0.0;
  const double xs[1] = {x};
  t.score_into(Point(xs, 1), std::span<double>(&s, 1));
  return s;
}

Vector mixture_root(const Target& target, const MixtureParams& m) {
  const int d = target.dim();
  if (d == 1) {
    double lo = m.means[0][0], hi = m.means[0][0];
    for (const auto& mu : m.means) {
      lo = std::min(lo, mu[0]);
      hi = std::max(hi, mu[0]);
    }
    const double sigma = std::sqrt(m.sigma2);
    lo -= 10.0 * sigma;
    hi += 10.0 * sigma;
    constexpr int kScan = 20001;
    const double step = (hi - lo) / (kScan - 1);
    double a = lo;
    double sa = score_1d(target, a);
    for (int i = 1; i < kScan; ++i) {
      double b = lo + step * i;
      const double sb = score_1d(target, b);
      if (sa == 0.0) return {a};
      if ((sa > 0.0) != (sb > 0.0)) {
        for (int it = 0; it < 200 && b - a > 0.0; ++it) {
          const double mid = 0.5 * (a + b);
          if (mid <= a || mid >= b) break;
          const double sm = score_1d(target, mid);
          if (sm == 0.0) return {mid};
          if ((sm > 0.0) == (sa > 0.0)) {
            a = mid;
            sa = sm;
          } else {
            b = mid;
          }
        }
        const double root = std::abs(sa) <= std::abs(score_1d(target, b)) ? a : b;
        if (std::abs(score_1d(target, root)) > kRootTolerance) {
          throw ConvergenceError("x*: bisection stalled at " + std::to_string(root) +
                                 " with score " + std::to_string(score_1d(target, root)));
        }
        return {root};
      }
      a = b;
      sa = sb;
    }
    throw ConvergenceError("x*: no sign change of the score on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  }

  // Fixed point of x = sum_k resp_k(x) mu_k, started from the mixture mean.
  Eigen::VectorXd x = target.mean();
  std::vector<double> log_w(m.weights.size());
  for (std::size_t k = 0; k < m.weights.size(); ++k) log_w[k] = std::log(m.weights[k]);
  std::vector<double> resp;
  for (int it = 0; it < 100000; ++it) {
    mixture_responsibilities(m, log_w, Point(x.data(), d), resp);
    Eigen::VectorXd next = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < resp.size(); ++k) next += resp[k] * m.means[k];
    const double delta = (next - x).norm();
    x = next;
    if (delta < 1e-15 * (1.0 + x.norm())) break;
  }
  Vector s(d);
  target.score_into(Point(x.data(), d), s);
  if (norm2(s) > kRootTolerance) {
    throw ConvergenceError("x*: fixed-point iteration ended with |score| = " +
                           std::to_string(norm2(s)));
  }
  return Vector(x.data(), x.data() + d);
}

// Monte Carlo E|X| with a fixed seed; returns (mean, stderr).
std::pair<double, double> mc_expected_norm(const Target& t, Point shift) {
  std::mt19937_64 rng(kMomentSeed);
  Vector z(t.dim());
  CompensatedSum s, s2;
  for (int i = 0; i < kMomentSamples; ++i) {
    t.draw(rng, z);
    double r2 = 0.0;
    for (int j = 0; j < t.dim(); ++j) {
      const double diff = z[j] - shift[j];
      r2 += diff * diff;
    }
    const double r = std::sqrt(r2);
    s.add(r);
    s2.add(r * r);
  }
  const double mean = s.value() / kMomentSamples;
  const double var = std::max(0.0, s2.value() / kMomentSamples - mean * mean);
  return {mean, std::sqrt(var / kMomentSamples)};
}

}  // namespace

TargetSpec TargetSpec::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
  return TargetSpec{GaussianParams{std::move(mean), std::move(covariance)}, std::nullopt};
}

TargetSpec TargetSpec::isotropic_gaussian(int dim, double mean, double variance) {
  return gaussian(Eigen::VectorXd::Constant(dim, mean),
                  variance * Eigen::MatrixXd::Identity(dim, dim));
}

TargetSpec TargetSpec::mixture(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                               double sigma2, std::optional<double> lambda) {
  return TargetSpec{MixtureParams{std::move(weights), std::move(means), sigma2}, lambda};
}

Target::Target(TargetSpec spec) : spec_(std::move(spec)) {
  if (const auto* g = std::get_if<GaussianParams>(&spec_.family)) {
    dim_ = static_cast<int>(g->mean.size());
    if (dim_ < 1) throw ContractViolation("target: dimension must be positive");
    if (g->covariance.rows() != dim_ || g->covariance.cols() != dim_) {
      throw ContractViolation("target: covariance shape does not match mean");
    }
    if (!g->mean.allFinite() || !g->covariance.allFinite()) {
      throw ContractViolation("target: non-finite Gaussian parameters");
    }
    if ((g->covariance - g->covariance.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + g->covariance.cwiseAbs().maxCoeff())) {
      throw ContractViolation("target: covariance is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(g->covariance);
    if (llt.info() != Eigen::Success) {
      throw ContractViolation("target: covariance is not positive definite");
    }
    chol_lower_ = llt.matrixL();
    precision_ = llt.solve(Eigen::MatrixXd::Identity(dim_, dim_));
    const double log_det = 2.0 * chol_lower_.diagonal().array().log().sum();
    log_norm_ = -0.5 * (dim_ * std::log(2.0 * std::numbers::pi) + log_det);
    return;
  }
  const auto& m = std::get<MixtureParams>(spec_.family);
  if (m.weights.empty() || m.weights.size() != m.means.size()) {
    throw ContractViolation("target: mixture needs one mean per weight");
  }
  if (!(m.sigma2 > 0.0) || !std::isfinite(m.sigma2)) {
    throw ContractViolation("target: mixture variance must be positive");
  }
  dim_ = static_cast<int>(m.means.front().size());
  if (dim_ < 1) throw ContractViolation("target: dimension must be positive");
  double total = 0.0;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    if (!(m.weights[k] > 0.0)) throw ContractViolation("target: mixture weights must be positive");
    if (m.means[k].size() != dim_ || !m.means[k].allFinite()) {
      throw ContractViolation("target: mixture means must be finite with a common dimension");
    }
    total += m.weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ContractViolation("target: mixture weights must sum to 1");
  if (spec_.lambda_override && !(*spec_.lambda_override > 0.0)) {
    throw ContractViolation("target: lambda_override must be positive");
  }
  log_weights_.resize(m.weights.size());
  for (std::size_t k = 0; k < m.weights.size(); ++k) log_weights_[k] = std::log(m.weights[k]);
}

void Target::score_into(Point x, std::span<double> out) const {
  if (const auto* g = std::get_if<GaussianParams>(&spec_.family)) {
    for (int i = 0; i < dim_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < dim_; ++j) acc -= precision_(i, j) * (x[j] - g->mean[j]);
      out[i] = acc;
    }
    return;
  }
  const auto& m = std::get<MixtureParams>(spec_.family);
  thread_local std::vector<double> resp;
  mixture_responsibilities(m, log_weights_, x, resp);
  for (int j = 0; j < dim_; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < resp.size(); ++k) acc += resp[k] * (m.means[k][j] - x[j]);
    out[j] = acc / m.sigma2;
  }
}

double Target::log_density_unchecked(Point x) const {
  if (const auto* g = std::get_if<GaussianParams>(&spec_.family)) {
    double quad = 0.0;
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        quad += (x[i] - g->mean[i]) * precision_(i, j) * (x[j] - g->mean[j]);
      }
    }
    return log_norm_ - 0.5 * quad;
  }
  std::vector<double> resp;
  return mixture_responsibilities(std::get<MixtureParams>(spec_.family), log_weights_, x, resp);
}

double Target::expected_sq_distance(Point c) const {
  if (const auto* g = std::get_if<GaussianParams>(&spec_.family)) {
    double d2 = 0.0;
    for (int j = 0; j < dim_; ++j) d2 += (c[j] - g->mean[j]) * (c[j] - g->mean[j]);
    return d2 + g->covariance.trace();
  }
  const auto& m = std::get<MixtureParams>(spec_.family);
  double acc = 0.0;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    double d2 = 0.0;
    for (int j = 0; j < dim_; ++j) d2 += (c[j] - m.means[k][j]) * (c[j] - m.means[k][j]);
    acc += m.weights[k] * (d2 + dim_ * m.sigma2);
  }
  return acc;
}

double Target::expected_distance_1d(double c) const {
  if (dim_ != 1) throw ContractViolation("expected_distance_1d: target is not one-dimensional");
  if (const auto* g = std::get_if<GaussianParams>(&spec_.family)) {
    return folded_normal_mean(c - g->mean[0], std::sqrt(g->covariance(0, 0)));
  }
  const auto& m = std::get<MixtureParams>(spec_.family);
  const double sigma = std::sqrt(m.sigma2);
  double acc = 0.0;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    acc += m.weights[k] * folded_normal_mean(c - m.means[k][0], sigma);
  }
  return acc;
}

Eigen::VectorXd Target::mean() const {
  if (const auto* g = std::get_if<GaussianParams>(&spec_.family)) return g->mean;
  const auto& m = std::get<MixtureParams>(spec_.family);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim_);
  for (std::size_t k = 0; k < m.weights.size(); ++k) mu += m.weights[k] * m.means[k];
  return mu;
}

Eigen::MatrixXd Target::covariance() const {
  if (const auto* g = std::get_if<GaussianParams>(&spec_.family)) return g->covariance;
  const auto& m = std::get<MixtureParams>(spec_.family);
  const Eigen::VectorXd mu = mean();
  Eigen::MatrixXd cov = m.sigma2 * Eigen::MatrixXd::Identity(dim_, dim_);
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    const Eigen::VectorXd diff = m.means[k] - mu;
    cov += m.weights[k] * diff * diff.transpose();
  }
  return cov;
}

Vector score(const Target& target, Point x) {
  if (static_cast<int>(x.size()) != target.dim()) {
    throw ContractViolation("score: dimension mismatch");
  }
  if (!all_finite(x)) throw DomainError("score: non-finite input");
  Vector out(target.dim());
  target.score_into(x, out);
  return out;
}

double log_density(const Target& target, Point x) {
  if (static_cast<int>(x.size()) != target.dim()) {
    throw ContractViolation("log_density: dimension mismatch");
  }
  if (!all_finite(x)) throw DomainError("log_density: non-finite input");
  return target.log_density_unchecked(x);
}

TargetConstants target_constants(const Target& target) {
  TargetConstants tc;
  const int d = target.dim();
  if (const auto* g = std::get_if<GaussianParams>(&target.spec().family)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g->covariance);
    const double cov_min = eig.eigenvalues().minCoeff();
    const double cov_max = eig.eigenvalues().maxCoeff();
    tc.L = 1.0 / cov_min;
    tc.lambda = 1.0 / cov_max;
    tc.x_star.assign(g->mean.data(), g->mean.data() + d);
    tc.M_P = g->mean.squaredNorm() + g->covariance.trace();
    const Vector origin(d, 0.0);
    tc.m_P = gaussian_expected_distance(*g, origin);
    const bool centred_isotropic =
        g->mean.isZero(0.0) &&
        (g->covariance - g->covariance(0, 0) * Eigen::MatrixXd::Identity(d, d)).isZero(0.0);
    if (d > 1 && !centred_isotropic) {
      tc.m_P_exact = false;
      tc.m_P_stderr = mc_expected_norm(target, origin).second;
    }
    return tc;
  }

  const auto& m = std::get<MixtureParams>(target.spec().family);
  // -Hess log p = I/sigma2 - Cov_post(mu)/sigma2^2 and the posterior covariance
  // of the means has operator norm at most D^2/4 (D = largest mean gap).
  double gap = 0.0;
  for (std::size_t a = 0; a < m.means.size(); ++a) {
    for (std::size_t b = a + 1; b < m.means.size(); ++b) {
      gap = std::max(gap, (m.means[a] - m.means[b]).norm());
    }
  }
  const double inv_s2 = 1.0 / m.sigma2;
  tc.L = std::max(inv_s2, gap * gap / 4.0 * inv_s2 * inv_s2 - inv_s2);
  if (d == 1) {
    double lo = m.means[0][0], hi = m.means[0][0];
    for (const auto& mu : m.means) {
      lo = std::min(lo, mu[0]);
      hi = std::max(hi, mu[0]);
    }
    const double sigma = std::sqrt(m.sigma2);
    lo -= 10.0 * sigma;
    hi += 10.0 * sigma;
    std::vector<double> log_w(m.weights.size());
    for (std::size_t k = 0; k < m.weights.size(); ++k) log_w[k] = std::log(m.weights[k]);
    double grid_max = 0.0;
    constexpr int kGrid = 20001;
    for (int i = 0; i < kGrid; ++i) {
      const double x = lo + (hi - lo) * i / (kGrid - 1);
      const double deriv = -inv_s2 + posterior_mean_variance_1d(m, log_w, x) * inv_s2 * inv_s2;
      grid_max = std::max(grid_max, std::abs(deriv));
    }
    tc.L_grid = grid_max;
  }
  tc.x_star = mixture_root(target, m);
  tc.lambda = target.spec().lambda_override.value_or(std::numeric_limits<double>::quiet_NaN());

  double m_sum = 0.0, m2_sum = 0.0;
  const double sigma = std::sqrt(m.sigma2);
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    m2_sum += m.weights[k] * (m.means[k].squaredNorm() + d * m.sigma2);
    if (d == 1) m_sum += m.weights[k] * folded_normal_mean(m.means[k][0], sigma);
  }
  tc.M_P = m2_sum;
  if (d == 1) {
    tc.m_P = m_sum;
  } else {
    const Vector origin(d, 0.0);
    const auto [mean, se] = mc_expected_norm(target, origin);
    tc.m_P = mean;
    tc.m_P_exact = false;
    tc.m_P_stderr = se;
  }
  return tc;
}

ParticleEnsemble sample(const Target& target, int n, std::uint64_t seed) {
  if (n < 1) throw ContractViolation("sample: n must be at least 1");
  std::mt19937_64 rng(seed);
  ParticleEnsemble::Positions pos(n, target.dim());
  for (int i = 0; i < n; ++i) {
    target.draw(rng, std::span<double>(pos.row(i).data(), target.dim()));
  }
  return ParticleEnsemble::equal_weights(std::move(pos));
}

double gaussian_kl(const GaussianParams& q, const GaussianParams& p) {
  const auto d = q.mean.size();
  if (p.mean.size() != d) throw ContractViolation("gaussian_kl: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> lp(p.covariance), lq(q.covariance);
  if (lp.info() != Eigen::Success || lq.info() != Eigen::Success) {
    throw ContractViolation("gaussian_kl: covariance is not positive definite");
  }
  const Eigen::MatrixXd p_inv_q = lp.solve(q.covariance);
  const Eigen::VectorXd diff = p.mean - q.mean;
  const double maha = diff.dot(lp.solve(diff));
  const double logdet_p = 2.0 * Eigen::MatrixXd(lp.matrixL()).diagonal().array().log().sum();
  const double logdet_q = 2.0 * Eigen::MatrixXd(lq.matrixL()).diagonal().array().log().sum();
  return 0.5 * (p_inv_q.trace() + maha - static_cast<double>(d) + logdet_p - logdet_q);
}

double gaussian_expected_distance(const GaussianParams& q, Point c) {
  const int d = static_cast<int>(q.mean.size());
  if (d == 1) return folded_normal_mean(q.mean[0] - c[0], std::sqrt(q.covariance(0, 0)));
  Eigen::VectorXd shift(d);
  for (int j = 0; j < d; ++j) shift[j] = q.mean[j] - c[j];
  const double s2 = q.covariance(0, 0);
  if (shift.isZero(0.0) && (q.covariance - s2 * Eigen::MatrixXd::Identity(d, d)).isZero(0.0)) {
    return std::sqrt(s2) * chi_mean(d);
  }
  const Target t(TargetSpec::gaussian(q.mean, q.covariance));
  return mc_expected_norm(t, c).first;
}

}  // namespace svgd
