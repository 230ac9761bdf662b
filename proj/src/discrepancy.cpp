#include "svgd/discrepancy.hpp"

#include <cmath>
#include <random>

#include "svgd/errors.hpp"

namespace svgd {

namespace {

constexpr double kClampTolerance = 1e-8;

using ScoreMatrix = ParticleEnsemble::Positions;

ScoreMatrix scores_of(const ParticleEnsemble& ens, const Target& target) {
  if (ens.dim() != target.dim()) throw ContractViolation("discrepancy: dimension mismatch");
  ScoreMatrix s(ens.size(), ens.dim());
  for (int i = 0; i < ens.size(); ++i) {
    target.score_into(ens.particle(i), std::span<double>(s.row(i).data(), ens.dim()));
  }
  return s;
}

double stein_terms(const KernelSpec& kernel, Point x, Point y, const double* sx, const double* sy) {
  const KernelTerms t = kernel_terms(kernel, x, y);
  double ss = 0.0, cross = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    ss += sx[j] * sy[j];
    cross += (sy[j] - sx[j]) * (x[j] - y[j]);
  }
  return t.k * ss + t.grad_scale * cross + t.cross_trace;
}

struct QuadForm {
  double value = 0.0;
  double scale = 0.0;  // sum of |w_i w_j k_p|
};

// sum_ij w_i v_j k_p(x_i, y_j); rows reduced in fixed order.
QuadForm cross_form(const KernelSpec& kernel, const ParticleEnsemble& a, const ScoreMatrix& sa,
                    const ParticleEnsemble& b, const ScoreMatrix& sb) {
  CompensatedSum total, scale;
  for (int i = 0; i < a.size(); ++i) {
    CompensatedSum row, row_abs;
    const Point xi = a.particle(i);
    for (int j = 0; j < b.size(); ++j) {
      const double v =
          b.weight(j) * stein_terms(kernel, xi, b.particle(j), sa.row(i).data(), sb.row(j).data());
      row.add(v);
      row_abs.add(std::abs(v));
    }
    total.add(a.weight(i) * row.value());
    scale.add(a.weight(i) * row_abs.value());
  }
  return {total.value(), scale.value()};
}

// sum_ij w_i w_j k_p(x_i, x_j) using symmetry of k_p.
QuadForm self_form(const KernelSpec& kernel, const ParticleEnsemble& a, const ScoreMatrix& sa) {
  CompensatedSum total, scale;
  for (int i = 0; i < a.size(); ++i) {
    const Point xi = a.particle(i);
    const double* si = sa.row(i).data();
    CompensatedSum row, row_abs;
    const double diag = a.weight(i) * stein_terms(kernel, xi, xi, si, si);
    row.add(diag);
    row_abs.add(std::abs(diag));
    for (int j = i + 1; j < a.size(); ++j) {
      const double v =
          2.0 * a.weight(j) * stein_terms(kernel, xi, a.particle(j), si, sa.row(j).data());
      row.add(v);
      row_abs.add(std::abs(v));
    }
    total.add(a.weight(i) * row.value());
    scale.add(a.weight(i) * row_abs.value());
  }
  return {total.value(), scale.value()};
}

double clamped_sqrt(double value, double scale, const char* what) {
  const double tol = kClampTolerance * std::max(1.0, scale);
  if (!std::isfinite(value)) throw NumericalInconsistency(std::string(what) + ": non-finite form");
  if (value < -tol) {
    throw NumericalInconsistency(std::string(what) + ": quadratic form is negative (" +
                                 std::to_string(value) + ")");
  }
  return value > 0.0 ? std::sqrt(value) : 0.0;
}

}  // namespace

double stein_kernel(const SteinKernelContext& ctx, Point x, Point y) {
  if (x.size() != y.size() || static_cast<int>(x.size()) != ctx.target.dim()) {
    throw ContractViolation("stein_kernel: dimension mismatch");
  }
  if (!all_finite(x) || !all_finite(y)) throw DomainError("stein_kernel: non-finite input");
  Vector sx(x.size()), sy(y.size());
  ctx.target.score_into(x, sx);
  ctx.target.score_into(y, sy);
  return stein_terms(ctx.kernel, x, y, sx.data(), sy.data());
}

Eigen::MatrixXd stein_gram(const SteinKernelContext& ctx, const ParticleEnsemble& ens) {
  const ScoreMatrix s = scores_of(ens, ctx.target);
  Eigen::MatrixXd g(ens.size(), ens.size());
  for (int i = 0; i < ens.size(); ++i) {
    for (int j = i; j < ens.size(); ++j) {
      g(i, j) = stein_terms(ctx.kernel, ens.particle(i), ens.particle(j), s.row(i).data(),
                            s.row(j).data());
      g(j, i) = g(i, j);
    }
  }
  return g;
}

double ksd_to_target(const SteinKernelContext& ctx, const ParticleEnsemble& ens) {
  const ScoreMatrix s = scores_of(ens, ctx.target);
  const QuadForm q = self_form(ctx.kernel, ens, s);
  return clamped_sqrt(q.value, q.scale, "ksd_to_target");
}

double ksd_between(const SteinKernelContext& ctx, const ParticleEnsemble& mu,
                   const ParticleEnsemble& nu) {
  if (mu.dim() != nu.dim()) throw ContractViolation("ksd_between: dimension mismatch");
  const ScoreMatrix smu = scores_of(mu, ctx.target);
  const ScoreMatrix snu = scores_of(nu, ctx.target);
  const QuadForm a = self_form(ctx.kernel, mu, smu);
  const QuadForm b = self_form(ctx.kernel, nu, snu);
  const QuadForm c = cross_form(ctx.kernel, mu, smu, nu, snu);
  CompensatedSum total;
  total.add(a.value);
  total.add(-2.0 * c.value);
  total.add(b.value);
  return clamped_sqrt(total.value(), a.scale + 2.0 * c.scale + b.scale, "ksd_between");
}

Moments moments(const ParticleEnsemble& ens, const Target& target, const MomentOptions& opts) {
  if (ens.dim() != target.dim()) throw ContractViolation("moments: dimension mismatch");
  Moments m;
  m.m_mu = ens.mean_norm();
  CompensatedSum second;
  for (int i = 0; i < ens.size(); ++i) {
    second.add(ens.weight(i) * target.expected_sq_distance(ens.particle(i)));
  }
  m.M_mu_p = second.value();

  if (target.dim() == 1) {
    CompensatedSum first;
    for (int i = 0; i < ens.size(); ++i) {
      first.add(ens.weight(i) * target.expected_distance_1d(ens.particle(i)[0]));
    }
    m.m_mu_p = first.value();
    return m;
  }

  // E|X - Z| = E_Z[ sum_i w_i |x_i - Z| ]; the inner sum is exact.
  std::mt19937_64 rng(opts.seed);
  Vector z(target.dim());
  CompensatedSum s, s2;
  for (int k = 0; k < opts.coupling_samples; ++k) {
    target.draw(rng, z);
    CompensatedSum inner;
    for (int i = 0; i < ens.size(); ++i) {
      inner.add(ens.weight(i) * std::sqrt(squared_distance(ens.particle(i), z)));
    }
    const double v = inner.value();
    s.add(v);
    s2.add(v * v);
  }
  const double count = static_cast<double>(opts.coupling_samples);
  m.m_mu_p = s.value() / count;
  const double var = std::max(0.0, s2.value() / count - m.m_mu_p * m.m_mu_p);
  m.m_mu_p_exact = false;
  m.m_mu_p_stderr = std::sqrt(var / count);
  m.precision_warning = m.m_mu_p_stderr > opts.max_stderr;
  return m;
}

}  // namespace svgd
