#include "svgd/transport.hpp"

#include <cmath>
#include <iomanip>

#include "svgd/errors.hpp"

namespace svgd {

namespace {

using ScoreMatrix = ParticleEnsemble::Positions;

ScoreMatrix all_scores(const ParticleEnsemble& ens, const Target& target) {
  ScoreMatrix s(ens.size(), ens.dim());
  for (int i = 0; i < ens.size(); ++i) {
    target.score_into(ens.particle(i), std::span<double>(s.row(i).data(), ens.dim()));
  }
  return s;
}

void direction_into(const ParticleEnsemble& ens, const ScoreMatrix& scores, Point x,
                    const KernelSpec& kernel, std::span<double> out, long round) {
  const int d = ens.dim();
  thread_local std::vector<CompensatedSum> acc;
  acc.assign(d, CompensatedSum{});
  for (int i = 0; i < ens.size(); ++i) {
    const Point xi = ens.particle(i);
    const KernelTerms t = kernel_terms(kernel, xi, x);
    const double w = ens.weight(i);
    for (int j = 0; j < d; ++j) {
      const double term = w * (scores(i, j) * t.k + t.grad_scale * (xi[j] - x[j]));
      if (!std::isfinite(term)) {
        throw NumericOverflow("svgd_direction: non-finite term", round, i);
      }
      acc[j].add(term);
    }
  }
  for (int j = 0; j < d; ++j) out[j] = acc[j].value();
}

}  // namespace

Vector svgd_direction(const ParticleEnsemble& ensemble, Point x, const Target& target,
                      const KernelSpec& kernel) {
  if (static_cast<int>(x.size()) != ensemble.dim() || target.dim() != ensemble.dim()) {
    throw ContractViolation("svgd_direction: dimension mismatch");
  }
  if (!all_finite(x)) throw DomainError("svgd_direction: non-finite query point");
  const ScoreMatrix scores = all_scores(ensemble, target);
  Vector out(ensemble.dim());
  direction_into(ensemble, scores, x, kernel, out, ensemble.generation());
  return out;
}

ParticleEnsemble svgd_step(const ParticleEnsemble& ensemble, const Target& target,
                           const KernelSpec& kernel, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw ContractViolation("svgd_step: step size must be finite and nonnegative");
  }
  if (target.dim() != ensemble.dim()) throw ContractViolation("svgd_step: dimension mismatch");
  const int n = ensemble.size();
  const int d = ensemble.dim();
  const ScoreMatrix scores = all_scores(ensemble, target);
  ParticleEnsemble::Positions next = ensemble.positions();
  Vector dir(d);
  // Each particle reads the frozen snapshot `ensemble`; rows are independent.
  for (int i = 0; i < n; ++i) {
    direction_into(ensemble, scores, ensemble.particle(i), kernel, dir, ensemble.generation());
    for (int j = 0; j < d; ++j) {
      next(i, j) += eps * dir[j];
      if (!std::isfinite(next(i, j))) {
        throw NumericOverflow("svgd_step: non-finite position", ensemble.generation(), i);
      }
    }
  }
  return ensemble.advanced(std::move(next));
}

Trajectory run_svgd(const ParticleEnsemble& init, const Target& target, const KernelSpec& kernel,
                    const std::vector<double>& steps, const std::vector<RoundObserver>& observers) {
  kernel.validate();
  for (double eps : steps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
      throw ContractViolation("run_svgd: step sizes must be finite and nonnegative");
    }
  }
  Trajectory traj;
  traj.steps = steps;
  traj.states.reserve(steps.size() + 1);
  traj.states.push_back(init);
  for (const auto& obs : observers) obs(0, traj.states.back());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    traj.states.push_back(svgd_step(traj.states.back(), target, kernel, steps[s]));
    for (const auto& obs : observers) obs(static_cast<int>(s) + 1, traj.states.back());
  }
  return traj;
}

void write_checkpoint_header(std::ostream& os, int dim) {
  os << "round,particle_index";
  for (int j = 0; j < dim; ++j) os << ",x_" << j;
  os << ",weight\n";
}

void write_checkpoint_rows(std::ostream& os, int round, const ParticleEnsemble& ensemble) {
  const auto old_precision = os.precision(17);
  for (int i = 0; i < ensemble.size(); ++i) {
    os << round << ',' << i;
    for (double v : ensemble.particle(i)) os << ',' << v;
    os << ',' << ensemble.weight(i) << '\n';
  }
  os.precision(old_precision);
}

}  // namespace svgd
