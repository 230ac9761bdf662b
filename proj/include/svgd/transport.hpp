#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "svgd/ensemble.hpp"
#include "svgd/kernels.hpp"
#include "svgd/targets.hpp"

namespace svgd {

// E_{X~mu}[s_p(X) k(X, x) + grad_X k(X, x)], summed in index order with
// compensated accumulation. Throws NumericOverflow on a non-finite term.
Vector svgd_direction(const ParticleEnsemble& ensemble, Point x, const Target& target,
                      const KernelSpec& kernel);

// One round of the SVGD pushforward: every particle moves to
// x + eps * svgd_direction(ensemble, x). Weights are untouched.
ParticleEnsemble svgd_step(const ParticleEnsemble& ensemble, const Target& target,
                           const KernelSpec& kernel, double eps);

// Called after the initial state (round 0) and after each round.
using RoundObserver = std::function<void(int round, const ParticleEnsemble& state)>;

struct Trajectory {
  std::vector<ParticleEnsemble> states;  // states[r] = mu_r, r = 0..steps.size()
  std::vector<double> steps;
};

// Algorithm loop: applies svgd_step for every eps in steps, in order.
Trajectory run_svgd(const ParticleEnsemble& init, const Target& target, const KernelSpec& kernel,
                    const std::vector<double>& steps,
                    const std::vector<RoundObserver>& observers = {});

// Checkpoint CSV: round, particle_index, x_0..x_{d-1}, weight.
void write_checkpoint_header(std::ostream& os, int dim);
void write_checkpoint_rows(std::ostream& os, int round, const ParticleEnsemble& ensemble);

}  // namespace svgd
