#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "svgd/ensemble.hpp"
#include "svgd/harness/config.hpp"
#include "svgd/harness/record.hpp"
#include "svgd/kernels.hpp"
#include "svgd/targets.hpp"
#include "svgd/theory.hpp"

namespace svgd::harness {

// Quantities of the initial law Q_0^inf (a Gaussian) against the target.
struct LawConstants {
  double m0P = 0.0;               // E|X - Z|, X ~ Q_0^inf, Z ~ P
  double M0P = 0.0;               // E|X - Z|^2
  double second_moment = 0.0;     // E|X|^2
  double KL0 = 0.0;               // KL(Q_0^inf || P); +inf when unavailable
  double mean_dist_to_xstar = 0.0;
};

LawConstants law_constants(const GaussianParams& init, const Target& target,
                           const TargetConstants& tc);

// Realized initial measures and the constant ledger for one configuration.
struct Setup {
  Target target;
  KernelConstants kc;
  TargetConstants tc;
  LawConstants law;
  ParticleEnsemble init;       // Q_0^n
  ParticleEnsemble reference;  // reference ensemble or quadrature nodes
  BoundConstants ledger;       // for the pair (Q_0^n, reference)
  double w0n_law = kNaN;       // W1(Q_0^n, Q_0^inf); 1-D only
  double B_law = kNaN;         // B with m_{Q_0^inf,P} in place of the reference moment
};

// Builds the setup; n and seed default to the config values. The reference is
// skipped (a copy of init) when with_reference is false.
Setup prepare(const ExperimentConfig& cfg, bool with_reference = true);

// Budget-scheduled steps: wbar from the i.i.d. estimate, b from step_budget,
// t = ceil(b / R1) equal steps of size b / t (t = 0 when b = 0).
struct BudgetSchedule {
  double wbar = 0.0;
  StepBudget budget;
  std::vector<double> steps;
};
BudgetSchedule budget_schedule(const Setup& s, int n, double delta);

std::vector<double> resolve_steps(const ExperimentConfig& cfg, const Setup& s);

struct RunOptions {
  std::optional<std::string> output_dir;  // write CSV/JSON outputs when set
  bool descent = true;                    // density-tracking checks (1-D only)
};

// Finite-n run and reference run on a shared schedule plus every bound check.
TrajectoryRecord run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct SweepRow {
  int n = 0;
  int repeat = 0;
  std::uint64_t seed = 0;
  double wbar = kNaN;
  double w0n_exact = kNaN;
  double b = kNaN;
  int rounds = 0;
  double eps = kNaN;
  double min_ksd = kNaN;
  double rate_rhs = kNaN;
  bool bound_holds = false;
  bool wbar_covers = false;  // wbar >= exact W1(Q_0^n, Q_0^inf)
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  Report report;
};

SweepResult sweep_n(const ExperimentConfig& cfg, const std::vector<int>& n_list, int repeats);

void write_sweep_csv(std::ostream& os, const SweepResult& res);

// Property suites plus every trajectory check of run_experiment.
Report verify_suite(const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace svgd::harness
