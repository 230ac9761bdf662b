#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "svgd/kernels.hpp"
#include "svgd/targets.hpp"

namespace svgd::harness {

enum class StepPolicy { Constant, List, Budget };
enum class ReferenceMode { Ensemble, Quadrature };

struct InitSpec {
  GaussianParams law;  // Q_0^inf
  int n = 64;
  std::uint64_t seed = 1;
};

struct StepSpec {
  StepPolicy policy = StepPolicy::Constant;
  double eps = 1.0 / 30.0;
  int rounds = 50;
  std::vector<double> list;
  double delta = 0.1;  // budget policy: confidence parameter of the i.i.d. estimate
};

struct ReferenceSpec {
  ReferenceMode mode = ReferenceMode::Ensemble;
  int n_ref = 0;  // 0 means 10 * init.n
  std::uint64_t seed = 0;  // 0 means init.seed + 1
  int nodes = 2001;
};

struct SweepSpec {
  std::vector<int> n{16, 64, 256, 1024};
  int repeats = 1;
  double delta = 0.1;
};

struct VerifySpec {
  double wasserstein_check_b_max = 0.25;
  bool descent = true;
  int descent_nodes = 2001;
  int kernel_grid_points = 10000;
  int random_pairs = 200;
  std::uint64_t property_seed = 20240611;
};

struct OutputSpec {
  std::string dir;  // empty: $SVGD_OUTPUT_DIR, else "."
  std::string prefix = "run";
  bool checkpoints = false;
  bool densities = false;
};

struct ExperimentConfig {
  TargetSpec target;
  KernelSpec kernel;
  InitSpec init;
  double alpha = 2.0;
  StepSpec steps;
  ReferenceSpec reference;
  SweepSpec sweep;
  VerifySpec verify;
  OutputSpec output;
  nlohmann::json source;  // the validated document, overrides applied

  int dim() const { return static_cast<int>(init.law.mean.size()); }
  int n_ref() const { return reference.n_ref > 0 ? reference.n_ref : 10 * init.n; }
  std::uint64_t reference_seed() const {
    return reference.seed != 0 ? reference.seed : init.seed + 1;
  }
  std::string output_dir() const;
};

// Throws ConfigError naming the offending key path.
ExperimentConfig parse_config(const nlohmann::json& doc);

// Reads a JSON file and applies "a.b.c=value" overrides in order. The value is
// parsed as JSON when possible, otherwise taken as a string.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

void apply_override(nlohmann::json& doc, const std::string& assignment);

// Explicit step list for the constant and list policies. Throws ConfigError
// for the budget policy, which is resolved by the experiment.
std::vector<double> fixed_steps(const ExperimentConfig& cfg);

}  // namespace svgd::harness
