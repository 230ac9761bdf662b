#pragma once

#include <vector>

#include <Eigen/Dense>

#include "svgd/ensemble.hpp"

namespace svgd {

// Exact 1-Wasserstein distance with Euclidean ground cost.
//   d = 1:                          integral of |F_a - F_b| over sorted atoms
//   d >= 2, equal counts & weights: linear assignment (shortest augmenting path)
//   d >= 2 otherwise:               transportation problem, successive shortest paths
// Throws ContractViolation on dimension mismatch.
double wasserstein1(const ParticleEnsemble& a, const ParticleEnsemble& b);

// Weighted atoms on the line; integrates |F_a - F_b|.
double wasserstein1_sorted_1d(const ParticleEnsemble& a, const ParticleEnsemble& b);

// W1 between a 1-D ensemble and N(mean, sd^2), exact up to the CDF inverse.
double wasserstein1_to_normal_1d(const ParticleEnsemble& a, double mean, double sd);

struct AssignmentResult {
  double cost = 0.0;
  std::vector<int> row_to_col;
};

// Minimum-cost perfect matching for a square cost matrix.
AssignmentResult solve_assignment(const Eigen::MatrixXd& cost);

// Minimum cost of moving `supply` onto `demand` (equal totals within 1e-9)
// along arcs with the given cost matrix. Throws ConvergenceError if the
// augmentation budget is exhausted.
double solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                       const Eigen::MatrixXd& cost);

Eigen::MatrixXd euclidean_cost(const ParticleEnsemble& a, const ParticleEnsemble& b);

}  // namespace svgd
