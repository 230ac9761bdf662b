#pragma once

#include <Eigen/Dense>

#include "svgd/numeric.hpp"

namespace svgd {

// Weighted point cloud mu = sum_i w_i delta_{x_i}. Rows of positions() are
// particles. Weights are fixed for the lifetime of a trajectory; SVGD moves
// mass, it never reweights.
class ParticleEnsemble {
 public:
  using Positions = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  // Throws ContractViolation for n = 0, non-finite positions, negative weights
  // or weights not summing to 1 within 1e-12.
  ParticleEnsemble(Positions positions, Eigen::VectorXd weights, long generation = 0);

  static ParticleEnsemble equal_weights(Positions positions, long generation = 0);
  static ParticleEnsemble from_points(const std::vector<Vector>& points);

  int size() const { return static_cast<int>(positions_.rows()); }
  int dim() const { return static_cast<int>(positions_.cols()); }
  long generation() const { return generation_; }

  Point particle(int i) const {
    return {positions_.data() + static_cast<Eigen::Index>(i) * positions_.cols(),
            static_cast<std::size_t>(positions_.cols())};
  }
  double weight(int i) const { return weights_[i]; }

  const Positions& positions() const { return positions_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  // Same weights, new positions, generation + 1.
  ParticleEnsemble advanced(Positions positions) const;

  // E_mu |x|.
  double mean_norm() const;

 private:
  Positions positions_;
  Eigen::VectorXd weights_;
  long generation_ = 0;
};

}  // namespace svgd
