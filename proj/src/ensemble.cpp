#include "svgd/ensemble.hpp"

#include <cmath>

#include "svgd/errors.hpp"

namespace svgd {

ParticleEnsemble::ParticleEnsemble(Positions positions, Eigen::VectorXd weights, long generation)
    : positions_(std::move(positions)), weights_(std::move(weights)), generation_(generation) {
  if (positions_.rows() < 1 || positions_.cols() < 1) {
    throw ContractViolation("ensemble: need at least one particle of dimension >= 1");
  }
  if (weights_.size() != positions_.rows()) {
    throw ContractViolation("ensemble: weight count does not match particle count");
  }
  if (!positions_.allFinite()) {
    throw ContractViolation("ensemble: non-finite particle position");
  }
  CompensatedSum total;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw ContractViolation("ensemble: weights must be finite and nonnegative");
    }
    total.add(weights_[i]);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw ContractViolation("ensemble: weights must sum to 1");
  }
}

ParticleEnsemble ParticleEnsemble::equal_weights(Positions positions, long generation) {
  const Eigen::Index n = positions.rows();
  if (n < 1) throw ContractViolation("ensemble: need at least one particle");
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return ParticleEnsemble(std::move(positions), std::move(w), generation);
}

ParticleEnsemble ParticleEnsemble::from_points(const std::vector<Vector>& points) {
  if (points.empty()) throw ContractViolation("ensemble: need at least one particle");
  Positions pos(points.size(), points.front().size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != points.front().size()) {
      throw ContractViolation("ensemble: ragged point list");
    }
    for (std::size_t j = 0; j < points[i].size(); ++j) pos(i, j) = points[i][j];
  }
  return equal_weights(std::move(pos));
}

ParticleEnsemble ParticleEnsemble::advanced(Positions positions) const {
  if (positions.rows() != positions_.rows() || positions.cols() != positions_.cols()) {
    throw ContractViolation("ensemble: shape change under pushforward");
  }
  return ParticleEnsemble(std::move(positions), weights_, generation_ + 1);
}

double ParticleEnsemble::mean_norm() const {
  CompensatedSum s;
  for (int i = 0; i < size(); ++i) s.add(weights_[i] * norm2(particle(i)));
  return s.value();
}

}  // namespace svgd
