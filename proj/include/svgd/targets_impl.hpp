#pragma once

#include <random>

namespace svgd {

template <class Rng>
void Target::draw(Rng& rng, std::span<double> out) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (const auto* g = std::get_if<GaussianParams>(&spec_.family)) {
    Eigen::VectorXd z(dim_);
    for (int j = 0; j < dim_; ++j) z[j] = gauss(rng);
    const Eigen::VectorXd x = g->mean + chol_lower_ * z;
    for (int j = 0; j < dim_; ++j) out[j] = x[j];
    return;
  }
  const auto& m = std::get<MixtureParams>(spec_.family);
  std::discrete_distribution<int> pick(m.weights.begin(), m.weights.end());
  const int k = pick(rng);
  const double sigma = std::sqrt(m.sigma2);
  for (int j = 0; j < dim_; ++j) out[j] = m.means[k][j] + sigma * gauss(rng);
}

}  // namespace svgd
