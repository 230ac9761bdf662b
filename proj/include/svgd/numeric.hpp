#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace svgd {

using Point = std::span<const double>;
using Vector = std::vector<double>;

// Neumaier-compensated running sum. Order of add() calls fixes the result.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double squared_distance(Point x, Point y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = x[j] - y[j];
    s += diff * diff;
  }
  return s;
}

inline double norm2(Point x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline bool all_finite(Point x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// E|c + sigma G| for G standard normal (folded normal mean).
inline double folded_normal_mean(double c, double sigma) {
  if (sigma == 0.0) return std::abs(c);
  const double z = c / (sigma * std::numbers::sqrt2);
  return sigma * std::sqrt(2.0 / std::numbers::pi) * std::exp(-z * z) + c * std::erf(z);
}

// Mean of the chi distribution with k degrees of freedom.
inline double chi_mean(int k) {
  return std::numbers::sqrt2 * std::exp(std::lgamma((k + 1) / 2.0) - std::lgamma(k / 2.0));
}

}  // namespace svgd
