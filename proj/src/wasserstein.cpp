#include "svgd/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "svgd/errors.hpp"

namespace svgd {

namespace {

constexpr double kMassTolerance = 1e-9;
constexpr double kFlowEpsilon = 1e-15;

struct Atom {
  double x;
  double w;
};

std::vector<Atom> sorted_atoms(const ParticleEnsemble& e) {
  std::vector<Atom> atoms(e.size());
  for (int i = 0; i < e.size(); ++i) atoms[i] = {e.particle(i)[0], e.weight(i)};
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& l, const Atom& r) { return l.x < r.x; });
  return atoms;
}

bool equal_uniform_weights(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (a.size() != b.size()) return false;
  const double w = 1.0 / a.size();
  for (int i = 0; i < a.size(); ++i) {
    if (std::abs(a.weight(i) - w) > 1e-15 || std::abs(b.weight(i) - w) > 1e-15) return false;
  }
  return true;
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
// Antiderivative of Phi.
double int_cdf(double z) { return z * std_normal_cdf(z) + std_normal_pdf(z); }

double std_normal_quantile(double c) {
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (std_normal_cdf(mid) < c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Eigen::MatrixXd euclidean_cost(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  Eigen::MatrixXd c(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < b.size(); ++j) c(i, j) = std::sqrt(squared_distance(a.particle(i), b.particle(j)));
  }
  return c;
}

double wasserstein1_sorted_1d(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (a.dim() != 1 || b.dim() != 1) throw ContractViolation("wasserstein1_sorted_1d: need d = 1");
  const auto xa = sorted_atoms(a);
  const auto xb = sorted_atoms(b);
  std::size_t ia = 0, ib = 0;
  double fa = 0.0, fb = 0.0;
  double prev = std::min(xa.front().x, xb.front().x);
  CompensatedSum total;
  while (ia < xa.size() || ib < xb.size()) {
    const double next = (ib >= xb.size() || (ia < xa.size() && xa[ia].x <= xb[ib].x))
                            ? xa[ia].x
                            : xb[ib].x;
    total.add(std::abs(fa - fb) * (next - prev));
    while (ia < xa.size() && xa[ia].x == next) fa += xa[ia++].w;
    while (ib < xb.size() && xb[ib].x == next) fb += xb[ib++].w;
    prev = next;
  }
  return total.value();
}

double wasserstein1_to_normal_1d(const ParticleEnsemble& a, double mean, double sd) {
  if (a.dim() != 1) throw ContractViolation("wasserstein1_to_normal_1d: need d = 1");
  if (!(sd > 0.0)) throw ContractViolation("wasserstein1_to_normal_1d: sd must be positive");
  const auto atoms = sorted_atoms(a);
  auto z = [&](double x) { return (x - mean) / sd; };
  CompensatedSum total;
  // Left tail: F_a = 0.
  total.add(int_cdf(z(atoms.front().x)));
  double level = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    level += atoms[k].w;
    if (k + 1 == atoms.size()) break;
    const double lo = z(atoms[k].x), hi = z(atoms[k + 1].x);
    if (hi <= lo) continue;
    const double c = std::min(level, 1.0);
    const double z0 = std::clamp(std_normal_quantile(c), lo, hi);
    total.add(c * (z0 - lo) - (int_cdf(z0) - int_cdf(lo)));
    total.add((int_cdf(hi) - int_cdf(z0)) - c * (hi - z0));
  }
  // Right tail: F_a = 1, integral of 1 - Phi.
  const double zn = z(atoms.back().x);
  total.add(std_normal_pdf(zn) - zn * (1.0 - std_normal_cdf(zn)));
  return sd * total.value();
}

AssignmentResult solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw ContractViolation("solve_assignment: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // Shortest augmenting path with row/column potentials; 1-based with a
  // dummy column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 < 0 || !std::isfinite(delta)) {
        throw ConvergenceError("solve_assignment: no augmenting path (non-finite costs?)");
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  AssignmentResult res;
  res.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) res.row_to_col[p[j] - 1] = j - 1;
  CompensatedSum total;
  for (int i = 0; i < n; ++i) total.add(cost(i, res.row_to_col[i]));
  res.cost = total.value();
  return res;
}

double solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                       const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(supply.size());
  const int m = static_cast<int>(demand.size());
  if (cost.rows() != n || cost.cols() != m) {
    throw ContractViolation("solve_transport: cost shape does not match marginals");
  }
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any()) {
    throw ContractViolation("solve_transport: negative mass");
  }
  if (std::abs(supply.sum() - demand.sum()) > kMassTolerance) {
    throw ContractViolation("solve_transport: total masses differ");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> rem_s(supply.data(), supply.data() + n);
  std::vector<double> rem_d(demand.data(), demand.data() + m);
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(n, m);

  // Node potentials: sources 0..n-1, sinks n..n+m-1. Reduced arc costs
  // c_ij + pi_i - pi_{n+j} stay nonnegative.
  std::vector<double> pi(n + m, 0.0);
  for (int j = 0; j < m; ++j) pi[n + j] = cost.col(j).minCoeff();

  const long max_iterations = 8L * (n + m) * (n + m) + 100;
  std::vector<double> dist(n + m);
  std::vector<int> parent(n + m);
  std::vector<char> done(n + m);
  for (long iter = 0;; ++iter) {
    if (std::none_of(rem_s.begin(), rem_s.end(), [](double r) { return r > kFlowEpsilon; })) break;
    if (iter >= max_iterations) {
      throw ConvergenceError("solve_transport: augmentation budget exhausted");
    }
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < n; ++i) {
      if (rem_s[i] > kFlowEpsilon) dist[i] = 0.0;
    }
    int sink = -1;
    double sink_dist = inf;
    for (;;) {
      int best = -1;
      double bd = inf;
      for (int v = 0; v < n + m; ++v) {
        if (!done[v] && dist[v] < bd) {
          bd = dist[v];
          best = v;
        }
      }
      if (best < 0) break;
      done[best] = 1;
      if (best >= n && rem_d[best - n] > kFlowEpsilon) {
        sink = best;
        sink_dist = bd;
        break;
      }
      if (best < n) {
        for (int j = 0; j < m; ++j) {
          const int v = n + j;
          if (done[v]) continue;
          const double rc = std::max(0.0, cost(best, j) + pi[best] - pi[v]);
          if (bd + rc < dist[v]) {
            dist[v] = bd + rc;
            parent[v] = best;
          }
        }
      } else {
        const int j = best - n;
        for (int i = 0; i < n; ++i) {
          if (done[i] || flow(i, j) <= kFlowEpsilon) continue;
          const double rc = std::max(0.0, -cost(i, j) + pi[best] - pi[i]);
          if (bd + rc < dist[i]) {
            dist[i] = bd + rc;
            parent[i] = best;
          }
        }
      }
    }
    if (sink < 0) {
      // Only roundoff-level supply left with every demand already met.
      if (std::accumulate(rem_s.begin(), rem_s.end(), 0.0) <= kMassTolerance) break;
      throw ConvergenceError("solve_transport: no augmenting path");
    }
    for (int v = 0; v < n + m; ++v) pi[v] += std::min(dist[v], sink_dist);

    // Bottleneck along the path back to a source with remaining supply.
    double amount = rem_d[sink - n];
    int v = sink;
    while (parent[v] >= 0) {
      const int u = parent[v];
      if (u >= n) amount = std::min(amount, flow(v, u - n));  // backward arc sink u -> source v
      v = u;
    }
    amount = std::min(amount, rem_s[v]);
    const int source = v;
    v = sink;
    while (parent[v] >= 0) {
      const int u = parent[v];
      if (u < n) {
        flow(u, v - n) += amount;
      } else {
        flow(v, u - n) = std::max(0.0, flow(v, u - n) - amount);
      }
      v = u;
    }
    rem_s[source] -= amount;
    rem_d[sink - n] -= amount;
  }
  CompensatedSum total;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (flow(i, j) > 0.0) total.add(flow(i, j) * cost(i, j));
    }
  }
  return total.value();
}

double wasserstein1(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (a.dim() != b.dim()) throw ContractViolation("wasserstein1: dimension mismatch");
  if (std::abs(a.weights().sum() - b.weights().sum()) > kMassTolerance) {
    throw ContractViolation("wasserstein1: total masses differ");
  }
  if (a.dim() == 1) return wasserstein1_sorted_1d(a, b);
  const Eigen::MatrixXd cost = euclidean_cost(a, b);
  if (equal_uniform_weights(a, b)) {
    return solve_assignment(cost).cost / static_cast<double>(a.size());
  }
  return solve_transport(a.weights(), b.weights(), cost);
}

}  // namespace svgd
