#include "svgd/density1d.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>

#include "svgd/discrepancy.hpp"
#include "svgd/errors.hpp"

namespace svgd {

namespace {

void require_1d(const Target& target, const char* what) {
  if (target.dim() != 1) throw ContractViolation(std::string(what) + ": target must be 1-D");
}

std::vector<double> node_scores(const QuadratureMeasure& m, const Target& target) {
  std::vector<double> s(m.size());
  for (int i = 0; i < m.size(); ++i) {
    double out = 0.0;
    target.score_into(Point(&m.nodes[i], 1), std::span<double>(&out, 1));
    s[i] = out;
  }
  return s;
}

struct MapValue {
  double direction = 0.0;
  double jacobian = 1.0;
};

// Transport displacement and its x-derivative at x, against the measure's nodes.
MapValue map_at(const QuadratureMeasure& m, const std::vector<double>& scores, double x,
                double eps, const KernelSpec& kernel) {
  CompensatedSum dir, djac;
  const Point px(&x, 1);
  for (int i = 0; i < m.size(); ++i) {
    const Point xi(&m.nodes[i], 1);
    const KernelTerms t = kernel_terms(kernel, xi, px);
    const double w = m.weights[i];
    dir.add(w * (scores[i] * t.k + t.grad_scale * (m.nodes[i] - x)));
    // d/dx k(x_i, x) = grad_scale (x - x_i); d/dx d/dx_i k(x_i, x) = cross_trace.
    djac.add(w * (scores[i] * t.grad_scale * (x - m.nodes[i]) + t.cross_trace));
  }
  return {dir.value(), 1.0 + eps * djac.value()};
}

}  // namespace

void QuadratureMeasure::validate() const {
  if (nodes.empty()) throw ContractViolation("QuadratureMeasure: no nodes");
  if (weights.size() != nodes.size() || log_density_values.size() != nodes.size()) {
    throw ContractViolation("QuadratureMeasure: array lengths differ");
  }
  CompensatedSum total;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0 && !(nodes[i] > nodes[i - 1])) {
      throw ContractViolation("QuadratureMeasure: nodes not strictly increasing at " +
                              std::to_string(i));
    }
    if (!(weights[i] > 0.0)) throw ContractViolation("QuadratureMeasure: nonpositive weight");
    total.add(weights[i]);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw ContractViolation("QuadratureMeasure: weights do not sum to 1");
  }
}

QuadratureMeasure gaussian_quadrature(double mean, double sd, double lo, double hi, int nodes) {
  if (nodes < 2) throw ContractViolation("gaussian_quadrature: need at least 2 nodes");
  if (!(hi > lo)) throw ContractViolation("gaussian_quadrature: empty interval");
  if (!(sd > 0.0)) throw ContractViolation("gaussian_quadrature: sd must be positive");
  QuadratureMeasure m;
  m.nodes.resize(nodes);
  m.weights.resize(nodes);
  m.log_density_values.resize(nodes);
  const double h = (hi - lo) / (nodes - 1);
  const double log_norm = -std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
  CompensatedSum total;
  for (int i = 0; i < nodes; ++i) {
    const double x = lo + h * i;
    const double z = (x - mean) / sd;
    m.nodes[i] = x;
    m.log_density_values[i] = log_norm - 0.5 * z * z;
    const double trap = (i == 0 || i == nodes - 1) ? 0.5 * h : h;
    m.weights[i] = trap * std::exp(m.log_density_values[i]);
    total.add(m.weights[i]);
  }
  // Far-tail nodes can underflow to zero mass; keep them strictly positive.
  const double floor = std::numeric_limits<double>::min();
  CompensatedSum renorm;
  for (double& w : m.weights) {
    w = std::max(w / total.value(), floor);
    renorm.add(w);
  }
  for (double& w : m.weights) w /= renorm.value();
  return m;
}

QuadratureMeasure default_quadrature(double init_mean, double init_sd, const Target& target,
                                     int nodes) {
  require_1d(target, "default_quadrature");
  const double p_mean = target.mean()[0];
  const double p_sd = std::sqrt(target.covariance()(0, 0));
  const double half = 12.0 * std::max(init_sd, p_sd);
  return gaussian_quadrature(init_mean, init_sd, std::min(init_mean, p_mean) - half,
                             std::max(init_mean, p_mean) + half, nodes);
}

double transport_jacobian_1d(const QuadratureMeasure& measure, double x, double eps,
                             const Target& target, const KernelSpec& kernel) {
  require_1d(target, "transport_jacobian_1d");
  const MapValue v = map_at(measure, node_scores(measure, target), x, eps, kernel);
  if (!(v.jacobian > 0.0)) {
    throw StepTooLarge("transport_jacobian_1d: Jacobian " + std::to_string(v.jacobian) +
                       " at x = " + std::to_string(x));
  }
  return v.jacobian;
}

QuadratureMeasure push_density(const QuadratureMeasure& measure, double eps, const Target& target,
                               const KernelSpec& kernel) {
  require_1d(target, "push_density");
  if (!(eps >= 0.0)) throw ContractViolation("push_density: negative step");
  const std::vector<double> scores = node_scores(measure, target);
  QuadratureMeasure next = measure;
  for (int i = 0; i < measure.size(); ++i) {
    const MapValue v = map_at(measure, scores, measure.nodes[i], eps, kernel);
    if (!(v.jacobian > 0.0)) {
      throw StepTooLarge("push_density: Jacobian " + std::to_string(v.jacobian) + " at node " +
                         std::to_string(i));
    }
    next.nodes[i] = measure.nodes[i] + eps * v.direction;
    next.log_density_values[i] = measure.log_density_values[i] - std::log(v.jacobian);
    if (i > 0 && !(next.nodes[i] > next.nodes[i - 1])) {
      throw StepTooLarge("push_density: transport map reorders nodes " + std::to_string(i - 1) +
                         " and " + std::to_string(i));
    }
  }
  return next;
}

double kl_to_target(const QuadratureMeasure& measure, const Target& target) {
  require_1d(target, "kl_to_target");
  CompensatedSum kl;
  for (int i = 0; i < measure.size(); ++i) {
    const double lq = measure.log_density_values[i];
    if (!std::isfinite(lq)) throw DomainError("kl_to_target: non-finite log density");
    kl.add(measure.weights[i] * (lq - target.log_density_unchecked(Point(&measure.nodes[i], 1))));
  }
  if (kl.value() < -kDescentTolerance) {
    throw DiscretizationFailure("kl_to_target: KL = " + std::to_string(kl.value()) +
                                " below tolerance; refine the grid");
  }
  return kl.value();
}

double density_mass(const QuadratureMeasure& measure) {
  CompensatedSum mass;
  for (int i = 0; i + 1 < measure.size(); ++i) {
    const double q0 = std::exp(measure.log_density_values[i]);
    const double q1 = std::exp(measure.log_density_values[i + 1]);
    mass.add(0.5 * (q0 + q1) * (measure.nodes[i + 1] - measure.nodes[i]));
  }
  return mass.value();
}

ParticleEnsemble to_ensemble(const QuadratureMeasure& measure) {
  ParticleEnsemble::Positions pos(measure.size(), 1);
  Eigen::VectorXd w(measure.size());
  for (int i = 0; i < measure.size(); ++i) {
    pos(i, 0) = measure.nodes[i];
    w[i] = measure.weights[i];
  }
  return ParticleEnsemble(std::move(pos), std::move(w));
}

std::vector<QuadratureMeasure> run_density(const QuadratureMeasure& init,
                                           const std::vector<double>& eps, const Target& target,
                                           const KernelSpec& kernel) {
  init.validate();
  std::vector<QuadratureMeasure> traj{init};
  traj.reserve(eps.size() + 1);
  for (double e : eps) traj.push_back(push_density(traj.back(), e, target, kernel));
  return traj;
}

DescentReport verify_descent(const std::vector<QuadratureMeasure>& trajectory,
                             const std::vector<double>& eps, const Target& target,
                             const KernelSpec& kernel, double kappa2, double L, double alpha,
                             double tolerance) {
  if (trajectory.size() != eps.size() + 1) {
    throw ContractViolation("verify_descent: need one more measure than steps");
  }
  DescentReport rep;
  rep.tolerance = tolerance;
  const SteinKernelContext ctx{target, kernel};
  for (const auto& m : trajectory) {
    rep.kl.push_back(kl_to_target(m, target));
    rep.ksd.push_back(ksd_to_target(ctx, to_ensemble(m)));
  }
  const double curv = kappa2 * (L + alpha * alpha);
  rep.worst_slack = std::numeric_limits<double>::infinity();
  CompensatedSum weighted, c_total, eps_total;
  for (std::size_t r = 0; r < eps.size(); ++r) {
    const double c = eps[r] * (1.0 - 0.5 * curv * eps[r]);
    const double k2 = rep.ksd[r] * rep.ksd[r];
    const double s = -c * k2 - (rep.kl[r + 1] - rep.kl[r]);
    rep.slack.push_back(s);
    rep.worst_slack = std::min(rep.worst_slack, s);
    weighted.add(c * k2);
    c_total.add(c);
    eps_total.add(eps[r]);
  }
  if (eps.empty()) {
    rep.worst_slack = 0.0;
    rep.passed = true;
    return rep;
  }
  if (c_total.value() > 0.0) {
    rep.aggregate_lhs = weighted.value() / c_total.value();
    rep.aggregate_mid = rep.kl[0] / c_total.value();
    rep.aggregate_rhs = 2.0 * rep.kl[0] / eps_total.value();
  }
  rep.passed = rep.worst_slack >= -tolerance && rep.aggregate_lhs <= rep.aggregate_mid + tolerance &&
               rep.aggregate_mid <= rep.aggregate_rhs + tolerance;
  return rep;
}

void write_density_header(std::ostream& os) { os << "round,node,weight,log_density\n"; }

void write_density_rows(std::ostream& os, int round, const QuadratureMeasure& measure) {
  os << std::setprecision(17);
  for (int i = 0; i < measure.size(); ++i) {
    os << round << ',' << measure.nodes[i] << ',' << measure.weights[i] << ','
       << measure.log_density_values[i] << '\n';
  }
}

}  // namespace svgd
