#include "svgd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "svgd/errors.hpp"

namespace svgd {

namespace {

constexpr double kGridTolerance = 1e-9;

void check_pair(Point x, Point y) {
  if (x.size() != y.size()) {
    throw ContractViolation("kernel: dimension mismatch (" + std::to_string(x.size()) +
                            " vs " + std::to_string(y.size()) + ")");
  }
  if (!all_finite(x) || !all_finite(y)) {
    throw DomainError("kernel: non-finite input");
  }
}

std::string format_point(Point x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j) os << ", ";
    os << x[j];
  }
  os << ")";
  return os.str();
}

// Sup over u >= 0 of 2 u |f'(u)|; bounds |x - y| * |grad_x k(x, y)|.
double closed_form_gamma(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::GaussianRBF:
      return 2.0 / std::exp(1.0);
    case KernelFamily::IMQ: {
      const double beta = spec.imq_exponent;
      return 2.0 * std::pow(1.0 + 1.0 / beta, -beta - 1.0);
    }
  }
  return 0.0;
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::GaussianRBF:
      return "gaussian_rbf";
    case KernelFamily::IMQ:
      return "imq";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian_rbf" || name == "GaussianRBF" || name == "rbf") {
    return KernelFamily::GaussianRBF;
  }
  if (name == "imq" || name == "IMQ") return KernelFamily::IMQ;
  throw ContractViolation("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ContractViolation("kernel bandwidth must be positive and finite");
  }
  if (family == KernelFamily::IMQ && !(imq_exponent > 0.0 && imq_exponent < 1.0)) {
    throw ContractViolation("IMQ exponent must lie in (0, 1)");
  }
}

std::array<double, 5> radial_profile(const KernelSpec& spec, double u) {
  std::array<double, 5> f{};
  switch (spec.family) {
    case KernelFamily::GaussianRBF: {
      const double e = std::exp(-0.5 * u);
      double c = 1.0;
      for (int n = 0; n < 5; ++n) {
        f[n] = c * e;
        c *= -0.5;
      }
      break;
    }
    case KernelFamily::IMQ: {
      const double beta = spec.imq_exponent;
      const double base = 1.0 + u;
      double coeff = 1.0;
      double power = std::pow(base, -beta);
      for (int n = 0; n < 5; ++n) {
        f[n] = coeff * power;
        coeff *= (-beta - n);
        power /= base;
      }
      break;
    }
  }
  return f;
}

KernelTerms kernel_terms(const KernelSpec& spec, Point x, Point y) {
  const double inv_h2 = 1.0 / (spec.bandwidth * spec.bandwidth);
  const double u = squared_distance(x, y) * inv_h2;
  const auto d = static_cast<double>(x.size());
  KernelTerms t;
  switch (spec.family) {
    case KernelFamily::GaussianRBF: {
      // f' = -f/2, f'' = f/4
      t.k = std::exp(-0.5 * u);
      t.grad_scale = -t.k * inv_h2;
      t.cross_trace = (d - u) * t.k * inv_h2;
      break;
    }
    case KernelFamily::IMQ: {
      const double beta = spec.imq_exponent;
      const double base = 1.0 + u;
      t.k = std::pow(base, -beta);
      const double f1 = -beta * t.k / base;
      const double f2 = beta * (beta + 1.0) * t.k / (base * base);
      t.grad_scale = 2.0 * f1 * inv_h2;
      t.cross_trace = -4.0 * f2 * u * inv_h2 - 2.0 * d * f1 * inv_h2;
      break;
    }
  }
  return t;
}

double k_eval(const KernelSpec& spec, Point x, Point y) {
  check_pair(x, y);
  return kernel_terms(spec, x, y).k;
}

Vector k_grad_x(const KernelSpec& spec, Point x, Point y) {
  check_pair(x, y);
  const double scale = kernel_terms(spec, x, y).grad_scale;
  Vector g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = scale * (x[j] - y[j]);
  return g;
}

double k_cross_hess_trace(const KernelSpec& spec, Point x, Point y) {
  check_pair(x, y);
  return kernel_terms(spec, x, y).cross_trace;
}

double mixed_derivative(const KernelSpec& spec, Point x, Point y,
                        const std::vector<int>& multi_index) {
  check_pair(x, y);
  if (multi_index.size() != x.size()) {
    throw ContractViolation("mixed_derivative: multi-index length must equal dimension");
  }
  int order = 0;
  std::vector<std::size_t> axes;
  for (std::size_t j = 0; j < multi_index.size(); ++j) {
    if (multi_index[j] < 0) throw ContractViolation("mixed_derivative: negative multi-index");
    order += multi_index[j];
    for (int c = 0; c < multi_index[j]; ++c) axes.push_back(j);
  }
  if (order > 2) throw ContractViolation("mixed_derivative: only |I| <= 2 is supported");

  // k(x, y) = F(|r|^2) with r = x - y and F^(n)(v) = s^n f^(n)(s v), s = 1/h^2.
  const double s = 1.0 / (spec.bandwidth * spec.bandwidth);
  const double u = squared_distance(x, y) * s;
  const auto f = radial_profile(spec, u);
  std::array<double, 5> F{};
  double sp = 1.0;
  for (int n = 0; n < 5; ++n) {
    F[n] = sp * f[n];
    sp *= s;
  }
  auto r = [&](std::size_t j) { return x[j] - y[j]; };

  if (order == 0) return F[0];
  if (order == 1) {
    const double rj = r(axes[0]);
    return -(2.0 * F[1] + 4.0 * rj * rj * F[2]);
  }
  if (axes[0] == axes[1]) {
    const double r2 = r(axes[0]) * r(axes[0]);
    return 12.0 * F[2] + 48.0 * r2 * F[3] + 16.0 * r2 * r2 * F[4];
  }
  const double ri2 = r(axes[0]) * r(axes[0]);
  const double rj2 = r(axes[1]) * r(axes[1]);
  return 4.0 * F[2] + 8.0 * (ri2 + rj2) * F[3] + 16.0 * ri2 * rj2 * F[4];
}

std::vector<std::vector<int>> multi_indices_up_to_order2(int dim) {
  std::vector<std::vector<int>> out;
  out.emplace_back(dim, 0);
  for (int i = 0; i < dim; ++i) {
    std::vector<int> I(dim, 0);
    I[i] = 1;
    out.push_back(I);
  }
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      std::vector<int> I(dim, 0);
      I[i] += 1;
      I[j] += 1;
      out.push_back(I);
    }
  }
  return out;
}

KernelConstants kernel_constants(const KernelSpec& spec, const std::optional<CheckBox>& check_box) {
  spec.validate();
  const double inv_h2 = 1.0 / (spec.bandwidth * spec.bandwidth);
  const auto f0 = radial_profile(spec, 0.0);
  // At y = x: |I| = 0 gives f(0), |I| = 1 gives -2 f'(0)/h^2, |I| = 2 gives at
  // most 12 f''(0)/h^4 (the mixed i != j case is 4 f''(0)/h^4).
  KernelConstants kc;
  kc.kappa2 = std::max({f0[0], -2.0 * f0[1] * inv_h2, 12.0 * f0[2] * inv_h2 * inv_h2});
  kc.kappa = std::sqrt(kc.kappa2);
  kc.gamma = closed_form_gamma(spec);

  if (!check_box) return kc;

  const CheckBox& box = *check_box;
  if (box.dim < 1 || box.points_per_axis < 2 || !(box.hi > box.lo)) {
    throw ContractViolation("kernel_constants: invalid check box");
  }
  const auto indices = multi_indices_up_to_order2(box.dim);
  const double step = (box.hi - box.lo) / (box.points_per_axis - 1);
  std::vector<double> centre(box.dim, 0.5 * (box.lo + box.hi));
  std::vector<double> corner(box.dim, box.lo);
  const std::array<double, 3> radii{0.1, 1.0, 10.0};

  std::vector<int> counter(box.dim, 0);
  std::vector<double> x(box.dim);
  for (;;) {
    for (int j = 0; j < box.dim; ++j) x[j] = box.lo + step * counter[j];

    for (const auto& I : indices) {
      const double diag = mixed_derivative(spec, x, x, I);
      if (diag > kc.kappa2 + kGridTolerance) {
        throw ConstantViolation("kappa^2 exceeded on the diagonal at x = " + format_point(x));
      }
    }
    for (const auto* anchor : {&centre, &corner}) {
      const Point y(*anchor);
      const KernelTerms t = kernel_terms(spec, x, y);
      if (std::abs(t.k) > kc.kappa2 + kGridTolerance) {
        throw ConstantViolation("|k(x, y)| > kappa^2 at x = " + format_point(x) +
                                ", y = " + format_point(y));
      }
      for (const auto& I : indices) {
        if (std::abs(mixed_derivative(spec, x, y, I)) > kc.kappa2 + kGridTolerance) {
          throw ConstantViolation("|D^I_x D^I_y k(x, y)| > kappa^2 at x = " + format_point(x) +
                                  ", y = " + format_point(y));
        }
      }
      const double dist = std::sqrt(squared_distance(x, y));
      const double grad_norm = std::abs(t.grad_scale) * dist;
      if (grad_norm * dist > kc.gamma + kGridTolerance) {
        throw ConstantViolation("|x - y| |grad_x k| > gamma at x = " + format_point(x) +
                                ", y = " + format_point(y));
      }
      for (double rad : radii) {
        if (dist >= rad && grad_norm > kc.gamma / rad + kGridTolerance) {
          throw ConstantViolation("|grad_x k| > gamma / r at x = " + format_point(x) +
                                  ", y = " + format_point(y));
        }
      }
    }

    int axis = 0;
    while (axis < box.dim && ++counter[axis] == box.points_per_axis) {
      counter[axis] = 0;
      ++axis;
    }
    if (axis == box.dim) break;
  }
  return kc;
}

}  // namespace svgd
