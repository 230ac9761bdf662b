#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "svgd/numeric.hpp"

namespace svgd {

enum class KernelFamily { GaussianRBF, IMQ };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

// Radial base kernel k(x, y) = f(|x - y|^2 / h^2) with f(0) = 1.
//   GaussianRBF: f(u) = exp(-u / 2)
//   IMQ:         f(u) = (1 + u)^(-beta)
struct KernelSpec {
  KernelFamily family = KernelFamily::GaussianRBF;
  double bandwidth = 1.0;
  double imq_exponent = 0.5;  // IMQ only, in (0, 1)

  // Throws ContractViolation on h <= 0 or an IMQ exponent outside (0, 1).
  void validate() const;
};

// f(u), f'(u), f''(u), f'''(u), f''''(u) of the radial profile.
std::array<double, 5> radial_profile(const KernelSpec& spec, double u);

// Everything the SVGD update and the Stein kernel need from one pair:
// k(x, y), grad_x k(x, y) = grad_scale * (x - y), and trace_j d_xj d_yj k(x, y).
struct KernelTerms {
  double k = 0.0;
  double grad_scale = 0.0;
  double cross_trace = 0.0;
};

// Unchecked hot-path evaluation; x and y must have the same size.
KernelTerms kernel_terms(const KernelSpec& spec, Point x, Point y);

double k_eval(const KernelSpec& spec, Point x, Point y);
Vector k_grad_x(const KernelSpec& spec, Point x, Point y);
double k_cross_hess_trace(const KernelSpec& spec, Point x, Point y);

// D^I_x D^I_y k(x, y) for a multi-index with |I| <= 2 (I has one entry per
// coordinate).
double mixed_derivative(const KernelSpec& spec, Point x, Point y,
                        const std::vector<int>& multi_index);

// Every multi-index of length d with total order at most 2.
std::vector<std::vector<int>> multi_indices_up_to_order2(int dim);

struct KernelConstants {
  double kappa = 0.0;   // sup_x D^I_x D^I_y k|_{y=x} <= kappa^2 for |I| <= 2
  double kappa2 = 0.0;
  double gamma = 0.0;   // |grad_x k(x, y)| <= gamma / r whenever |x - y| >= r
};

// Axis-aligned grid [lo, hi]^dim with points_per_axis points per coordinate.
struct CheckBox {
  double lo = -5.0;
  double hi = 5.0;
  int dim = 1;
  int points_per_axis = 10000;
};

// Closed-form constants. With a check box, also verifies them on the grid and
// throws ConstantViolation naming the first offending point.
KernelConstants kernel_constants(const KernelSpec& spec,
                                 const std::optional<CheckBox>& check_box = std::nullopt);

}  // namespace svgd
