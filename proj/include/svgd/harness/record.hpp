#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "svgd/theory.hpp"

namespace svgd::harness {

inline constexpr int kRecordVersion = 1;
inline constexpr double kHardTolerance = 1e-9;
inline constexpr double kSoftTolerance = 1e-4;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One CSV row per round r = 0..t. Transition quantities (contraction,
// displacement, descent) describe the step r -> r+1 and are NaN on the last row.
// Slacks are bound - measured.
struct RoundRow {
  int round = 0;
  double eps = kNaN;
  double b_prev = kNaN;  // b_{r-1}
  double ksd_to_target = kNaN;
  double ksd_between = kNaN;
  double w1 = kNaN;
  double m_mu = kNaN;
  double m_mu_p = kNaN;
  double M_mu_p = kNaN;
  double ref_m_mu = kNaN;
  double ref_m_mu_p = kNaN;
  double ref_M_mu_p = kNaN;
  double kl = kNaN;
  double ksd_surrogate = kNaN;
  double bound_wass = kNaN;
  double bound_ksd = kNaN;
  double bound_m_prod = kNaN;
  double bound_m_exp = kNaN;
  double bound_M_prod = kNaN;
  double bound_M_exp = kNaN;
  double bound_ksd_wass = kNaN;
  double bound_contraction = kNaN;
  double w1_next = kNaN;
  double bound_displacement = kNaN;
  double displacement = kNaN;
  double slack_wass = kNaN;
  double slack_ksd = kNaN;
  double slack_m_prod = kNaN;
  double slack_m_exp = kNaN;
  double slack_M_prod = kNaN;
  double slack_M_exp = kNaN;
  double slack_ksd_wass = kNaN;
  double slack_contraction = kNaN;
  double slack_displacement = kNaN;
  double slack_descent = kNaN;
};

// Column names in output order; "round" first.
const std::vector<std::string>& round_columns();

enum class CheckKind { Hard, Soft };

struct Check {
  std::string name;
  CheckKind kind = CheckKind::Hard;
  double worst_slack = std::numeric_limits<double>::infinity();
  double tolerance = kHardTolerance;
  int evaluated = 0;
  bool passed = true;
  std::string detail;

  // Folds one slack value in.
  void observe(double slack);
  // Sets passed from worst_slack and tolerance.
  void finish();
};

struct Report {
  std::vector<Check> checks;

  bool hard_passed() const;
  bool all_passed() const;
  // PASS, PASS_WITH_SOFT_FAILURES or FAIL.
  std::string verdict() const;
  nlohmann::json to_json() const;
  const Check* find(const std::string& name) const;
};

struct TrajectoryRecord {
  BoundConstants ledger;
  std::uint64_t init_seed = 0;
  std::uint64_t reference_seed = 0;
  int n = 0;
  int n_ref = 0;
  std::string reference_mode;
  std::vector<double> steps;
  double final_step = kNaN;       // eps_t used for the averaged bound
  double w0n_exact = kNaN;        // W1(Q_0^n, Q_0^inf) when available in closed form
  double average_ksd = kNaN;      // sum_r pi_r KSD(Q_r^n || P)
  double average_ksd_bound = kNaN;
  double min_ksd = kNaN;
  std::vector<RoundRow> rows;
  Report report;

  nlohmann::json header_json() const;
};

nlohmann::json ledger_json(const BoundConstants& bc);

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec);

// Aligned "key  value" lines.
void write_ledger_text(std::ostream& os, const BoundConstants& bc);

// Doubles as JSON: non-finite values become strings ("inf", "-inf", "nan").
nlohmann::json number_json(double v);

}  // namespace svgd::harness
