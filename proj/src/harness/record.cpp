#include "svgd/harness/record.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace svgd::harness {

using nlohmann::json;

namespace {

struct Column {
  const char* name;
  double RoundRow::*field;
};

const std::vector<Column>& columns() {
  static const std::vector<Column> cols = {
      {"eps", &RoundRow::eps},
      {"b_prev", &RoundRow::b_prev},
      {"ksd_to_target", &RoundRow::ksd_to_target},
      {"ksd_between", &RoundRow::ksd_between},
      {"w1", &RoundRow::w1},
      {"m_mu", &RoundRow::m_mu},
      {"m_mu_p", &RoundRow::m_mu_p},
      {"M_mu_p", &RoundRow::M_mu_p},
      {"ref_m_mu", &RoundRow::ref_m_mu},
      {"ref_m_mu_p", &RoundRow::ref_m_mu_p},
      {"ref_M_mu_p", &RoundRow::ref_M_mu_p},
      {"kl", &RoundRow::kl},
      {"ksd_surrogate", &RoundRow::ksd_surrogate},
      {"bound_wass", &RoundRow::bound_wass},
      {"bound_ksd", &RoundRow::bound_ksd},
      {"bound_m_prod", &RoundRow::bound_m_prod},
      {"bound_m_exp", &RoundRow::bound_m_exp},
      {"bound_M_prod", &RoundRow::bound_M_prod},
      {"bound_M_exp", &RoundRow::bound_M_exp},
      {"bound_ksd_wass", &RoundRow::bound_ksd_wass},
      {"bound_contraction", &RoundRow::bound_contraction},
      {"w1_next", &RoundRow::w1_next},
      {"bound_displacement", &RoundRow::bound_displacement},
      {"displacement", &RoundRow::displacement},
      {"slack_wass", &RoundRow::slack_wass},
      {"slack_ksd", &RoundRow::slack_ksd},
      {"slack_m_prod", &RoundRow::slack_m_prod},
      {"slack_m_exp", &RoundRow::slack_m_exp},
      {"slack_M_prod", &RoundRow::slack_M_prod},
      {"slack_M_exp", &RoundRow::slack_M_exp},
      {"slack_ksd_wass", &RoundRow::slack_ksd_wass},
      {"slack_contraction", &RoundRow::slack_contraction},
      {"slack_displacement", &RoundRow::slack_displacement},
      {"slack_descent", &RoundRow::slack_descent},
  };
  return cols;
}

}  // namespace

const std::vector<std::string>& round_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out{"round"};
    for (const auto& c : columns()) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void Check::observe(double slack) {
  ++evaluated;
  if (std::isnan(slack)) {
    worst_slack = slack;
    return;
  }
  if (!std::isnan(worst_slack)) worst_slack = std::min(worst_slack, slack);
}

void Check::finish() {
  if (std::isnan(worst_slack)) {
    passed = false;
    return;
  }
  passed = worst_slack >= -tolerance;
}

bool Report::hard_passed() const {
  for (const auto& c : checks) {
    if (c.kind == CheckKind::Hard && !c.passed) return false;
  }
  return true;
}

bool Report::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::string Report::verdict() const {
  if (!hard_passed()) return "FAIL";
  return all_passed() ? "PASS" : "PASS_WITH_SOFT_FAILURES";
}

const Check* Report::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

json Report::to_json() const {
  json out;
  out["verdict"] = verdict();
  out["checks"] = json::array();
  for (const auto& c : checks) {
    json j;
    j["name"] = c.name;
    j["kind"] = c.kind == CheckKind::Hard ? "hard" : "soft";
    j["worst_slack"] = number_json(c.worst_slack);
    j["tolerance"] = c.tolerance;
    j["evaluated"] = c.evaluated;
    j["verdict"] = c.passed ? "pass" : "fail";
    if (!c.detail.empty()) j["detail"] = c.detail;
    out["checks"].push_back(std::move(j));
  }
  return out;
}

json ledger_json(const BoundConstants& bc) {
  json j;
  j["kappa"] = number_json(bc.kappa);
  j["kappa2"] = number_json(bc.kappa2);
  j["gamma"] = number_json(bc.gamma);
  j["L"] = number_json(bc.L);
  j["d"] = bc.d;
  j["x_star_norm"] = number_json(bc.x_star_norm);
  j["lambda"] = number_json(bc.lambda);
  j["m_P"] = number_json(bc.m_P);
  j["M_P"] = number_json(bc.M_P);
  j["c1"] = number_json(bc.c1);
  j["c2"] = number_json(bc.c2);
  j["A"] = number_json(bc.A);
  j["B"] = number_json(bc.B);
  j["C"] = number_json(bc.C);
  j["m0P_n"] = number_json(bc.m0P_n);
  j["m0P_inf"] = number_json(bc.m0P_inf);
  j["M0P_n"] = number_json(bc.M0P_n);
  j["M0P_inf"] = number_json(bc.M0P_inf);
  j["w0n"] = number_json(bc.w0n);
  j["KL0"] = number_json(bc.KL0);
  j["init_mean_dist_to_xstar"] = number_json(bc.init_mean_dist_to_xstar);
  j["alpha"] = number_json(bc.alpha);
  j["R1"] = number_json(bc.R1);
  j["R2"] = number_json(bc.R2);
  return j;
}

json TrajectoryRecord::header_json() const {
  json j;
  j["record_version"] = kRecordVersion;
  j["ledger"] = ledger_json(ledger);
  j["init_seed"] = init_seed;
  j["reference_seed"] = reference_seed;
  j["n"] = n;
  j["n_ref"] = n_ref;
  j["reference_mode"] = reference_mode;
  j["rounds"] = static_cast<int>(steps.size());
  json s = json::array();
  for (double e : steps) s.push_back(number_json(e));
  j["steps"] = std::move(s);
  j["final_step"] = number_json(final_step);
  j["w0n_exact"] = number_json(w0n_exact);
  j["average_ksd"] = number_json(average_ksd);
  j["average_ksd_bound"] = number_json(average_ksd_bound);
  j["min_ksd"] = number_json(min_ksd);
  j["columns"] = round_columns();
  return j;
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec) {
  const auto& names = round_columns();
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
  os << '\n';
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& row : rec.rows) {
    line.str("");
    line << row.round;
    for (const auto& c : columns()) line << ',' << row.*(c.field);
    os << line.str() << '\n';
  }
}

void write_ledger_text(std::ostream& os, const BoundConstants& bc) {
  const json j = ledger_json(bc);
  std::size_t width = 0;
  for (const auto& [k, v] : j.items()) width = std::max(width, k.size());
  const char* order[] = {"kappa", "kappa2", "gamma", "L", "d", "x_star_norm", "lambda", "m_P", "M_P",
                         "c1", "c2", "A", "B", "C", "m0P_n", "m0P_inf", "M0P_n", "M0P_inf", "w0n",
                         "KL0", "init_mean_dist_to_xstar", "alpha", "R1", "R2"};
  std::ostringstream val;
  val << std::setprecision(12);
  for (const char* k : order) {
    const json& v = j.at(k);
    val.str("");
    if (v.is_string()) {
      val << v.get<std::string>();
    } else if (v.is_number_integer()) {
      val << v.get<long>();
    } else {
      val << v.get<double>();
    }
    os << std::left << std::setw(static_cast<int>(width) + 2) << k << val.str() << '\n';
  }
}

}  // namespace svgd::harness
