#include "svgd/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "svgd/density1d.hpp"
#include "svgd/discrepancy.hpp"
#include "svgd/errors.hpp"
#include "svgd/transport.hpp"
#include "svgd/wasserstein.hpp"

namespace svgd::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sd_1d(const GaussianParams& g) { return std::sqrt(g.covariance(0, 0)); }

GaussianParams difference_law(const GaussianParams& init, const Eigen::VectorXd& mean,
                              const Eigen::MatrixXd& cov) {
  return {init.mean - mean, init.covariance + cov};
}

double max_displacement(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::sqrt(squared_distance(a.particle(i), b.particle(i))));
  }
  return worst;
}

Check make_check(std::string name, CheckKind kind, double tol) {
  Check c;
  c.name = std::move(name);
  c.kind = kind;
  c.tolerance = tol;
  return c;
}

Check failed_check(std::string name, CheckKind kind, double tol, std::string detail) {
  Check c = make_check(std::move(name), kind, tol);
  c.worst_slack = -kInf;
  c.evaluated = 0;
  c.passed = false;
  c.detail = std::move(detail);
  return c;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

ParticleEnsemble random_measure(std::mt19937_64& rng, int d, int max_n, double spread) {
  std::uniform_int_distribution<int> size(1, max_n);
  std::normal_distribution<double> normal(0.0, spread);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution weighted(0.5);
  const int n = size(rng);
  ParticleEnsemble::Positions pos(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) pos(i, j) = normal(rng);
  }
  if (!weighted(rng)) return ParticleEnsemble::equal_weights(std::move(pos));
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = expo(rng) + 1e-3;
  w /= w.sum();
  return ParticleEnsemble(std::move(pos), std::move(w));
}

}  // namespace

LawConstants law_constants(const GaussianParams& init, const Target& target,
                           const TargetConstants& tc) {
  LawConstants lc;
  const int d = static_cast<int>(init.mean.size());
  lc.second_moment = init.covariance.trace() + init.mean.squaredNorm();
  lc.M0P = lc.second_moment - 2.0 * init.mean.dot(target.mean()) + tc.M_P;
  const Vector origin(d, 0.0);
  if (const auto* g = std::get_if<GaussianParams>(&target.spec().family)) {
    lc.m0P = gaussian_expected_distance(difference_law(init, g->mean, g->covariance), origin);
    lc.KL0 = gaussian_kl(init, *g);
  } else {
    const auto& m = std::get<MixtureParams>(target.spec().family);
    const Eigen::MatrixXd comp_cov = m.sigma2 * Eigen::MatrixXd::Identity(d, d);
    CompensatedSum acc;
    for (std::size_t k = 0; k < m.weights.size(); ++k) {
      acc.add(m.weights[k] *
              gaussian_expected_distance(difference_law(init, m.means[k], comp_cov), origin));
    }
    lc.m0P = acc.value();
    if (d == 1) {
      const QuadratureMeasure q = default_quadrature(init.mean[0], sd_1d(init), target);
      lc.KL0 = std::max(0.0, kl_to_target(q, target));
    } else {
      lc.KL0 = kInf;
    }
  }
  Vector xs(tc.x_star.begin(), tc.x_star.end());
  lc.mean_dist_to_xstar = gaussian_expected_distance(init, xs);
  return lc;
}

Setup prepare(const ExperimentConfig& cfg, bool with_reference) {
  Target target(cfg.target);
  const KernelConstants kc = kernel_constants(cfg.kernel);
  const TargetConstants tc = target_constants(target);
  const Target init_law(TargetSpec::gaussian(cfg.init.law.mean, cfg.init.law.covariance));
  ParticleEnsemble init = sample(init_law, cfg.init.n, cfg.init.seed);
  const LawConstants law = law_constants(cfg.init.law, target, tc);

  ParticleEnsemble reference = init;
  if (with_reference) {
    if (cfg.reference.mode == ReferenceMode::Ensemble) {
      reference = sample(init_law, cfg.n_ref(), cfg.reference_seed());
    } else {
      reference = to_ensemble(default_quadrature(cfg.init.law.mean[0], sd_1d(cfg.init.law), target,
                                                 cfg.reference.nodes));
    }
  }

  BoundConstants bc;
  bc.kappa = kc.kappa;
  bc.kappa2 = kc.kappa2;
  bc.gamma = kc.gamma;
  bc.L = tc.L;
  bc.d = target.dim();
  bc.x_star_norm = norm2(tc.x_star);
  bc.lambda = tc.lambda;
  bc.m_P = tc.m_P;
  bc.M_P = tc.M_P;
  const Moments m_init = moments(init, target);
  const Moments m_ref = moments(reference, target);
  bc.m0P_n = m_init.m_mu_p;
  bc.M0P_n = m_init.M_mu_p;
  bc.m0P_inf = m_ref.m_mu_p;
  bc.M0P_inf = m_ref.M_mu_p;
  bc.w0n = wasserstein1(init, reference);
  bc.KL0 = law.KL0;
  bc.init_mean_dist_to_xstar = law.mean_dist_to_xstar;
  bc.alpha = cfg.alpha;
  complete_ledger(bc);

  Setup s{std::move(target), kc, tc, law, std::move(init), std::move(reference), bc};
  if (bc.d == 1) {
    s.w0n_law = wasserstein1_to_normal_1d(s.init, cfg.init.law.mean[0], sd_1d(cfg.init.law));
  }
  s.B_law = bc.c1 * bc.m0P_n + bc.c2 * law.m0P;
  return s;
}

BudgetSchedule budget_schedule(const Setup& s, int n, double delta) {
  BudgetSchedule out;
  const BoundConstants& bc = s.ledger;
  out.wbar = iid_init_bound(s.law.second_moment, n, bc.d, delta);
  out.budget = step_budget(out.wbar, bc.A, s.B_law, bc.C);
  if (out.budget.b > 0.0) {
    if (!(bc.R1 > 0.0)) throw PreconditionError("budget schedule: R_{alpha,1} is undefined");
    const int t = static_cast<int>(std::ceil(out.budget.b / bc.R1));
    out.steps.assign(t, out.budget.b / t);
  }
  return out;
}

std::vector<double> resolve_steps(const ExperimentConfig& cfg, const Setup& s) {
  if (cfg.steps.policy == StepPolicy::Budget) {
    return budget_schedule(s, cfg.init.n, cfg.steps.delta).steps;
  }
  return fixed_steps(cfg);
}

TrajectoryRecord run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const Setup s = prepare(cfg, true);
  const BoundConstants& bc = s.ledger;
  const std::vector<double> steps = resolve_steps(cfg, s);
  const int t = static_cast<int>(steps.size());
  const StepSchedule sched(steps);
  const int d = bc.d;

  const Trajectory fin = run_svgd(s.init, s.target, cfg.kernel, steps);
  const Trajectory ref = run_svgd(s.reference, s.target, cfg.kernel, steps);
  const SteinKernelContext ctx{s.target, cfg.kernel};

  MomentOptions mopts;
  if (d > 1) mopts.coupling_samples = 20000;

  const MomentBounds mb_fin = moment_bound(bc.m0P_n, bc.M0P_n, bc.m_P, bc.C, sched);
  const MomentBounds mb_ref = moment_bound(bc.m0P_inf, bc.M0P_inf, bc.m_P, bc.C, sched);
  const BoundSequence wb = wass_discretization_bound(bc.w0n, bc.A, bc.B, bc.C, sched);
  const BoundSequence kb =
      ksd_discretization_bound(bc.w0n, bc.A, bc.B, bc.C, bc.kappa, bc.L, d, bc.M0P_inf, sched);

  TrajectoryRecord rec;
  rec.ledger = bc;
  rec.init_seed = cfg.init.seed;
  rec.reference_seed = cfg.reference.mode == ReferenceMode::Ensemble ? cfg.reference_seed() : 0;
  rec.n = cfg.init.n;
  rec.n_ref = s.reference.size();
  rec.reference_mode = cfg.reference.mode == ReferenceMode::Ensemble ? "ensemble" : "quadrature";
  rec.steps = steps;
  rec.final_step = bc.R1;
  rec.w0n_exact = s.w0n_law;

  // Moments carry Monte Carlo error in d > 1; widen the tolerance accordingly.
  const bool exact_moments = d == 1;
  double moment_stderr = 0.0;

  std::vector<Moments> mf, mr;
  std::vector<double> w1(t + 1);
  for (int r = 0; r <= t; ++r) {
    mf.push_back(moments(fin.states[r], s.target, mopts));
    mr.push_back(moments(ref.states[r], s.target, mopts));
    moment_stderr = std::max({moment_stderr, mf.back().m_mu_p_stderr, mr.back().m_mu_p_stderr});
    w1[r] = wasserstein1(fin.states[r], ref.states[r]);
  }
  const CheckKind moment_kind = exact_moments ? CheckKind::Hard : CheckKind::Soft;
  const double moment_tol = exact_moments ? kHardTolerance : std::max(kSoftTolerance, 4.0 * moment_stderr);

  Check step_cap = make_check("step_cap", CheckKind::Hard, kHardTolerance);
  Check ledger = make_check("ledger_consistency", CheckKind::Hard, kHardTolerance);
  Check contraction = make_check("pseudo_lipschitz_contraction", moment_kind, moment_tol);
  Check displacement = make_check("displacement", moment_kind, moment_tol);
  Check growth_prod = make_check("moment_growth_product", moment_kind, moment_tol);
  Check growth_exp = make_check("moment_growth_exp", moment_kind, moment_tol);
  Check wass_disc = make_check("wasserstein_discretization", CheckKind::Hard, kHardTolerance);
  Check ksd_disc = make_check("ksd_discretization", CheckKind::Hard, kHardTolerance);
  Check ksd_wass = make_check("ksd_wasserstein", CheckKind::Hard, kHardTolerance);

  ledger.observe(0.0 - ledger_inconsistency(bc));

  for (int r = 0; r <= t; ++r) {
    RoundRow row;
    row.round = r;
    row.eps = r < t ? steps[r] : kNaN;
    row.b_prev = sched.before(r);
    const ParticleEnsemble& mu = fin.states[r];
    const ParticleEnsemble& nu = ref.states[r];
    row.ksd_to_target = ksd_to_target(ctx, mu);
    row.ksd_between = ksd_between(ctx, mu, nu);
    row.w1 = w1[r];
    row.m_mu = mf[r].m_mu;
    row.m_mu_p = mf[r].m_mu_p;
    row.M_mu_p = mf[r].M_mu_p;
    row.ref_m_mu = mr[r].m_mu;
    row.ref_m_mu_p = mr[r].m_mu_p;
    row.ref_M_mu_p = mr[r].M_mu_p;

    row.bound_wass = wb.values[r];
    row.slack_wass = row.bound_wass - row.w1;
    if (row.b_prev <= cfg.verify.wasserstein_check_b_max) wass_disc.observe(row.slack_wass);
    row.bound_ksd = kb.values[r];
    row.slack_ksd = row.bound_ksd - row.ksd_between;
    ksd_disc.observe(row.slack_ksd);

    row.bound_m_prod = mb_fin.m_prod[r];
    row.bound_m_exp = mb_fin.m_exp[r];
    row.bound_M_prod = mb_fin.M_prod[r];
    row.bound_M_exp = mb_fin.M_exp[r];
    row.slack_m_prod = row.bound_m_prod - row.m_mu;
    row.slack_m_exp = row.bound_m_exp - row.m_mu;
    row.slack_M_prod = row.bound_M_prod - row.M_mu_p;
    row.slack_M_exp = row.bound_M_exp - row.M_mu_p;
    growth_prod.observe(row.slack_m_prod);
    growth_prod.observe(row.slack_M_prod);
    growth_prod.observe(mb_ref.m_prod[r] - mr[r].m_mu);
    growth_prod.observe(mb_ref.M_prod[r] - mr[r].M_mu_p);
    growth_exp.observe(row.slack_m_exp);
    growth_exp.observe(row.slack_M_exp);
    growth_exp.observe(mb_ref.m_exp[r] - mr[r].m_mu);
    growth_exp.observe(mb_ref.M_exp[r] - mr[r].M_mu_p);

    row.bound_ksd_wass = ksd_wasserstein_bound(row.w1, bc.kappa, bc.L, d, mr[r].M_mu_p);
    row.slack_ksd_wass = row.bound_ksd_wass - row.ksd_between;
    ksd_wass.observe(row.slack_ksd_wass);

    if (r < t) {
      const double eps = steps[r];
      const double c = bc.c1 * (1.0 + mf[r].m_mu) + bc.c2 * (1.0 + mr[r].m_mu);
      row.w1_next = w1[r + 1];
      row.bound_contraction = (1.0 + eps * c) * w1[r];
      row.slack_contraction = row.bound_contraction - row.w1_next;
      contraction.observe(row.slack_contraction);
      row.displacement = max_displacement(mu, fin.states[r + 1]);
      row.bound_displacement = eps * bc.C * mf[r].m_mu_p;
      row.slack_displacement = row.bound_displacement - row.displacement;
      displacement.observe(row.slack_displacement);
      displacement.observe(eps * bc.C * mr[r].m_mu_p - max_displacement(nu, ref.states[r + 1]));
    }
    rec.rows.push_back(row);
  }

  rec.min_ksd = kInf;
  for (const auto& row : rec.rows) rec.min_ksd = std::min(rec.min_ksd, row.ksd_to_target);

  // Averaged bound for the finite run, with eps_t = R_{alpha,1} appended.
  Check averaged = make_check("finite_particle_average", CheckKind::Soft, kSoftTolerance);
  const double max_eps = steps.empty() ? 0.0 : *std::max_element(steps.begin(), steps.end());
  if (!(bc.R1 > 0.0)) {
    step_cap = failed_check("step_cap", CheckKind::Hard, kHardTolerance,
                            "R_{alpha,1} undefined (no T1 constant or infinite KL)");
    averaged = failed_check("finite_particle_average", CheckKind::Soft, kSoftTolerance,
                            "R_{alpha,1} undefined");
  } else {
    step_cap.observe(bc.R1 - max_eps);
    std::vector<double> with_final = steps;
    with_final.push_back(bc.R1);
    try {
      const StepWeights sw = step_weights(with_final, bc.kappa2, bc.L, bc.alpha, bc.R1);
      CompensatedSum lhs;
      for (int r = 0; r <= t; ++r) lhs.add(sw.pi[r] * rec.rows[r].ksd_to_target);
      rec.average_ksd = lhs.value();
      const bool exact = d == 1;
      const double w0n = exact ? s.w0n_law : bc.w0n;
      const double B = exact ? s.B_law : bc.B;
      const double M = exact ? s.law.M0P : bc.M0P_inf;
      const double b_tm1 = sched.total();
      const double a = a_term(w0n, bc.A, B, bc.C, bc.kappa, bc.L, d, M, b_tm1, b_tm1 + bc.R1);
      rec.average_ksd_bound = finite_particle_bound(a, bc.KL0, bc.R1, b_tm1);
      averaged.observe(rec.average_ksd_bound - rec.average_ksd);
      averaged.observe(rec.average_ksd - rec.min_ksd);
      if (!exact) averaged.detail = "W1(Q_0^n, Q_0^inf) replaced by the reference ensemble";
    } catch (const PreconditionError& e) {
      step_cap = failed_check("step_cap", CheckKind::Hard, kHardTolerance, e.what());
      averaged = failed_check("finite_particle_average", CheckKind::Soft, kSoftTolerance, e.what());
    }
  }

  wass_disc.detail = "rounds with b_{r-1} <= " + fmt(cfg.verify.wasserstein_check_b_max);
  std::vector<Check> checks{step_cap, ledger, contraction, displacement, growth_prod, growth_exp,
                            wass_disc, ksd_disc, ksd_wass, averaged};

  // Density tracking of Q_r^inf on a quadrature grid.
  std::vector<QuadratureMeasure> density;
  if (opts.descent && cfg.verify.descent && d == 1) {
    Check descent = make_check("kl_descent", CheckKind::Soft, kDescentTolerance);
    Check average = make_check("descent_average", CheckKind::Soft, kDescentTolerance);
    Check mass = make_check("density_normalization", CheckKind::Soft, 1e-3);
    try {
      if (bc.R2 > 0.0 && max_eps > bc.R2) {
        throw PreconditionError("step " + fmt(max_eps) + " exceeds R_{alpha,2} = " + fmt(bc.R2));
      }
      const QuadratureMeasure q0 = default_quadrature(cfg.init.law.mean[0], sd_1d(cfg.init.law),
                                                      s.target, cfg.verify.descent_nodes);
      density = run_density(q0, steps, s.target, cfg.kernel);
      const DescentReport dr =
          verify_descent(density, steps, s.target, cfg.kernel, bc.kappa2, bc.L, bc.alpha);
      for (int r = 0; r <= t; ++r) {
        rec.rows[r].kl = dr.kl[r];
        rec.rows[r].ksd_surrogate = dr.ksd[r];
        if (r < t) rec.rows[r].slack_descent = dr.slack[r];
        mass.observe(-std::abs(density_mass(density[r]) - 1.0));
      }
      for (double sl : dr.slack) descent.observe(sl);
      if (t == 0) descent.observe(0.0);
      if (t > 0) {
        average.observe(dr.aggregate_mid - dr.aggregate_lhs);
        average.observe(dr.aggregate_rhs - dr.aggregate_mid);
      } else {
        average.observe(0.0);
      }
      if (s.target.is_gaussian()) {
        Check kl0 = make_check("kl0_quadrature", CheckKind::Soft, kDescentTolerance);
        kl0.observe(-std::abs(dr.kl[0] - bc.KL0));
        kl0.detail = "quadrature " + fmt(dr.kl[0]) + " vs closed form " + fmt(bc.KL0);
        checks.push_back(kl0);
      }
      checks.push_back(descent);
      checks.push_back(average);
      checks.push_back(mass);
    } catch (const Error& e) {
      checks.push_back(failed_check("kl_descent", CheckKind::Soft, kDescentTolerance, e.what()));
      checks.push_back(
          failed_check("descent_average", CheckKind::Soft, kDescentTolerance, e.what()));
    }
  }

  for (auto& c : checks) {
    if (c.evaluated > 0) c.finish();
  }
  rec.report.checks = std::move(checks);

  if (opts.output_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(*opts.output_dir);
    fs::create_directories(dir);
    const std::string base = cfg.output.prefix;
    {
      std::ofstream os(dir / (base + "_trajectory.csv"));
      write_trajectory_csv(os, rec);
    }
    {
      std::ofstream os(dir / (base + "_report.json"));
      nlohmann::json j = rec.report.to_json();
      j["run"] = rec.header_json();
      os << j.dump(2) << '\n';
    }
    if (cfg.output.checkpoints) {
      std::ofstream os(dir / (base + "_checkpoints.csv"));
      write_checkpoint_header(os, d);
      for (int r = 0; r <= t; ++r) write_checkpoint_rows(os, r, fin.states[r]);
    }
    if (cfg.output.densities && !density.empty()) {
      std::ofstream os(dir / (base + "_densities.csv"));
      write_density_header(os);
      for (int r = 0; r <= t; ++r) write_density_rows(os, r, density[r]);
    }
  }
  return rec;
}

SweepResult sweep_n(const ExperimentConfig& cfg, const std::vector<int>& n_list, int repeats) {
  if (n_list.empty()) throw ConfigError("sweep: empty n list");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw ConfigError("sweep: n list must be strictly increasing");
  }
  if (repeats < 1) throw ConfigError("sweep: repeats must be at least 1");

  SweepResult res;
  Check bound = make_check("sweep_rate_bound", CheckKind::Hard, kHardTolerance);
  Check monotone = make_check("sweep_rate_monotone", CheckKind::Hard, kHardTolerance);
  Check fixed_point = make_check("budget_fixed_point", CheckKind::Hard, kHardTolerance);
  Check covers = make_check("sweep_wbar_covers_w0n", CheckKind::Soft, 0.0);
  std::string errors;

  for (int k = 0; k < repeats; ++k) {
    double prev_rate = kNaN;
    for (int n : n_list) {
      SweepRow row;
      row.n = n;
      row.repeat = k;
      row.seed = cfg.init.seed + static_cast<std::uint64_t>(k);
      try {
        ExperimentConfig c = cfg;
        c.init.n = n;
        c.init.seed = row.seed;
        const Setup s = prepare(c, false);
        const BoundConstants& bc = s.ledger;
        const BudgetSchedule bs = budget_schedule(s, n, cfg.sweep.delta);
        row.wbar = bs.wbar;
        row.w0n_exact = s.w0n_law;
        row.b = bs.budget.b;
        row.rounds = static_cast<int>(bs.steps.size());
        row.eps = bs.steps.empty() ? 0.0 : bs.steps.front();
        const Trajectory tr = run_svgd(s.init, s.target, cfg.kernel, bs.steps);
        const SteinKernelContext ctx{s.target, cfg.kernel};
        row.min_ksd = kInf;
        for (const auto& st : tr.states) row.min_ksd = std::min(row.min_ksd, ksd_to_target(ctx, st));
        RateInputs in;
        in.kappa = bc.kappa;
        in.L = bc.L;
        in.d = bc.d;
        in.M0P_inf = s.law.M0P;
        in.KL0 = bc.KL0;
        in.R1 = bc.R1;
        in.wbar = bs.wbar;
        in.Abar = bc.A;
        in.Bbar = s.B_law;
        in.Cbar = bc.C;
        in.b = bs.budget.b;
        row.rate_rhs = rate_rhs(in);
        row.bound_holds = row.min_ksd <= row.rate_rhs + kHardTolerance;
        bound.observe(row.rate_rhs - row.min_ksd);
        if (bc.d == 1) {
          row.wbar_covers = row.wbar >= row.w0n_exact;
          covers.observe(row.wbar - row.w0n_exact);
        }
        if (bs.budget.b > 0.0) {
          const double phi = growth_phi(bs.wbar);
          const double x1 = bs.wbar * std::sqrt(phi), x2 = bs.wbar * phi;
          fixed_point.observe(growth_psi(s.B_law, bc.C, x1, bc.A, bs.budget.b1) - bs.budget.b1);
          fixed_point.observe(growth_psi(s.B_law, bc.C, x2, bc.A + 2.0 * bc.C, bs.budget.b2) -
                              bs.budget.b2);
        }
        if (!std::isnan(prev_rate)) {
          const double diff = (std::isinf(prev_rate) && std::isinf(row.rate_rhs))
                                  ? 0.0
                                  : prev_rate - row.rate_rhs;
          monotone.observe(diff);
        }
        prev_rate = row.rate_rhs;
      } catch (const Error& e) {
        row.error = e.what();
        errors += "n=" + std::to_string(n) + ": " + e.what() + "; ";
        bound.observe(-kInf);
      }
      res.rows.push_back(row);
    }
  }
  if (fixed_point.evaluated == 0) fixed_point.detail = "no cell with b > 0";
  bound.detail = errors;
  for (Check* c : {&bound, &monotone, &fixed_point, &covers}) {
    c->finish();
    res.report.checks.push_back(*c);
  }
  if (covers.evaluated > 0 && !covers.passed) {
    res.report.checks.back().detail =
        "the i.i.d. estimate holds only with probability 1 - c delta for an unspecified c";
  }
  return res;
}

void write_sweep_csv(std::ostream& os, const SweepResult& res) {
  os << "n,repeat,seed,wbar,w0n_exact,b,rounds,eps,min_ksd,rate_rhs,bound_holds,wbar_covers,error\n";
  os << std::setprecision(17);
  for (const auto& r : res.rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << r.n << ',' << r.repeat << ',' << r.seed << ',' << r.wbar << ',' << r.w0n_exact << ','
       << r.b << ',' << r.rounds << ',' << r.eps << ',' << r.min_ksd << ',' << r.rate_rhs << ','
       << (r.bound_holds ? 1 : 0) << ',' << (r.wbar_covers ? 1 : 0) << ',' << err << '\n';
  }
}

Report verify_suite(const ExperimentConfig& cfg, const RunOptions& opts) {
  Report rep;
  const Target target(cfg.target);
  const int d = target.dim();
  std::mt19937_64 rng(cfg.verify.property_seed);

  // Kernel constants against a grid of evaluation points.
  {
    Check c = make_check("kernel_constants_grid", CheckKind::Hard, kHardTolerance);
    CheckBox box;
    box.dim = d;
    box.points_per_axis = std::max(
        2, static_cast<int>(std::floor(std::pow(cfg.verify.kernel_grid_points, 1.0 / d))));
    try {
      kernel_constants(cfg.kernel, box);
      c.observe(0.0);
    } catch (const ConstantViolation& e) {
      c.observe(-kInf);
      c.detail = e.what();
    }
    c.finish();
    rep.checks.push_back(c);
  }

  const SteinKernelContext ctx{target, cfg.kernel};

  // Stein kernel has zero mean under P (1-D Gaussian targets).
  if (d == 1 && target.is_gaussian()) {
    Check c = make_check("stein_zero_mean", CheckKind::Soft, 1e-6);
    const double mu = target.mean()[0];
    const double sd = std::sqrt(target.covariance()(0, 0));
    const QuadratureMeasure q = gaussian_quadrature(mu, sd, mu - 12.0 * sd, mu + 12.0 * sd, 100001);
    for (int k = 0; k <= 100; ++k) {
      const double x = mu - 5.0 + 0.1 * k;
      CompensatedSum acc;
      for (int i = 0; i < q.size(); ++i) {
        acc.add(q.weights[i] * stein_kernel(ctx, Point(&x, 1), Point(&q.nodes[i], 1)));
      }
      c.observe(-std::abs(acc.value()));
    }
    c.finish();
    rep.checks.push_back(c);
  }

  // Positive semidefinite Stein Gram matrices.
  {
    Check c = make_check("stein_gram_psd", CheckKind::Hard, 1e-8);
    for (int trial = 0; trial < 5; ++trial) {
      const ParticleEnsemble e = random_measure(rng, d, 50, 2.0);
      const Eigen::MatrixXd g = stein_gram(ctx, e);
      const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
      c.observe(es.eigenvalues().minCoeff() / scale);
    }
    c.finish();
    rep.checks.push_back(c);
  }

  // W1 metric axioms, KSD triangle consistency and the KSD-W1 bound on random measures.
  {
    const KernelConstants kc = kernel_constants(cfg.kernel);
    const TargetConstants tc = target_constants(target);
    Check metric = make_check("wasserstein_metric_axioms", CheckKind::Hard, kHardTolerance);
    Check tri = make_check("ksd_triangle", CheckKind::Hard, kHardTolerance);
    Check ksd_wass = make_check("ksd_wasserstein_random_pairs", CheckKind::Hard, kHardTolerance);
    const int n_pairs = cfg.verify.random_pairs;
    for (int k = 0; k < n_pairs; ++k) {
      const ParticleEnsemble a = random_measure(rng, d, 16, 2.0);
      const ParticleEnsemble b = random_measure(rng, d, 16, 2.0);
      const double wab = wasserstein1(a, b);
      const double kab = ksd_between(ctx, a, b);
      const Moments mb = moments(b, target);
      ksd_wass.observe(ksd_wasserstein_bound(wab, kc.kappa, tc.L, d, mb.M_mu_p) - kab);
      tri.observe(kab - std::abs(ksd_to_target(ctx, a) - ksd_to_target(ctx, b)));
      if (k % 4 == 0) {
        const ParticleEnsemble c3 = random_measure(rng, d, 16, 2.0);
        const double wba = wasserstein1(b, a);
        metric.observe(-std::abs(wab - wba));
        metric.observe(-wasserstein1(a, a));
        metric.observe(wab + wasserstein1(b, c3) - wasserstein1(a, c3));
      }
    }
    for (Check* c : {&metric, &tri, &ksd_wass}) {
      c->finish();
      rep.checks.push_back(*c);
    }
  }

  try {
    const TrajectoryRecord rec = run_experiment(cfg, opts);
    for (const auto& c : rec.report.checks) rep.checks.push_back(c);
  } catch (const Error& e) {
    rep.checks.push_back(failed_check("trajectory", CheckKind::Hard, kHardTolerance, e.what()));
  }
  return rep;
}

}  // namespace svgd::harness
