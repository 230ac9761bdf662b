// svgd_bounds: run SVGD experiments and check the discretization bounds.
//
//   svgd_bounds run <config> [--seed S] [--set key=value]... [--out DIR]
//   svgd_bounds verify <config> [...]
//   svgd_bounds sweep <config> [--n 16 64 ...] [--repeats R] [...]
//   svgd_bounds constants <config> [...]

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "svgd/errors.hpp"
#include "svgd/harness/config.hpp"
#include "svgd/harness/experiment.hpp"
#include "svgd/harness/record.hpp"

using namespace svgd;
using namespace svgd::harness;

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("config", args.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--set", args.sets, "override a config key, e.g. --set steps.eps=0.02");
  sub->add_option("--seed", args.seed, "override init.seed");
  sub->add_option("--out", args.out, "output directory (default: config, then $SVGD_OUTPUT_DIR, then .)");
}

ExperimentConfig load(const CommonArgs& args) {
  std::vector<std::string> overrides = args.sets;
  if (args.seed) overrides.push_back("init.seed=" + std::to_string(*args.seed));
  if (!args.out.empty()) overrides.push_back("output.dir=\"" + args.out + "\"");
  return load_config(args.config, overrides);
}

void print_report(std::ostream& os, const Report& rep) {
  std::size_t width = 0;
  for (const auto& c : rep.checks) width = std::max(width, c.name.size());
  for (const auto& c : rep.checks) {
    os << std::left << std::setw(static_cast<int>(width) + 2) << c.name
       << (c.kind == CheckKind::Hard ? "hard  " : "soft  ") << (c.passed ? "pass  " : "FAIL  ")
       << "worst_slack=" << std::setprecision(6) << c.worst_slack << "  n=" << c.evaluated;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << '\n';
  }
  os << "verdict: " << rep.verdict() << '\n';
}

int cmd_run(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  RunOptions opts;
  opts.output_dir = cfg.output_dir();
  const TrajectoryRecord rec = run_experiment(cfg, opts);
  print_report(std::cout, rec.report);
  std::cout << "outputs: " << *opts.output_dir << "/" << cfg.output.prefix << "_{trajectory.csv,report.json}\n";
  return rec.report.hard_passed() ? 0 : 1;
}

int cmd_verify(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  RunOptions opts;
  opts.output_dir = cfg.output_dir();
  const Report rep = verify_suite(cfg, opts);
  print_report(std::cout, rep);
  std::filesystem::create_directories(*opts.output_dir);
  std::ofstream os(std::filesystem::path(*opts.output_dir) / (cfg.output.prefix + "_verify.json"));
  os << rep.to_json().dump(2) << '\n';
  return rep.hard_passed() ? 0 : 1;
}

int cmd_sweep(const CommonArgs& args, const std::vector<int>& n_list, std::optional<int> repeats) {
  const ExperimentConfig cfg = load(args);
  const std::vector<int> ns = n_list.empty() ? cfg.sweep.n : n_list;
  const SweepResult res = sweep_n(cfg, ns, repeats.value_or(cfg.sweep.repeats));
  std::cout << std::left << std::setw(8) << "n" << std::setw(8) << "repeat" << std::setw(14) << "wbar"
            << std::setw(14) << "w0n" << std::setw(12) << "b" << std::setw(8) << "rounds"
            << std::setw(14) << "min_ksd" << std::setw(14) << "rate_rhs" << "holds\n";
  for (const auto& r : res.rows) {
    std::cout << std::left << std::setprecision(6) << std::setw(8) << r.n << std::setw(8) << r.repeat
              << std::setw(14) << r.wbar << std::setw(14) << r.w0n_exact << std::setw(12) << r.b
              << std::setw(8) << r.rounds << std::setw(14) << r.min_ksd << std::setw(14)
              << r.rate_rhs << (r.error.empty() ? (r.bound_holds ? "yes" : "NO") : r.error) << '\n';
  }
  print_report(std::cout, res.report);
  const std::filesystem::path dir(cfg.output_dir());
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / (cfg.output.prefix + "_sweep.csv"));
  write_sweep_csv(os, res);
  return res.report.hard_passed() ? 0 : 1;
}

int cmd_constants(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const Setup s = prepare(cfg, true);
  write_ledger_text(std::cout, s.ledger);
  nlohmann::json j = ledger_json(s.ledger);
  j["w0n_law"] = number_json(s.w0n_law);
  j["B_law"] = number_json(s.B_law);
  j["m0P_law"] = number_json(s.law.m0P);
  j["M0P_law"] = number_json(s.law.M0P);
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SVGD runs with discretization-bound verification"};
  app.require_subcommand(1);

  CommonArgs run_args, verify_args, sweep_args, const_args;
  std::vector<int> sweep_n_list;
  std::optional<int> sweep_repeats;
  add_common(app.add_subcommand("run", "run one experiment and write trajectory CSV + report"), run_args);
  add_common(app.add_subcommand("verify", "property suites plus trajectory checks"), verify_args);
  auto* sweep = app.add_subcommand("sweep", "finite-particle rate sweep over n");
  add_common(sweep, sweep_args);
  sweep->add_option("--n", sweep_n_list, "particle counts (strictly increasing)");
  sweep->add_option("--repeats", sweep_repeats, "seeds per n");
  add_common(app.add_subcommand("constants", "print the constant ledger"), const_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) return cmd_run(run_args);
    if (app.got_subcommand("verify")) return cmd_verify(verify_args);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_args, sweep_n_list, sweep_repeats);
    if (app.got_subcommand("constants")) return cmd_constants(const_args);
  } catch (const svgd::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const svgd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
