// Command-line front end: optimize | evaluate | scan | single-stage.
// Exit codes: 0 success, 1 invalid input, 2 completed but infeasible.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mams/config.hpp"
#include "mams/report.hpp"
#include "mams/rng.hpp"

namespace fs = std::filesystem;
using namespace mams;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicates;
  std::optional<std::string> out_dir;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file")->required();
  cmd->add_option("--seed", [&args](const CLI::results_t& res) {
        args.seed = std::stoull(res[0]);
        return true;
      }, "override the bank seed (and derived seeds)");
  cmd->add_option("--replicates", [&args](const CLI::results_t& res) {
        args.replicates = std::stoull(res[0]);
        return true;
      }, "override the Monte Carlo replicate count R");
  cmd->add_option("--out", [&args](const CLI::results_t& res) {
        args.out_dir = res[0];
        return true;
      }, "output directory");
  cmd->add_option("--threads", args.threads, "worker thread cap (results are identical for any value)");
}

CliOverrides to_overrides(const CommonArgs& args) {
  CliOverrides cli;
  cli.seed = args.seed;
  cli.replicates = args.replicates;
  cli.out_dir = args.out_dir;
  cli.threads = args.threads;
  return cli;
}

ResponseBank acquire_bank(const RunConfig& rc) {
  if (rc.bank_cache_path && fs::exists(*rc.bank_cache_path)) {
    ResponseBank bank = ResponseBank::load(*rc.bank_cache_path);
    if (!(bank.config() == rc.bank)) {
      throw std::runtime_error("bank cache " + *rc.bank_cache_path +
                               " does not match the configured bank; delete it to regenerate");
    }
    return bank;
  }
  ResponseBank bank = ResponseBank::build(rc.bank, rc.threads);
  if (rc.bank_cache_path) bank.dump(*rc.bank_cache_path);
  return bank;
}

std::ofstream open_output(const RunConfig& rc, const std::string& filename) {
  fs::create_directories(rc.out_dir);
  const fs::path path = fs::path(rc.out_dir) / filename;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

int run_optimize(const CommonArgs& args) {
  const ConfigFile cfg = ConfigFile::parse_file(args.config_path);
  RunConfig rc = load_optimize_config(cfg, to_overrides(args));

  double penalty;
  if (rc.penalty_auto) {
    BankConfig ref_cfg;
    ref_cfg.replicates = rc.bank.replicates;
    ref_cfg.arms = rc.settings.arms;
    ref_cfg.stages = 1;
    ref_cfg.n_max = rc.single_stage_n_max;
    ref_cfg.seed = mix64(rc.bank.seed ^ 0x517A6EULL);
    ref_cfg.mode = BankMode::Lean;
    const ResponseBank ref_bank = ResponseBank::build(ref_cfg, rc.threads);
    const SingleStageResult ss =
        single_stage_reference(rc.settings, rc.single_stage_mode, ref_bank, rc.threads);
    penalty = static_cast<double>(ss.total);
    std::cout << "single-stage reference: n=" << ss.n << " per arm, total=" << ss.total
              << ", e1=" << format_boundary(ss.e1) << "\n";
  } else {
    penalty = rc.spec.penalty;
  }
  rc.spec.penalty = penalty;

  const ResponseBank bank = acquire_bank(rc);
  const OptimResult result =
      ce_optimize(rc.settings, rc.rule, rc.spec, rc.ce, bank, rc.threads);

  {
    auto os = open_output(rc, "design.txt");
    write_design_report(os, rc, result, penalty);
  }
  {
    auto os = open_output(rc, "trace.csv");
    write_trace_csv(os, rc, result, rc.settings.stages);
  }
  std::cout << "best design: n=" << result.best.n << ", score=" << result.score
            << (result.feasible ? " (feasible)" : " (INFEASIBLE)") << "\n";
  return result.feasible ? 0 : 2;
}

int run_evaluate(const CommonArgs& args) {
  const ConfigFile cfg = ConfigFile::parse_file(args.config_path);
  RunConfig rc = load_evaluate_config(cfg, to_overrides(args));
  const ResponseBank bank = acquire_bank(rc);
  const auto rows =
      evaluate_approaches(rc.scenarios, rc.eval_rules, rc.approaches, rc.sigma2_grid,
                          rc.design_sets, rc.settings.sigma2, bank, rc.threads,
                          rc.settings.variance);
  auto os = open_output(rc, "evaluate.csv");
  write_comparison_csv(os, rc, rows);
  std::cout << "wrote " << rows.size() << " rows\n";
  return 0;
}

int run_scan(const CommonArgs& args) {
  const ConfigFile cfg = ConfigFile::parse_file(args.config_path);
  RunConfig rc = load_scan_config(cfg, to_overrides(args));
  const ResponseBank bank = acquire_bank(rc);
  const auto grid = theta_grid(rc.theta_levels, rc.settings.arms);
  const ScanResult scan = fwer_scan(rc.scan_design, rc.scan_mode, grid,
                                    std::sqrt(rc.scan_sigma2), bank, rc.threads);
  auto os = open_output(rc, "scan.csv");
  write_scan_csv(os, rc, scan, rc.settings.arms);
  std::cout << "scanned " << scan.points.size() << " effect vectors, max error rate "
            << format_rate(scan.max_rate) << "\n";
  return 0;
}

int run_single_stage(const CommonArgs& args) {
  const ConfigFile cfg = ConfigFile::parse_file(args.config_path);
  RunConfig rc = load_single_stage_config(cfg, to_overrides(args));

  BankConfig ref_cfg;
  ref_cfg.replicates = rc.bank.replicates;
  ref_cfg.arms = rc.settings.arms;
  ref_cfg.stages = 1;
  ref_cfg.n_max = rc.single_stage_n_max;
  ref_cfg.seed = mix64(rc.bank.seed ^ 0x517A6EULL);
  ref_cfg.mode = BankMode::Lean;
  const ResponseBank ref_bank = ResponseBank::build(ref_cfg, rc.threads);
  const SingleStageResult ss =
      single_stage_reference(rc.settings, rc.single_stage_mode, ref_bank, rc.threads);

  std::cout << "n_per_arm = " << ss.n << "\ntotal = " << ss.total
            << "\ne1 = " << format_boundary(ss.e1) << "\nfwer = " << format_rate(ss.fwer)
            << "\npower = " << format_rate(ss.power) << "\n";
  auto os = open_output(rc, "single_stage.csv");
  write_single_stage_csv(os, rc, ss, rc.settings.arms);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo design of multi-arm multi-stage t-test trials"};
  app.require_subcommand(1);

  CommonArgs optimize_args, evaluate_args, scan_args, single_args;
  CLI::App* optimize = app.add_subcommand(
      "optimize", "search for the design minimizing the weighted sample-size objective");
  add_common(optimize, optimize_args);
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "operating characteristics of the configured approaches over a variance grid");
  add_common(evaluate, evaluate_args);
  CLI::App* scan =
      app.add_subcommand("scan", "error-rate search over a grid of effect vectors");
  add_common(scan, scan_args);
  CLI::App* single = app.add_subcommand(
      "single-stage", "smallest single-stage design meeting the alpha/power targets");
  add_common(single, single_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (optimize->parsed()) return run_optimize(optimize_args);
    if (evaluate->parsed()) return run_evaluate(evaluate_args);
    if (scan->parsed()) return run_scan(scan_args);
    if (single->parsed()) return run_single_stage(single_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
