#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mams/bank.hpp"
#include "mams/comparators.hpp"
#include "mams/optimizer.hpp"
#include "mams/trial.hpp"

namespace mams {

// Flat key-value configuration with [section] headers, '#' comments and
// comma-separated lists. Errors carry file:line anchors; missing keys are
// reported by their full section.key name.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text, const std::string& name);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int_or(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key) const;
  std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key) const;

  std::vector<std::string> sections_with_prefix(const std::string& prefix) const;

  // All resolved entries, sorted, for echoing into output headers.
  std::vector<std::pair<std::string, std::string>> entries() const;

  const std::string& name() const { return name_; }

 private:
  struct Value {
    std::string text;
    int line = 0;
  };
  std::string name_;
  std::map<std::string, std::map<std::string, Value>> sections_;

  const Value& require(const std::string& section, const std::string& key) const;
};

// Overrides supplied on the command line.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicates;
  std::optional<std::string> out_dir;
  int threads = 0;  // 0 = hardware default
};

// Fully resolved run configuration for one subcommand.
struct RunConfig {
  TrialSettings settings;
  StoppingRule rule = StoppingRule::Simultaneous;
  BankConfig bank;
  std::optional<std::string> bank_cache_path;

  // optimize
  ObjectiveSpec spec;  // delta/penalty filled during resolution
  CEConfig ce;
  bool penalty_auto = true;
  int single_stage_n_max = 256;
  StatisticMode single_stage_mode = StatisticMode::t_stat();

  // evaluate
  std::vector<ScenarioSpec> scenarios;
  std::vector<StoppingRule> eval_rules;
  std::vector<ApproachTag> approaches;
  std::vector<double> sigma2_grid;
  std::vector<DesignSet> design_sets;

  // scan
  Design scan_design;
  StatisticMode scan_mode = StatisticMode::t_stat();
  std::vector<double> theta_levels;
  double scan_sigma2 = 1.0;

  std::string out_dir = ".";
  int threads = 1;

  // Resolved key = value lines embedded in every output file (threads
  // excluded: outputs are identical for any worker count).
  std::vector<std::pair<std::string, std::string>> echo;
};

RunConfig load_optimize_config(const ConfigFile& cfg, const CliOverrides& cli);
RunConfig load_evaluate_config(const ConfigFile& cfg, const CliOverrides& cli);
RunConfig load_scan_config(const ConfigFile& cfg, const CliOverrides& cli);
RunConfig load_single_stage_config(const ConfigFile& cfg, const CliOverrides& cli);

// Expands per-component levels into the full K-dimensional grid (row-major,
// last component fastest).
std::vector<EffectVector> theta_grid(const std::vector<double>& levels, int arms);

}  // namespace mams
