#include "mams/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mams/parallel.hpp"
#include "mams/rng.hpp"

namespace mams {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::runtime_error(where + ": expected a number, got '" + t + "'");
  }
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& name) {
  ConfigFile cfg;
  cfg.name_ = name;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                 ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw std::runtime_error(name + ":" + std::to_string(line_no) + ": empty section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": empty key");
    }
    if (section.empty()) {
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": key '" + key + "' appears before any [section]");
    }
    cfg.sections_[section][key] = Value{value, line_no};
  }
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

bool ConfigFile::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

const ConfigFile::Value& ConfigFile::require(const std::string& section,
                                             const std::string& key) const {
  const auto it = sections_.find(section);
  if (it == sections_.end() || it->second.count(key) == 0) {
    throw std::runtime_error(name_ + ": missing required key '" + section + "." + key + "'");
  }
  return it->second.at(key);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
  return require(section, key).text;
}

std::string ConfigFile::get_string_or(const std::string& section, const std::string& key,
                                      const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  const Value& v = require(section, key);
  return parse_double(v.text, name_ + ":" + std::to_string(v.line) + " (" + section + "." + key + ")");
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const double v = get_double(section, key);
  const int i = static_cast<int>(std::llround(v));
  if (static_cast<double>(i) != v) {
    const Value& val = require(section, key);
    throw std::runtime_error(name_ + ":" + std::to_string(val.line) + " (" + section + "." + key +
                             "): expected an integer");
  }
  return i;
}

int ConfigFile::get_int_or(const std::string& section, const std::string& key,
                           int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key) const {
  const Value& v = require(section, key);
  try {
    return std::stoull(trim(v.text));
  } catch (...) {
    throw std::runtime_error(name_ + ":" + std::to_string(v.line) + " (" + section + "." + key +
                             "): expected an unsigned integer");
  }
}

std::uint64_t ConfigFile::get_u64_or(const std::string& section, const std::string& key,
                                     std::uint64_t fallback) const {
  return has(section, key) ? get_u64(section, key) : fallback;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key) const {
  const Value& v = require(section, key);
  std::vector<double> out;
  std::stringstream ss(v.text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(item, name_ + ":" + std::to_string(v.line) + " (" + section + "." +
                                         key + ")"));
  }
  if (out.empty()) {
    throw std::runtime_error(name_ + ":" + std::to_string(v.line) + " (" + section + "." + key +
                             "): empty list");
  }
  return out;
}

std::vector<std::string> ConfigFile::get_string_list(const std::string& section,
                                                     const std::string& key) const {
  const Value& v = require(section, key);
  std::vector<std::string> out;
  std::stringstream ss(v.text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  if (out.empty()) {
    throw std::runtime_error(name_ + ":" + std::to_string(v.line) + " (" + section + "." + key +
                             "): empty list");
  }
  return out;
}

std::vector<std::string> ConfigFile::sections_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : sections_) {
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> ConfigFile::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [section, kv] : sections_) {
    for (const auto& [key, value] : kv) {
      out.emplace_back(section + "." + key, value.text);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// RunConfig assembly
// ---------------------------------------------------------------------------

namespace {

TrialSettings load_settings(const ConfigFile& cfg) {
  TrialSettings s;
  s.arms = cfg.get_int("trial", "arms");
  s.stages = cfg.get_int("trial", "stages");
  s.alpha = cfg.get_double("trial", "alpha");
  s.beta = cfg.get_double("trial", "beta");
  s.delta1 = cfg.get_double("trial", "delta1");
  s.delta0 = cfg.get_double("trial", "delta0");
  s.sigma2 = cfg.get_double_or("trial", "sigma2", 1.0);
  const std::string variance = cfg.get_string_or("trial", "variance", "recruited_only");
  if (variance == "recruited_only") {
    s.variance = VarianceConvention::RecruitedOnly;
  } else if (variance == "zero_padded") {
    s.variance = VarianceConvention::ZeroPadded;
  } else {
    throw std::runtime_error(cfg.name() +
                             ": trial.variance must be 'recruited_only' or 'zero_padded', got '" +
                             variance + "'");
  }
  s.validate();
  return s;
}

BankConfig load_bank(const ConfigFile& cfg, const TrialSettings& settings,
                     const CliOverrides& cli) {
  BankConfig b;
  b.replicates = cfg.get_u64_or("bank", "replicates", 100000);
  b.arms = settings.arms;
  b.stages = settings.stages;
  b.n_max = cfg.get_int("bank", "n_max");
  b.seed = cfg.get_u64("bank", "seed");
  const std::string mode = cfg.get_string_or("bank", "mode", "stored");
  if (mode == "stored") {
    b.mode = BankMode::Stored;
  } else if (mode == "lean") {
    b.mode = BankMode::Lean;
  } else {
    throw std::runtime_error(cfg.name() + ": bank.mode must be 'stored' or 'lean', got '" +
                             mode + "'");
  }
  b.memory_budget_bytes = cfg.get_u64_or("bank", "memory_budget_mb", 6144) << 20;
  if (cli.seed) b.seed = *cli.seed;
  if (cli.replicates) b.replicates = *cli.replicates;
  b.validate();
  return b;
}

Design load_design_section(const ConfigFile& cfg, const std::string& section) {
  Design d;
  d.n = cfg.get_int(section, "n");
  d.futility = cfg.get_double_list(section, "f");
  d.efficacy = cfg.get_double_list(section, "e");
  if (d.futility.size() != d.efficacy.size()) {
    throw std::runtime_error(cfg.name() + ": [" + section + "] e and f need equal length");
  }
  return d;
}

void fill_common(RunConfig& rc, const ConfigFile& cfg, const CliOverrides& cli,
                 const std::string& command) {
  rc.out_dir = cli.out_dir.value_or(cfg.get_string_or("output", "dir", "."));
  rc.threads = cli.threads > 0 ? cli.threads : default_threads();
  if (cfg.has("bank", "cache")) rc.bank_cache_path = cfg.get_string("bank", "cache");

  rc.echo = cfg.entries();
  // Placement details (output.dir, threads) stay out of the echo: outputs
  // are byte-identical wherever and however parallel they are produced.
  std::erase_if(rc.echo, [](const auto& kv) { return kv.first == "output.dir"; });
  // overrides land in the echo so reruns are self-describing
  const auto set = [&rc](const std::string& key, const std::string& value) {
    for (auto& kv : rc.echo) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    rc.echo.emplace_back(key, value);
  };
  set("bank.seed", std::to_string(rc.bank.seed));
  set("bank.replicates", std::to_string(rc.bank.replicates));
  rc.echo.emplace_back("command", command);
  std::sort(rc.echo.begin(), rc.echo.end());
}

StatisticMode load_mode(const ConfigFile& cfg, const std::string& section,
                        const std::string& key, const TrialSettings& settings) {
  const std::string mode = cfg.get_string_or(section, key, "t");
  if (mode == "t") return settings.t_mode();
  if (mode == "z") return StatisticMode::z_stat(std::sqrt(settings.sigma2));
  throw std::runtime_error(cfg.name() + ": " + section + "." + key +
                           " must be 't' or 'z', got '" + mode + "'");
}

}  // namespace

RunConfig load_optimize_config(const ConfigFile& cfg, const CliOverrides& cli) {
  RunConfig rc;
  rc.settings = load_settings(cfg);
  rc.rule = rule_from_name(cfg.get_string("trial", "rule"));
  rc.bank = load_bank(cfg, rc.settings, cli);

  rc.spec.w1 = cfg.get_double("weights", "w1");
  rc.spec.w2 = cfg.get_double("weights", "w2");
  rc.spec.w3 = cfg.get_double("weights", "w3");
  rc.spec.alpha = rc.settings.alpha;
  rc.spec.beta = rc.settings.beta;
  rc.spec.delta = rc.settings.lfc();

  CEConfig& ce = rc.ce;
  ce.population = cfg.get_int_or("ce", "population", 1000);
  ce.elite_frac = cfg.get_double_or("ce", "elite_frac", 0.1);
  ce.smoothing = cfg.get_double_or("ce", "smoothing", 0.7);
  ce.max_iters = cfg.get_int_or("ce", "max_iters", 100);
  ce.tol_sd = cfg.get_double_or("ce", "tol_sd", 0.01);
  ce.n_lo = cfg.get_int("ce", "n_lo");
  ce.n_hi = cfg.get_int("ce", "n_hi");
  ce.seed = cfg.get_u64_or("ce", "seed", mix64(rc.bank.seed ^ 0xCE5EEDULL));
  if (cli.seed) ce.seed = mix64(*cli.seed ^ 0xCE5EEDULL);
  ce.boundary_box = CEConfig::default_box(rc.settings.stages);
  if (cfg.has("ce", "box_lo") || cfg.has("ce", "box_hi")) {
    const auto lo = cfg.get_double_list("ce", "box_lo");
    const auto hi = cfg.get_double_list("ce", "box_hi");
    if (lo.size() != ce.boundary_box.size() || hi.size() != ce.boundary_box.size()) {
      throw std::runtime_error(cfg.name() + ": ce.box_lo/box_hi need " +
                               std::to_string(ce.boundary_box.size()) + " entries");
    }
    for (std::size_t c = 0; c < lo.size(); ++c) ce.boundary_box[c] = {lo[c], hi[c]};
  }
  if (cfg.has("ce", "init_design")) {
    Design init = load_design_section(cfg, "design." + cfg.get_string("ce", "init_design"));
    init.rule = rc.rule;
    ce.init_design = init;
  }
  ce.validate(rc.settings.stages);

  const std::string penalty = cfg.get_string_or("optimize", "penalty", "auto");
  if (penalty == "auto") {
    rc.penalty_auto = true;
  } else {
    rc.penalty_auto = false;
    rc.spec.penalty = parse_double(penalty, cfg.name() + " (optimize.penalty)");
  }
  rc.single_stage_n_max = cfg.get_int_or("single_stage", "n_max", 256);
  rc.single_stage_mode = load_mode(cfg, "single_stage", "mode", rc.settings);

  fill_common(rc, cfg, cli, "optimize");
  return rc;
}

RunConfig load_evaluate_config(const ConfigFile& cfg, const CliOverrides& cli) {
  RunConfig rc;
  rc.settings = load_settings(cfg);
  rc.rule = StoppingRule::Simultaneous;  // per-row rules below
  rc.bank = load_bank(cfg, rc.settings, cli);

  for (const std::string& name : cfg.get_string_list("evaluate", "scenarios")) {
    ScenarioSpec s;
    s.name = name;
    s.delta1 = cfg.get_double("scenario." + name, "delta1");
    s.delta0 = cfg.get_double("scenario." + name, "delta0");
    rc.scenarios.push_back(std::move(s));
  }
  for (const std::string& name : cfg.get_string_list("evaluate", "rules")) {
    rc.eval_rules.push_back(rule_from_name(name));
  }
  for (const std::string& name : cfg.get_string_list("evaluate", "approaches")) {
    rc.approaches.push_back(approach_from_name(name));
  }
  rc.sigma2_grid = cfg.get_double_list("evaluate", "sigma2_grid");
  for (double v : rc.sigma2_grid) {
    if (!(v > 0.0)) throw std::runtime_error(cfg.name() + ": evaluate.sigma2_grid must be positive");
  }

  // design sections: design.<scenario>.<rule>.<triangular|balanced_optimal>
  for (const auto& scenario : rc.scenarios) {
    for (StoppingRule rule : rc.eval_rules) {
      DesignSet set;
      set.scenario = scenario.name;
      set.rule = rule;
      const std::string base = "design." + scenario.name + "." + rule_name(rule) + ".";
      bool need_triangular = false, need_optimal = false;
      for (ApproachTag tag : rc.approaches) {
        if (tag == ApproachTag::A4) need_optimal = true;
        else need_triangular = true;
      }
      if (need_triangular) {
        set.triangular = load_design_section(cfg, base + "triangular");
        set.triangular.rule = rule;
        const std::size_t last = set.triangular.efficacy.size() - 1;
        if (std::fabs(set.triangular.futility[last] - set.triangular.efficacy[last]) > 0.005) {
          throw std::runtime_error(cfg.name() + ": [" + base +
                                   "triangular] final-stage boundaries must be tied");
        }
        set.triangular.futility[last] = set.triangular.efficacy[last];
      }
      if (need_optimal) {
        set.optimal = load_design_section(cfg, base + "balanced_optimal");
        set.optimal.rule = rule;
        const std::size_t last = set.optimal.efficacy.size() - 1;
        if (std::fabs(set.optimal.futility[last] - set.optimal.efficacy[last]) > 0.005) {
          throw std::runtime_error(cfg.name() + ": [" + base +
                                   "balanced_optimal] final-stage boundaries must be tied");
        }
        set.optimal.futility[last] = set.optimal.efficacy[last];
      }
      rc.design_sets.push_back(std::move(set));
    }
  }

  fill_common(rc, cfg, cli, "evaluate");
  return rc;
}

RunConfig load_scan_config(const ConfigFile& cfg, const CliOverrides& cli) {
  RunConfig rc;
  rc.settings = load_settings(cfg);
  rc.bank = load_bank(cfg, rc.settings, cli);

  rc.scan_design = load_design_section(cfg, "design." + cfg.get_string("scan", "design"));
  rc.scan_design.rule = rule_from_name(cfg.get_string("scan", "rule"));
  const std::size_t last = rc.scan_design.efficacy.size() - 1;
  rc.scan_design.futility[last] = rc.scan_design.efficacy[last];
  rc.scan_mode = load_mode(cfg, "scan", "mode", rc.settings);
  rc.theta_levels = cfg.get_double_list("scan", "theta_levels");
  rc.scan_sigma2 = cfg.get_double_or("scan", "sigma2_true", 1.0);
  if (!(rc.scan_sigma2 > 0.0)) {
    throw std::runtime_error(cfg.name() + ": scan.sigma2_true must be positive");
  }
  rc.scan_design.validate(rc.settings.arms);

  fill_common(rc, cfg, cli, "scan");
  return rc;
}

RunConfig load_single_stage_config(const ConfigFile& cfg, const CliOverrides& cli) {
  RunConfig rc;
  rc.settings = load_settings(cfg);
  rc.bank = load_bank(cfg, rc.settings, cli);
  rc.single_stage_n_max = cfg.get_int_or("single_stage", "n_max", 256);
  rc.single_stage_mode = load_mode(cfg, "single_stage", "mode", rc.settings);
  fill_common(rc, cfg, cli, "single-stage");
  return rc;
}

std::vector<EffectVector> theta_grid(const std::vector<double>& levels, int arms) {
  std::vector<EffectVector> out;
  EffectVector current(arms, 0.0);
  const std::size_t total = [&] {
    std::size_t t = 1;
    for (int k = 0; k < arms; ++k) t *= levels.size();
    return t;
  }();
  out.reserve(total);
  std::vector<std::size_t> idx(arms, 0);
  for (std::size_t row = 0; row < total; ++row) {
    for (int k = 0; k < arms; ++k) current[k] = levels[idx[k]];
    out.push_back(current);
    for (int k = arms - 1; k >= 0; --k) {
      if (++idx[k] < levels.size()) break;
      idx[k] = 0;
    }
  }
  return out;
}

}  // namespace mams
