#include "mams/comparators.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mams/dist.hpp"

namespace mams {

const char* approach_name(ApproachTag tag) {
  switch (tag) {
    case ApproachTag::A1: return "A1";
    case ApproachTag::A2: return "A2";
    case ApproachTag::A3: return "A3";
    case ApproachTag::A4: return "A4";
  }
  return "?";
}

ApproachTag approach_from_name(const std::string& name) {
  if (name == "A1") return ApproachTag::A1;
  if (name == "A2") return ApproachTag::A2;
  if (name == "A3") return ApproachTag::A3;
  if (name == "A4") return ApproachTag::A4;
  throw std::invalid_argument("unknown approach '" + name + "' (expected A1..A4)");
}

const char* rule_name(StoppingRule rule) {
  return rule == StoppingRule::Simultaneous ? "simultaneous" : "separate";
}

StoppingRule rule_from_name(const std::string& name) {
  if (name == "simultaneous") return StoppingRule::Simultaneous;
  if (name == "separate") return StoppingRule::Separate;
  throw std::invalid_argument("unknown stopping rule '" + name +
                              "' (expected simultaneous|separate)");
}

std::pair<std::vector<double>, std::vector<double>> quantile_substitute(
    const std::vector<double>& efficacy, const std::vector<double>& futility,
    const std::vector<std::int64_t>& per_stage_totals, int arms) {
  if (efficacy.size() != futility.size() || efficacy.size() != per_stage_totals.size()) {
    throw std::invalid_argument("quantile_substitute: stage vectors must have equal length");
  }
  std::vector<double> e_out(efficacy.size()), f_out(futility.size());
  for (std::size_t j = 0; j < efficacy.size(); ++j) {
    if (!std::isfinite(efficacy[j]) || !std::isfinite(futility[j])) {
      throw std::invalid_argument("quantile_substitute: boundaries must be finite");
    }
    const std::int64_t df = per_stage_totals[j] - (arms + 1);
    if (df < 1) {
      throw std::invalid_argument("quantile_substitute: nu_j < 1 at stage " +
                                  std::to_string(j + 1));
    }
    const int nu = static_cast<int>(df);
    e_out[j] = student_t_quantile(std_normal_cdf(efficacy[j]), nu);
    f_out[j] = student_t_quantile(std_normal_cdf(futility[j]), nu);
  }
  return {std::move(e_out), std::move(f_out)};
}

Approach make_approach(ApproachTag tag, const DesignSet& designs, double assumed_sigma2,
                       int arms, VarianceConvention variance) {
  Approach a;
  a.tag = tag;
  const StatisticMode t_mode{StatisticMode::Kind::TStat, 1.0, variance};
  switch (tag) {
    case ApproachTag::A1:
      a.base = designs.triangular;
      a.mode = StatisticMode::z_stat(std::sqrt(assumed_sigma2));
      break;
    case ApproachTag::A2:
      a.base = designs.triangular;
      a.mode = t_mode;
      break;
    case ApproachTag::A3: {
      a.base = designs.triangular;
      a.mode = t_mode;
      a.quantile_substitution = true;
      // Degrees of freedom from the full planned recruitment at each stage:
      // the substitution is a pre-trial boundary modification.
      std::vector<std::int64_t> totals(a.base.stages());
      for (int j = 0; j < a.base.stages(); ++j) {
        totals[j] = static_cast<std::int64_t>(arms + 1) * a.base.n * (j + 1);
      }
      auto [e2, f2] =
          quantile_substitute(a.base.efficacy, a.base.futility, totals, arms);
      a.base.efficacy = std::move(e2);
      a.base.futility = std::move(f2);
      break;
    }
    case ApproachTag::A4:
      a.base = designs.optimal;
      a.mode = t_mode;
      break;
  }
  a.base.rule = designs.rule;
  return a;
}

const DesignSet& find_design_set(const std::vector<DesignSet>& sets, const std::string& scenario,
                                 StoppingRule rule) {
  for (const auto& s : sets) {
    if (s.scenario == scenario && s.rule == rule) return s;
  }
  throw std::invalid_argument("no design set for scenario '" + scenario + "', rule '" +
                              std::string(rule_name(rule)) + "'");
}

std::vector<ComparisonRow> evaluate_approaches(
    const std::vector<ScenarioSpec>& scenarios, const std::vector<StoppingRule>& rules,
    const std::vector<ApproachTag>& tags, const std::vector<double>& sigma2_grid,
    const std::vector<DesignSet>& design_sets, double assumed_sigma2, const ResponseBank& bank,
    int threads, VarianceConvention variance) {
  if (scenarios.empty() || rules.empty() || tags.empty() || sigma2_grid.empty()) {
    throw std::invalid_argument("evaluate_approaches: empty grid dimension");
  }
  const int K = bank.config().arms;
  OCEvaluator evaluator(bank, threads);
  std::vector<ComparisonRow> rows;

  for (const auto& scenario : scenarios) {
    EffectVector delta(K, scenario.delta0);
    delta[0] = scenario.delta1;
    for (StoppingRule rule : rules) {
      const DesignSet& set = find_design_set(design_sets, scenario.name, rule);
      for (ApproachTag tag : tags) {
        const Approach approach = make_approach(tag, set, assumed_sigma2, K, variance);
        for (double sigma2 : sigma2_grid) {
          if (!(sigma2 > 0.0)) {
            throw std::invalid_argument("evaluate_approaches: sigma2 values must be positive");
          }
          auto [oc_null, oc_alt] = evaluator.evaluate_pair(approach.base, approach.mode, delta,
                                                           std::sqrt(sigma2));
          ComparisonRow row;
          row.scenario = scenario.name;
          row.rule = rule;
          row.approach = tag;
          row.sigma2_true = sigma2;
          row.fwer = oc_null.fwer;
          row.power = oc_alt.power;
          row.ess_null = oc_null.ess_null;
          row.ess_alt = oc_alt.ess_alt;
          row.replicates = oc_null.replicates;
          row.mc_se_fwer =
              std::sqrt(row.fwer * (1.0 - row.fwer) / static_cast<double>(row.replicates));
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

namespace {

std::vector<double> parse_semicolon_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

std::vector<DesignSet> load_design_sets(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open design file " + csv_path);

  std::map<std::pair<std::string, std::string>, DesignSet> sets;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("scenario,rule,", 0) == 0) continue;  // header

    std::stringstream ss(line);
    std::string scenario, rule, role, n_str, f_str, e_str;
    if (!std::getline(ss, scenario, ',') || !std::getline(ss, rule, ',') ||
        !std::getline(ss, role, ',') || !std::getline(ss, n_str, ',') ||
        !std::getline(ss, f_str, ',') || !std::getline(ss, e_str, ',')) {
      throw std::runtime_error(csv_path + ":" + std::to_string(line_no) + ": malformed row");
    }

    Design d;
    d.n = std::stoi(n_str);
    d.futility = parse_semicolon_list(f_str);
    d.efficacy = parse_semicolon_list(e_str);
    d.rule = rule_from_name(rule);
    if (d.futility.size() != d.efficacy.size() || d.efficacy.empty()) {
      throw std::runtime_error(csv_path + ":" + std::to_string(line_no) +
                               ": e and f need equal nonzero length");
    }
    // Published final-stage pairs can differ in the last digit; the decision
    // rule checks efficacy first, so tying to e_J reproduces it exactly.
    const std::size_t last = d.efficacy.size() - 1;
    if (d.futility[last] != d.efficacy[last]) {
      if (std::fabs(d.futility[last] - d.efficacy[last]) > 0.005) {
        throw std::runtime_error(csv_path + ":" + std::to_string(line_no) +
                                 ": final-stage boundaries differ by more than 0.005");
      }
      d.futility[last] = d.efficacy[last];
    }

    auto& set = sets[{scenario, rule}];
    set.scenario = scenario;
    set.rule = d.rule;
    if (role == "triangular") {
      set.triangular = d;
    } else if (role == "balanced_optimal") {
      set.optimal = d;
    } else {
      throw std::runtime_error(csv_path + ":" + std::to_string(line_no) + ": unknown role '" +
                               role + "'");
    }
  }

  std::vector<DesignSet> out;
  out.reserve(sets.size());
  for (auto& [key, set] : sets) out.push_back(std::move(set));
  return out;
}

}  // namespace mams
