#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mams/oc.hpp"
#include "mams/trial.hpp"

namespace mams {

// The four design approaches compared under variance misspecification:
//   A1  known-variance design, z statistics with the assumed sigma
//   A2  known-variance design, t statistics
//   A3  known-variance design, t statistics, quantile-substituted boundaries
//   A4  balanced-optimal t design, t statistics
enum class ApproachTag { A1, A2, A3, A4 };

const char* approach_name(ApproachTag tag);
ApproachTag approach_from_name(const std::string& name);

struct Approach {
  ApproachTag tag = ApproachTag::A1;
  Design base;
  StatisticMode mode;
  bool quantile_substitution = false;
};

struct ScenarioSpec {
  std::string name;
  double delta1 = 0.0;
  double delta0 = 0.0;
};

// The two published designs for one (scenario, rule) cell.
struct DesignSet {
  std::string scenario;
  StoppingRule rule = StoppingRule::Simultaneous;
  Design triangular;  // known-variance comparator (boundaries as published)
  Design optimal;     // balanced-optimal t design
};

// Maps each boundary b at stage j to the t value with the same standard
// normal upper-tail probability: b' = F_t^{-1}(Phi(b); nu_j), where
// nu_j = per_stage_totals[j] - (K+1). Applied to efficacy and futility alike;
// an equal final-stage pair stays tied.
std::pair<std::vector<double>, std::vector<double>> quantile_substitute(
    const std::vector<double>& efficacy, const std::vector<double>& futility,
    const std::vector<std::int64_t>& per_stage_totals, int arms);

// Builds the concrete approach for one design set: boundary transform and
// statistic mode resolved, stopping rule attached.
Approach make_approach(ApproachTag tag, const DesignSet& designs, double assumed_sigma2,
                       int arms, VarianceConvention variance = VarianceConvention::RecruitedOnly);

struct ComparisonRow {
  std::string scenario;
  StoppingRule rule = StoppingRule::Simultaneous;
  ApproachTag approach = ApproachTag::A1;
  double sigma2_true = 1.0;
  double fwer = 0.0;
  double power = 0.0;
  double ess_null = 0.0;
  double ess_alt = 0.0;
  double mc_se_fwer = 0.0;
  std::uint64_t replicates = 0;
};

// One row per (scenario, rule, approach, sigma2). All cells share the bank:
// under theta = 0 the t-statistic rows are bit-identical across sigma2 by
// construction.
std::vector<ComparisonRow> evaluate_approaches(
    const std::vector<ScenarioSpec>& scenarios, const std::vector<StoppingRule>& rules,
    const std::vector<ApproachTag>& tags, const std::vector<double>& sigma2_grid,
    const std::vector<DesignSet>& design_sets, double assumed_sigma2, const ResponseBank& bank,
    int threads = 1, VarianceConvention variance = VarianceConvention::RecruitedOnly);

const DesignSet& find_design_set(const std::vector<DesignSet>& sets, const std::string& scenario,
                                 StoppingRule rule);

// Loads design sets from a CSV with columns
//   scenario,rule,role,n,f,e        (f and e are ';'-separated stage lists)
// A final-stage efficacy/futility pair differing by at most 0.005 (published
// rounding noise) is tied to the efficacy value; larger gaps are an error.
std::vector<DesignSet> load_design_sets(const std::string& csv_path);

const char* rule_name(StoppingRule rule);
StoppingRule rule_from_name(const std::string& name);

}  // namespace mams
