#pragma once

#include <cstdint>
#include <vector>

#include "mams/bank.hpp"

namespace mams {

enum class StoppingRule {
  Simultaneous,  // whole trial stops at the first rejection anywhere
  Separate,      // each arm stops on its own decision
};

// How the pooled variance treats stages after an arm stopped recruiting.
// RecruitedOnly sums residuals over real observations only. ZeroPadded takes
// the estimator's "X_kli = 0 if n_kj = 0" at face value: a dropped arm adds
// n*(X_bar_k)^2 per missed stage to the residual sum (nu unchanged). The two
// differ by O(1/nu); both are kept so the convention is a one-line switch.
enum class VarianceConvention { RecruitedOnly, ZeroPadded };

// Which scale estimate the test statistics divide by.
struct StatisticMode {
  enum class Kind { TStat, ZStat };
  Kind kind = Kind::TStat;
  double assumed_sigma = 1.0;  // used by ZStat only
  VarianceConvention variance = VarianceConvention::RecruitedOnly;

  static StatisticMode t_stat() { return {Kind::TStat, 1.0}; }
  static StatisticMode t_stat_padded() {
    return {Kind::TStat, 1.0, VarianceConvention::ZeroPadded};
  }
  static StatisticMode z_stat(double sigma);
  bool is_t() const { return kind == Kind::TStat; }
};

// The decision variables of a MAMS design: per-stage group size n, efficacy
// boundaries e, futility boundaries f, and the stopping rule. At interim
// stages f_j < e_j (nonempty continuation region); at the final stage
// e_J == f_J so every surviving arm is decided.
struct Design {
  int n = 2;
  std::vector<double> efficacy;
  std::vector<double> futility;
  StoppingRule rule = StoppingRule::Simultaneous;

  int stages() const { return static_cast<int>(efficacy.size()); }
  void validate(int arms) const;  // throws std::invalid_argument
};

// Fixed problem instance: K arms, J stages, error-rate targets, the least
// favourable configuration (delta1, delta0), and the assumed variance.
struct TrialSettings {
  int arms = 3;
  int stages = 2;
  double alpha = 0.05;
  double beta = 0.1;
  double delta1 = 0.545;
  double delta0 = 0.178;
  double sigma2 = 1.0;
  VarianceConvention variance = VarianceConvention::RecruitedOnly;

  EffectVector lfc() const;
  StatisticMode t_mode() const { return {StatisticMode::Kind::TStat, 1.0, variance}; }
  void validate() const;
};

// Outcome of one simulated trial: decision_stage[k] = omega_k (1-based stage
// at which H0^(k) was rejected, accepted, or swept up by a simultaneous
// stop), rejected[k] = psi_k.
struct TrialResult {
  std::vector<int> decision_stage;
  std::vector<std::uint8_t> rejected;

  int stages_used() const;
};

// Statistics of one interim analysis. t[k-1] is NaN for arms no longer
// recruited at this stage.
struct StageStatistics {
  std::vector<double> t;                     // per experimental arm
  double pooled_variance = 0.0;              // sigma_hat_j^2 (t mode)
  int df = 0;                                // nu_j
  std::vector<std::int64_t> cumulative_n;    // N_kj, k = 0..K
};

// recruited_stages[k] = number of stages arm k has been recruited in so far
// (recruitment is always a stage prefix); the control must be recruited in
// every stage up to analysis_stage (1-based).
StageStatistics compute_statistics(const RealizedResponses& responses,
                                   const std::vector<int>& recruited_stages,
                                   int analysis_stage, const StatisticMode& mode);

// Runs the full multi-stage test on one realized dataset.
TrialResult run_trial(const Design& design, const RealizedResponses& responses,
                      const StatisticMode& mode);

// n * (max_k omega_k + sum_k omega_k): the control recruits through the last
// stage any arm was active, arm k recruits omega_k stages.
std::int64_t total_sample_size(const TrialResult& result, int group_size);

// Continuation predicate, centralized: an arm keeps recruiting after stage j
// iff f_j <= T < e_j.
inline bool continues(double t, double futility, double efficacy) {
  return t >= futility && t < efficacy;
}

// Statistic value used when the pooled variance estimate is exactly zero:
// the decision is driven by the sign of the mean difference alone. DBL_MAX
// rather than infinity so that vacuous infinite boundaries stay vacuous.
double degenerate_statistic(double mean_difference);

}  // namespace mams
