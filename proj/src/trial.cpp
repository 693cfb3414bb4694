#include "mams/trial.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mams {

StatisticMode StatisticMode::z_stat(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("z_stat: assumed sigma must be positive");
  return {Kind::ZStat, sigma};
}

void Design::validate(int arms) const {
  const int J = stages();
  if (J < 1) throw std::invalid_argument("design: at least one stage required");
  if (static_cast<int>(futility.size()) != J) {
    throw std::invalid_argument("design: efficacy and futility vectors must have equal length");
  }
  if (n < 1) throw std::invalid_argument("design: group size n must be >= 1");
  if (arms < 1) throw std::invalid_argument("design: K must be >= 1");
  // nu_1 = (K+1)(n-1) must be >= 1 for the pooled variance at stage 1.
  if (static_cast<std::int64_t>(arms + 1) * n < arms + 2) {
    throw std::invalid_argument("design: (K+1)*n must be >= K+2 so that nu_1 >= 1");
  }
  for (int j = 0; j < J - 1; ++j) {
    if (std::isnan(efficacy[j]) || std::isnan(futility[j])) {
      throw std::invalid_argument("design: boundaries must not be NaN");
    }
    if (!(futility[j] < efficacy[j])) {
      throw std::invalid_argument("design: f_" + std::to_string(j + 1) + " < e_" +
                                  std::to_string(j + 1) + " required at interim stages");
    }
  }
  if (!(efficacy[J - 1] == futility[J - 1])) {
    throw std::invalid_argument("design: e_J == f_J required so the trial has at most J stages");
  }
  if (std::isnan(efficacy[J - 1])) {
    throw std::invalid_argument("design: final-stage boundary must not be NaN");
  }
}

EffectVector TrialSettings::lfc() const {
  EffectVector d(arms, delta0);
  d[0] = delta1;
  return d;
}

void TrialSettings::validate() const {
  if (arms < 1) throw std::invalid_argument("settings: K must be >= 1");
  if (stages < 1) throw std::invalid_argument("settings: J must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("settings: alpha must be in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("settings: beta must be in (0,1)");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("settings: sigma2 must be positive");
  if (!std::isfinite(delta1) || !std::isfinite(delta0)) {
    throw std::invalid_argument("settings: delta values must be finite");
  }
}

int TrialResult::stages_used() const {
  return *std::max_element(decision_stage.begin(), decision_stage.end());
}

double degenerate_statistic(double mean_difference) {
  if (mean_difference > 0.0) return DBL_MAX;
  if (mean_difference < 0.0) return -DBL_MAX;
  return 0.0;
}

StageStatistics compute_statistics(const RealizedResponses& responses,
                                   const std::vector<int>& recruited_stages,
                                   int analysis_stage, const StatisticMode& mode) {
  const int K = responses.arms;
  const int n = responses.n;
  if (static_cast<int>(recruited_stages.size()) != K + 1) {
    throw std::invalid_argument("compute_statistics: recruitment history must cover all K+1 arms");
  }
  if (analysis_stage < 1 || analysis_stage > responses.stages) {
    throw std::invalid_argument("compute_statistics: analysis stage out of range");
  }
  if (recruited_stages[0] != analysis_stage) {
    throw std::invalid_argument("compute_statistics: control must be recruited in every stage");
  }

  StageStatistics out;
  out.t.assign(K, std::numeric_limits<double>::quiet_NaN());
  out.cumulative_n.assign(K + 1, 0);

  std::vector<double> mean(K + 1, 0.0);
  std::int64_t total_obs = 0;
  for (int k = 0; k <= K; ++k) {
    const int m = recruited_stages[k];
    if (m < 1 || m > analysis_stage) {
      throw std::invalid_argument("compute_statistics: every arm needs 1..j recruited stages");
    }
    const std::int64_t N = static_cast<std::int64_t>(n) * m;
    out.cumulative_n[k] = N;
    total_obs += N;
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) s += responses.at(k, j, i);
    }
    mean[k] = s / static_cast<double>(N);
  }

  out.df = static_cast<int>(total_obs) - (K + 1);
  double scale;  // the s in T = (X1 - X0) / (s * sqrt(1/N0 + 1/Nk))
  if (mode.is_t()) {
    if (out.df < 1) {
      throw std::invalid_argument("compute_statistics: nu_j < 1; too few observations for a t-statistic");
    }
    double ss = 0.0;  // pooled over the recruited observations of every arm
    for (int k = 0; k <= K; ++k) {
      for (int j = 0; j < recruited_stages[k]; ++j) {
        for (int i = 0; i < n; ++i) {
          const double d = responses.at(k, j, i) - mean[k];
          ss += d * d;
        }
      }
      if (mode.variance == VarianceConvention::ZeroPadded) {
        // stages after the arm was dropped enter as literal zero responses
        const int missing = analysis_stage - recruited_stages[k];
        if (missing > 0) ss += static_cast<double>(missing) * n * mean[k] * mean[k];
      }
    }
    out.pooled_variance = ss / static_cast<double>(out.df);
    scale = std::sqrt(out.pooled_variance);
  } else {
    out.pooled_variance = std::numeric_limits<double>::quiet_NaN();
    scale = mode.assumed_sigma;
  }

  for (int k = 1; k <= K; ++k) {
    if (recruited_stages[k] != analysis_stage) continue;  // arm dropped earlier
    const double diff = mean[k] - mean[0];
    const double w = std::sqrt(1.0 / static_cast<double>(out.cumulative_n[0]) +
                               1.0 / static_cast<double>(out.cumulative_n[k]));
    out.t[k - 1] = scale > 0.0 ? diff / (scale * w) : degenerate_statistic(diff);
  }
  return out;
}

TrialResult run_trial(const Design& design, const RealizedResponses& responses,
                      const StatisticMode& mode) {
  const int K = responses.arms;
  const int J = design.stages();
  design.validate(K);
  if (responses.stages < J || responses.n != design.n) {
    throw std::invalid_argument("run_trial: responses must provide J stages of n patients per arm");
  }

  TrialResult result;
  result.decision_stage.assign(K, 0);
  result.rejected.assign(K, 0);

  std::vector<int> recruited(K + 1, 0);
  int undecided = K;

  for (int stage = 1; stage <= J && undecided > 0; ++stage) {
    recruited[0] = stage;
    for (int k = 1; k <= K; ++k) {
      if (result.decision_stage[k - 1] == 0) recruited[k] = stage;
    }

    const StageStatistics stats = compute_statistics(responses, recruited, stage, mode);
    const double e = design.efficacy[stage - 1];
    const double f = design.futility[stage - 1];

    bool any_rejection = false;
    for (int k = 1; k <= K; ++k) {
      if (result.decision_stage[k - 1] != 0) continue;
      const double t = stats.t[k - 1];
      if (t >= e) {
        result.rejected[k - 1] = 1;
        result.decision_stage[k - 1] = stage;
        any_rejection = true;
        --undecided;
      } else if (t < f) {
        result.decision_stage[k - 1] = stage;
        --undecided;
      }
    }

    if (design.rule == StoppingRule::Simultaneous && any_rejection && undecided > 0) {
      // Whole-trial stop: undecided arms get no decision, omega_k = current stage.
      for (int k = 1; k <= K; ++k) {
        if (result.decision_stage[k - 1] == 0) result.decision_stage[k - 1] = stage;
      }
      undecided = 0;
    }
  }
  return result;
}

std::int64_t total_sample_size(const TrialResult& result, int group_size) {
  std::int64_t sum = 0;
  int max_stage = 0;
  for (std::size_t k = 0; k < result.decision_stage.size(); ++k) {
    sum += result.decision_stage[k];
    max_stage = std::max(max_stage, result.decision_stage[k]);
  }
  return static_cast<std::int64_t>(group_size) * (max_stage + sum);
}

}  // namespace mams
