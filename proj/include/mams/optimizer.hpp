#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mams/oc.hpp"
#include "mams/trial.hpp"

namespace mams {

// Weighted sample-size objective with the relative-excess penalty for
// designs that miss the error-rate targets.
struct ObjectiveSpec {
  double w1 = 1.0 / 3.0;  // weight on ESS(0)
  double w2 = 1.0 / 3.0;  // weight on ESS(delta)
  double w3 = 1.0 / 3.0;  // weight on the maximal sample size n*J*(K+1)
  double alpha = 0.05;
  double beta = 0.1;
  double penalty = 0.0;  // P, in patients
  EffectVector delta;    // least favourable configuration

  void validate() const;
};

double objective(const Design& design, const OCEstimate& oc_null, const OCEstimate& oc_alt,
                 const ObjectiveSpec& spec, int stages, int arms);

// Cross-entropy optimizer configuration. The boundary vector being optimized
// is (f_1..f_{J-1}, e_1..e_{J-1}, c_J) with e_J = f_J = c_J.
struct CEConfig {
  int population = 1000;
  double elite_frac = 0.1;
  double smoothing = 0.7;  // weight on the freshly fitted elite statistics
  int max_iters = 100;
  double tol_sd = 0.01;
  int n_lo = 2;
  int n_hi = 2;
  std::vector<std::pair<double, double>> boundary_box;  // per-coordinate [lo, hi]
  std::uint64_t seed = 1;
  std::optional<Design> init_design;  // warm-start proposal means

  static std::vector<std::pair<double, double>> default_box(int stages);
  void validate(int stages) const;
};

struct CETraceRow {
  int iteration = 0;
  double best_score = 0.0;  // best-ever score so far
  double mean_n = 0.0;
  double sd_n = 0.0;
  std::vector<double> coord_mean;
  std::vector<double> coord_sd;
  double elite_threshold = 0.0;
};

struct OptimResult {
  Design best;
  double score = 0.0;
  OCEstimate oc_null;
  OCEstimate oc_alt;
  bool feasible = false;
  bool converged = false;
  int iterations = 0;
  std::vector<CETraceRow> trace;
};

OptimResult ce_optimize(const TrialSettings& settings, StoppingRule rule,
                        const ObjectiveSpec& spec, const CEConfig& ce, const ResponseBank& bank,
                        int threads = 1);

// Smallest single-stage design (J = 1, e_1 = f_1) meeting the alpha and
// power targets by simulation on the given bank; its total sample size is
// the penalty scale P.
struct SingleStageResult {
  int n = 0;  // per arm
  double e1 = 0.0;
  double fwer = 0.0;
  double power = 0.0;
  std::int64_t total = 0;  // n * (K+1)
};

SingleStageResult single_stage_reference(const TrialSettings& settings,
                                         const StatisticMode& mode, const ResponseBank& bank,
                                         int threads = 1);

}  // namespace mams
