#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mams/bank.hpp"
#include "mams/trial.hpp"

namespace mams {

// Monte Carlo operating characteristics at one effect vector. fwer is the
// rate of rejecting any arm whose true effect is <= 0; power the rejection
// rate of arm 1. The expected-sample-size slot matching the evaluated theta
// is filled (ess_null when theta == 0, ess_alt otherwise); the other is NaN.
struct OCEstimate {
  double fwer = 0.0;
  double power = 0.0;
  double ess_null = 0.0;
  double ess_alt = 0.0;
  std::vector<double> per_arm_rejection;
  std::uint64_t replicates = 0;
};

struct EvalTask {
  Design design;
  StatisticMode mode;
  EffectVector theta;
  double sigma_true = 1.0;
  const ResponseBank* bank = nullptr;
};

// Per-group-size sufficient statistics: for every replicate, the sum and sum
// of squares of the first n deviates of each (arm, stage) block. Everything
// a trial's statistics need, at O((K+1)J) numbers per replicate.
struct NTable {
  int n = 0;
  int arms = 0;    // K
  int stages = 0;  // bank stages
  std::uint64_t replicates = 0;
  std::vector<double> values;  // [r][(k*stages + j)*2 + {sum, sumsq}]

  std::size_t row_stride() const {
    return static_cast<std::size_t>(arms + 1) * stages * 2;
  }
  const double* row(std::uint64_t r) const { return values.data() + r * row_stride(); }
};

// Evaluates designs on one bank, caching per-n tables (LRU). Thread-safe.
class OCEvaluator {
 public:
  explicit OCEvaluator(const ResponseBank& bank, int threads = 1);

  std::shared_ptr<const NTable> table_for(int n);

  OCEstimate evaluate(const Design& design, const StatisticMode& mode,
                      const EffectVector& theta, double sigma_true);

  // (OC at theta = 0, OC at theta = delta), on the same replicates.
  std::pair<OCEstimate, OCEstimate> evaluate_pair(const Design& design,
                                                  const StatisticMode& mode,
                                                  const EffectVector& delta,
                                                  double sigma_true);

  // Single-threaded variants on an explicit table, for callers that already
  // parallelize across evaluations.
  OCEstimate evaluate_on(const NTable& table, const Design& design, const StatisticMode& mode,
                         const EffectVector& theta, double sigma_true) const;
  std::pair<OCEstimate, OCEstimate> evaluate_pair_on(const NTable& table, const Design& design,
                                                     const StatisticMode& mode,
                                                     const EffectVector& delta,
                                                     double sigma_true) const;

  const ResponseBank& bank() const { return bank_; }
  int threads() const { return threads_; }
  void set_cache_capacity(std::size_t cap);

 private:
  const ResponseBank& bank_;
  int threads_;
  std::size_t cache_capacity_ = 48;
  std::mutex mu_;
  std::unordered_map<int, std::shared_ptr<const NTable>> cache_;
  std::list<int> lru_;
};

OCEstimate estimate_oc(const EvalTask& task, int threads = 1);

std::pair<OCEstimate, OCEstimate> estimate_oc_pair(const Design& design,
                                                   const StatisticMode& mode,
                                                   const EffectVector& delta, double sigma_true,
                                                   const ResponseBank& bank, int threads = 1);

struct ScanPoint {
  EffectVector theta;
  double error_rate = 0.0;  // rejection rate among arms with theta_k <= 0
  int true_null_arms = 0;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  double max_rate = 0.0;
};

ScanResult fwer_scan(const Design& design, const StatisticMode& mode,
                     const std::vector<EffectVector>& theta_list, double sigma_true,
                     const ResponseBank& bank, int threads = 1);

}  // namespace mams
