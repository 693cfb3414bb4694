#include "mams/oc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mams/parallel.hpp"

namespace mams {

namespace {

constexpr std::uint64_t kChunk = 8192;  // fixed so results never depend on thread count

bool is_null_vector(const EffectVector& theta) {
  for (double v : theta) {
    if (v != 0.0) return false;
  }
  return true;
}

// Everything the per-replicate state machine needs, resolved once per
// (design, mode, theta, sigma) so the replicate loop touches no strings or
// vectors of unknown size.
struct FastParams {
  int arms = 0;         // K
  int bank_stages = 0;  // stage stride in the table rows
  int stages = 0;       // design stages J
  int n = 0;
  StoppingRule rule = StoppingRule::Simultaneous;
  bool t_mode = true;
  bool zero_padded = true;
  double sigma_true = 1.0;
  double assumed_sigma = 1.0;
  std::vector<double> shift;      // t: theta_k / sigma_true, z: theta_k
  std::vector<double> efficacy;   // e_1..e_J
  std::vector<double> futility;   // f_1..f_J
  std::vector<double> half_w;     // sqrt(2 / (n*j)) for j = 1..J
  std::vector<double> inv_n;      // 1 / (n*j), indexed by recruited stages
};

FastParams make_params(const NTable& table, const Design& design, const StatisticMode& mode,
                       const EffectVector& theta, double sigma_true) {
  FastParams p;
  p.arms = table.arms;
  p.bank_stages = table.stages;
  p.stages = design.stages();
  p.n = design.n;
  p.rule = design.rule;
  p.t_mode = mode.is_t();
  p.zero_padded = mode.variance == VarianceConvention::ZeroPadded;
  p.sigma_true = sigma_true;
  p.assumed_sigma = mode.assumed_sigma;
  p.shift.resize(p.arms);
  for (int k = 0; k < p.arms; ++k) {
    // In t mode the data scale cancels out of the statistic, so sigma_true
    // enters only through the standardized shift. Under theta = 0 the
    // computation is therefore identical for every sigma_true.
    p.shift[k] = p.t_mode ? theta[k] / sigma_true : theta[k];
  }
  p.efficacy = design.efficacy;
  p.futility = design.futility;
  p.half_w.resize(p.stages);
  p.inv_n.resize(p.stages + 1);
  p.inv_n[0] = 0.0;
  for (int j = 1; j <= p.stages; ++j) {
    p.half_w[j - 1] = std::sqrt(2.0 / (static_cast<double>(p.n) * j));
    p.inv_n[j] = 1.0 / (static_cast<double>(p.n) * j);
  }
  return p;
}

struct Scratch {
  std::vector<double> sum;    // cumulative deviate sum per arm
  std::vector<double> sumsq;  // cumulative squared-deviate sum per arm
  std::vector<int> recruited;
  std::vector<int> omega;
  std::vector<std::uint8_t> psi;

  void resize(int arms) {
    sum.assign(arms + 1, 0.0);
    sumsq.assign(arms + 1, 0.0);
    recruited.assign(arms + 1, 0);
    omega.assign(arms, 0);
    psi.assign(arms, 0);
  }
};

// Runs the five-step test on one replicate's sufficient statistics. Active
// arms and the control are always recruited through the current stage, so
// they share N = n*j and the same standard-error weight.
void simulate_replicate(const double* row, const FastParams& p, Scratch& sc) {
  const int K = p.arms;
  std::fill(sc.sum.begin(), sc.sum.end(), 0.0);
  std::fill(sc.sumsq.begin(), sc.sumsq.end(), 0.0);
  std::fill(sc.recruited.begin(), sc.recruited.end(), 0);
  std::fill(sc.omega.begin(), sc.omega.end(), 0);
  std::fill(sc.psi.begin(), sc.psi.end(), 0);

  int undecided = K;
  for (int stage = 1; stage <= p.stages && undecided > 0; ++stage) {
    const int js = stage - 1;
    // accumulate this stage's block sums for the control and active arms
    for (int k = 0; k <= K; ++k) {
      if (k > 0 && sc.omega[k - 1] != 0) continue;
      const double* cell = row + (static_cast<std::size_t>(k) * p.bank_stages + js) * 2;
      sc.sum[k] += cell[0];
      sc.sumsq[k] += cell[1];
      sc.recruited[k] = stage;
    }

    double inv_sw;  // 1 / (s * w) with s in raw-deviate units
    bool degenerate = false;
    const double w = p.half_w[js];
    if (p.t_mode) {
      double ss = 0.0;
      int total_stages = 0;
      for (int k = 0; k <= K; ++k) {
        ss += sc.sumsq[k] - sc.sum[k] * sc.sum[k] * p.inv_n[sc.recruited[k]];
        total_stages += sc.recruited[k];
      }
      if (p.zero_padded && stage > 1) {
        // literal-zero responses for post-drop stages, in raw-deviate units:
        // the response mean is sigma_true * (shift_k + raw mean)
        for (int k = 1; k <= K; ++k) {
          const int missing = stage - sc.recruited[k];
          if (missing > 0) {
            const double m = p.shift[k - 1] + sc.sum[k] * p.inv_n[sc.recruited[k]];
            ss += static_cast<double>(p.n) * missing * m * m;
          }
        }
      }
      const double df = static_cast<double>(p.n) * total_stages - (K + 1);
      const double s2 = ss / df;
      if (s2 > 0.0) {
        inv_sw = 1.0 / (std::sqrt(s2) * w);
      } else {
        inv_sw = 0.0;
        degenerate = true;
      }
    } else {
      inv_sw = 1.0 / (p.assumed_sigma * w);
    }

    const double inv_n0 = p.inv_n[stage];
    const double mean0 = sc.sum[0] * inv_n0;
    const double e = p.efficacy[js];
    const double f = p.futility[js];

    bool any_rejection = false;
    for (int k = 1; k <= K; ++k) {
      if (sc.omega[k - 1] != 0) continue;
      const double d = sc.sum[k] * inv_n0 - mean0;
      double t;
      if (p.t_mode) {
        const double num = p.shift[k - 1] + d;
        t = degenerate ? degenerate_statistic(num) : num * inv_sw;
      } else {
        t = (p.shift[k - 1] + p.sigma_true * d) * inv_sw;
      }
      if (t >= e) {
        sc.psi[k - 1] = 1;
        sc.omega[k - 1] = stage;
        any_rejection = true;
        --undecided;
      } else if (t < f) {
        sc.omega[k - 1] = stage;
        --undecided;
      }
    }

    if (p.rule == StoppingRule::Simultaneous && any_rejection && undecided > 0) {
      for (int k = 0; k < K; ++k) {
        if (sc.omega[k] == 0) sc.omega[k] = stage;
      }
      undecided = 0;
    }
  }
}

struct Counts {
  std::int64_t true_null_rejections = 0;
  std::int64_t arm1_rejections = 0;
  std::int64_t sample_size_sum = 0;
  std::vector<std::int64_t> arm_rejections;

  explicit Counts(int arms) : arm_rejections(arms, 0) {}
  Counts& operator+=(const Counts& o) {
    true_null_rejections += o.true_null_rejections;
    arm1_rejections += o.arm1_rejections;
    sample_size_sum += o.sample_size_sum;
    for (std::size_t k = 0; k < arm_rejections.size(); ++k) {
      arm_rejections[k] += o.arm_rejections[k];
    }
    return *this;
  }
};

void tally(const Scratch& sc, const std::vector<std::uint8_t>& true_null, int n, Counts& c) {
  const int K = static_cast<int>(sc.omega.size());
  int max_stage = 0;
  std::int64_t stage_sum = 0;
  bool null_hit = false;
  for (int k = 0; k < K; ++k) {
    max_stage = std::max(max_stage, sc.omega[k]);
    stage_sum += sc.omega[k];
    if (sc.psi[k]) {
      ++c.arm_rejections[k];
      if (true_null[k]) null_hit = true;
    }
  }
  if (null_hit) ++c.true_null_rejections;
  if (sc.psi[0]) ++c.arm1_rejections;
  c.sample_size_sum += static_cast<std::int64_t>(n) * (max_stage + stage_sum);
}

OCEstimate finalize(const Counts& c, std::uint64_t replicates, bool theta_is_null) {
  OCEstimate oc;
  oc.replicates = replicates;
  const double R = static_cast<double>(replicates);
  oc.fwer = static_cast<double>(c.true_null_rejections) / R;
  oc.power = static_cast<double>(c.arm1_rejections) / R;
  const double ess = static_cast<double>(c.sample_size_sum) / R;
  oc.ess_null = theta_is_null ? ess : std::numeric_limits<double>::quiet_NaN();
  oc.ess_alt = theta_is_null ? std::numeric_limits<double>::quiet_NaN() : ess;
  oc.per_arm_rejection.resize(c.arm_rejections.size());
  for (std::size_t k = 0; k < c.arm_rejections.size(); ++k) {
    oc.per_arm_rejection[k] = static_cast<double>(c.arm_rejections[k]) / R;
  }
  return oc;
}

std::vector<std::uint8_t> true_null_mask(const EffectVector& theta) {
  std::vector<std::uint8_t> mask(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) mask[k] = theta[k] <= 0.0 ? 1 : 0;
  return mask;
}

void check_task(const NTable& table, const Design& design, const EffectVector& theta) {
  design.validate(table.arms);
  if (design.stages() > table.stages) {
    throw std::invalid_argument("estimate_oc: design has more stages than the bank");
  }
  if (static_cast<int>(theta.size()) != table.arms) {
    throw std::invalid_argument("estimate_oc: effect vector size must equal K");
  }
}

Counts scan_range(const NTable& table, const FastParams& p,
                  const std::vector<std::uint8_t>& mask, std::uint64_t rb, std::uint64_t re) {
  Counts c(p.arms);
  Scratch sc;
  sc.resize(p.arms);
  for (std::uint64_t r = rb; r < re; ++r) {
    simulate_replicate(table.row(r), p, sc);
    tally(sc, mask, p.n, c);
  }
  return c;
}

}  // namespace

OCEvaluator::OCEvaluator(const ResponseBank& bank, int threads)
    : bank_(bank), threads_(threads < 1 ? 1 : threads) {}

void OCEvaluator::set_cache_capacity(std::size_t cap) {
  std::lock_guard<std::mutex> lk(mu_);
  cache_capacity_ = cap == 0 ? 1 : cap;
}

std::shared_ptr<const NTable> OCEvaluator::table_for(int n) {
  const BankConfig& cfg = bank_.config();
  if (n < 1 || n > cfg.n_max) {
    throw std::invalid_argument("table_for: group size " + std::to_string(n) +
                                " exceeds bank capacity n_max=" + std::to_string(cfg.n_max));
  }
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = cache_.find(n);
    if (it != cache_.end()) {
      lru_.remove(n);
      lru_.push_front(n);
      return it->second;
    }
  }

  auto table = std::make_shared<NTable>();
  table->n = n;
  table->arms = cfg.arms;
  table->stages = cfg.stages;
  table->replicates = cfg.replicates;
  table->values.resize(cfg.replicates * table->row_stride());

  const int total_arms = cfg.arms + 1;
  const std::size_t block = static_cast<std::size_t>(cfg.stages) * cfg.n_max;
  parallel_chunks(cfg.replicates, threads_, 1024,
                  [&](std::uint64_t, std::uint64_t rb, std::uint64_t re) {
                    std::vector<double> buf(block);
                    for (std::uint64_t r = rb; r < re; ++r) {
                      double* out = table->values.data() + r * table->row_stride();
                      for (int k = 0; k < total_arms; ++k) {
                        const double* src = bank_.arm_block_ptr(r, k);
                        if (src == nullptr) {
                          bank_.fill_arm_block(r, k, buf.data());
                          src = buf.data();
                        }
                        for (int j = 0; j < cfg.stages; ++j) {
                          double s = 0.0, q = 0.0;
                          const double* z = src + static_cast<std::size_t>(j) * cfg.n_max;
                          for (int i = 0; i < n; ++i) {
                            s += z[i];
                            q += z[i] * z[i];
                          }
                          out[(static_cast<std::size_t>(k) * cfg.stages + j) * 2] = s;
                          out[(static_cast<std::size_t>(k) * cfg.stages + j) * 2 + 1] = q;
                        }
                      }
                    }
                  });

  std::lock_guard<std::mutex> lk(mu_);
  auto [it, inserted] = cache_.emplace(n, std::move(table));
  if (inserted) {
    lru_.push_front(n);
    while (lru_.size() > cache_capacity_) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
  }
  return it->second;
}

OCEstimate OCEvaluator::evaluate(const Design& design, const StatisticMode& mode,
                                 const EffectVector& theta, double sigma_true) {
  auto table = table_for(design.n);
  check_task(*table, design, theta);
  const FastParams p = make_params(*table, design, mode, theta, sigma_true);
  const auto mask = true_null_mask(theta);

  const std::uint64_t R = table->replicates;
  const std::uint64_t n_chunks = (R + kChunk - 1) / kChunk;
  std::vector<Counts> partial(n_chunks, Counts(p.arms));
  parallel_chunks(R, threads_, kChunk,
                  [&](std::uint64_t c, std::uint64_t rb, std::uint64_t re) {
                    partial[c] = scan_range(*table, p, mask, rb, re);
                  });
  Counts total(p.arms);
  for (const auto& c : partial) total += c;
  return finalize(total, R, is_null_vector(theta));
}

std::pair<OCEstimate, OCEstimate> OCEvaluator::evaluate_pair(const Design& design,
                                                             const StatisticMode& mode,
                                                             const EffectVector& delta,
                                                             double sigma_true) {
  OCEstimate at_null = evaluate(design, mode, EffectVector(delta.size(), 0.0), sigma_true);
  OCEstimate at_delta = evaluate(design, mode, delta, sigma_true);
  return {std::move(at_null), std::move(at_delta)};
}

OCEstimate OCEvaluator::evaluate_on(const NTable& table, const Design& design,
                                    const StatisticMode& mode, const EffectVector& theta,
                                    double sigma_true) const {
  check_task(table, design, theta);
  const FastParams p = make_params(table, design, mode, theta, sigma_true);
  const auto mask = true_null_mask(theta);
  const Counts total = scan_range(table, p, mask, 0, table.replicates);
  return finalize(total, table.replicates, is_null_vector(theta));
}

std::pair<OCEstimate, OCEstimate> OCEvaluator::evaluate_pair_on(const NTable& table,
                                                                const Design& design,
                                                                const StatisticMode& mode,
                                                                const EffectVector& delta,
                                                                double sigma_true) const {
  OCEstimate at_null =
      evaluate_on(table, design, mode, EffectVector(delta.size(), 0.0), sigma_true);
  OCEstimate at_delta = evaluate_on(table, design, mode, delta, sigma_true);
  return {std::move(at_null), std::move(at_delta)};
}

OCEstimate estimate_oc(const EvalTask& task, int threads) {
  if (task.bank == nullptr) throw std::invalid_argument("estimate_oc: task has no bank");
  OCEvaluator ev(*task.bank, threads);
  return ev.evaluate(task.design, task.mode, task.theta, task.sigma_true);
}

std::pair<OCEstimate, OCEstimate> estimate_oc_pair(const Design& design,
                                                   const StatisticMode& mode,
                                                   const EffectVector& delta, double sigma_true,
                                                   const ResponseBank& bank, int threads) {
  OCEvaluator ev(bank, threads);
  return ev.evaluate_pair(design, mode, delta, sigma_true);
}

ScanResult fwer_scan(const Design& design, const StatisticMode& mode,
                     const std::vector<EffectVector>& theta_list, double sigma_true,
                     const ResponseBank& bank, int threads) {
  OCEvaluator ev(bank, threads);
  ScanResult result;
  result.points.reserve(theta_list.size());
  for (const auto& theta : theta_list) {
    for (double v : theta) {
      if (!std::isfinite(v)) throw std::invalid_argument("fwer_scan: theta must be finite");
    }
    const OCEstimate oc = ev.evaluate(design, mode, theta, sigma_true);
    ScanPoint pt;
    pt.theta = theta;
    pt.error_rate = oc.fwer;
    for (double v : theta) {
      if (v <= 0.0) ++pt.true_null_arms;
    }
    result.max_rate = std::max(result.max_rate, pt.error_rate);
    result.points.push_back(std::move(pt));
  }
  return result;
}

}  // namespace mams
