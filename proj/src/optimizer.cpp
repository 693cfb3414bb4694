#include "mams/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mams/dist.hpp"
#include "mams/parallel.hpp"
#include "mams/rng.hpp"

namespace mams {

void ObjectiveSpec::validate() const {
  if (w1 < 0.0 || w2 < 0.0 || w3 < 0.0) {
    throw std::invalid_argument("objective: weights must be nonnegative");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("objective: alpha in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("objective: beta in (0,1)");
  if (!(penalty > 0.0)) throw std::invalid_argument("objective: penalty P must be positive");
  if (delta.empty()) throw std::invalid_argument("objective: delta vector must be set");
}

double objective(const Design& design, const OCEstimate& oc_null, const OCEstimate& oc_alt,
                 const ObjectiveSpec& spec, int stages, int arms) {
  const double max_n = static_cast<double>(design.n) * stages * (arms + 1);
  double score = spec.w1 * oc_null.ess_null + spec.w2 * oc_alt.ess_alt + spec.w3 * max_n;
  double excess = 0.0;
  if (oc_null.fwer > spec.alpha) excess += (oc_null.fwer - spec.alpha) / spec.alpha;
  const double beta_hat = 1.0 - oc_alt.power;
  if (beta_hat > spec.beta) excess += (beta_hat - spec.beta) / spec.beta;
  return score + spec.penalty * excess;
}

// ---------------------------------------------------------------------------
// single-stage reference
// ---------------------------------------------------------------------------

namespace {

struct SingleStageScan {
  std::vector<double> max_t;      // max_k T_k under theta = 0
  std::vector<double> t1;         // T_1 under theta = 0
  std::vector<double> inv_scale;  // 1 / (s * w): shift multiplier for theta
};

SingleStageScan scan_single_stage(const OCEvaluator& ev, const NTable& table, int n, int arms,
                                  bool t_mode, int threads) {
  const std::uint64_t R = table.replicates;
  SingleStageScan out;
  out.max_t.resize(R);
  out.t1.resize(R);
  out.inv_scale.resize(R);

  parallel_chunks(R, threads, 8192, [&](std::uint64_t, std::uint64_t rb, std::uint64_t re) {
    for (std::uint64_t r = rb; r < re; ++r) {
      const double* row = table.row(r);
      const double N = static_cast<double>(n);
      double scale = 1.0;  // z mode: raw-deviate units
      if (t_mode) {
        double ss = 0.0;
        for (int k = 0; k <= arms; ++k) {
          const double s = row[(static_cast<std::size_t>(k) * table.stages) * 2];
          const double q = row[(static_cast<std::size_t>(k) * table.stages) * 2 + 1];
          ss += q - s * s / N;
        }
        const double df = static_cast<double>(arms + 1) * (n - 1);
        double s2 = ss / df;
        if (!(s2 > 0.0)) s2 = 0.0;
        scale = std::sqrt(s2);
      }
      const double w = std::sqrt(2.0 / N);
      const double mean0 = row[0] / N;
      const double denom = scale * w;
      double best = -1e300;
      double first = 0.0;
      for (int k = 1; k <= arms; ++k) {
        const double d = row[(static_cast<std::size_t>(k) * table.stages) * 2] / N - mean0;
        const double t = denom > 0.0 ? d / denom : degenerate_statistic(d);
        if (t > best) best = t;
        if (k == 1) first = t;
      }
      out.max_t[r] = best;
      out.t1[r] = first;
      out.inv_scale[r] = denom > 0.0 ? 1.0 / denom : 0.0;
    }
  });
  (void)ev;
  return out;
}

struct SingleStageEval {
  double e1 = 0.0;
  double fwer = 0.0;
  double power = 0.0;
};

SingleStageEval eval_single_stage(const SingleStageScan& scan, double alpha,
                                  double standardized_delta1) {
  const std::uint64_t R = scan.max_t.size();
  const std::uint64_t allowed = static_cast<std::uint64_t>(alpha * static_cast<double>(R));

  SingleStageEval out;
  if (allowed == 0) {
    out.e1 = 1e300;
  } else {
    // smallest boundary leaving at most floor(alpha*R) replicates above it
    std::vector<double> sorted(scan.max_t);
    const std::size_t idx = sorted.size() - static_cast<std::size_t>(allowed);
    std::nth_element(sorted.begin(), sorted.begin() + idx, sorted.end());
    out.e1 = sorted[idx];
  }

  std::uint64_t rejects = 0, hits = 0;
  for (std::uint64_t r = 0; r < R; ++r) {
    if (scan.max_t[r] >= out.e1) ++rejects;
    if (scan.t1[r] + standardized_delta1 * scan.inv_scale[r] >= out.e1) ++hits;
  }
  out.fwer = static_cast<double>(rejects) / static_cast<double>(R);
  out.power = static_cast<double>(hits) / static_cast<double>(R);
  return out;
}

}  // namespace

SingleStageResult single_stage_reference(const TrialSettings& settings,
                                         const StatisticMode& mode, const ResponseBank& bank,
                                         int threads) {
  settings.validate();
  const int K = settings.arms;
  const int n_max = bank.config().n_max;
  const double sigma = std::sqrt(settings.sigma2);
  const double standardized_delta1 = settings.delta1 / sigma;
  if (!(standardized_delta1 > 0.0)) {
    throw std::invalid_argument("single_stage_reference: delta1 must be positive");
  }

  OCEvaluator ev(bank, threads);
  std::vector<char> known(static_cast<std::size_t>(n_max) + 1, 0);
  std::vector<SingleStageEval> evals(static_cast<std::size_t>(n_max) + 1);

  const auto feasible = [&](int n) -> const SingleStageEval& {
    if (!known[n]) {
      auto table = ev.table_for(n);
      const auto scan = scan_single_stage(ev, *table, n, K, mode.is_t(), threads);
      evals[n] = eval_single_stage(scan, settings.alpha, standardized_delta1);
      known[n] = 1;
    }
    return evals[n];
  };
  const auto ok = [&](int n) { return feasible(n).power >= 1.0 - settings.beta; };

  // Normal-approximation warm start (Sidak-adjusted for K comparisons), then
  // walk to the exact simulated boundary.
  const double z_a = std_normal_quantile(std::pow(1.0 - settings.alpha, 1.0 / K));
  const double z_b = std_normal_quantile(1.0 - settings.beta);
  int n = static_cast<int>(std::ceil(2.0 * (z_a + z_b) * (z_a + z_b) /
                                     (standardized_delta1 * standardized_delta1)));
  n = std::clamp(n, 2, n_max);

  if (ok(n)) {
    while (n > 2 && ok(n - 1)) --n;
  } else {
    while (!ok(n)) {
      ++n;
      if (n > n_max) {
        throw std::runtime_error(
            "single_stage_reference: required group size exceeds bank capacity n_max=" +
            std::to_string(n_max) + "; enlarge the reference bank");
      }
    }
  }

  const SingleStageEval& e = feasible(n);
  SingleStageResult out;
  out.n = n;
  out.e1 = e.e1;
  out.fwer = e.fwer;
  out.power = e.power;
  out.total = static_cast<std::int64_t>(n) * (K + 1);
  return out;
}

// ---------------------------------------------------------------------------
// cross-entropy optimizer
// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> CEConfig::default_box(int stages) {
  // f_1..f_{J-1} in [-1, 4]; e_1..e_{J-1} in [0, 6]; c_J in [0, 6]. The
  // futility floor keeps the proposal away from the inert -infinity
  // direction; override per coordinate if a design needs more room.
  std::vector<std::pair<double, double>> box;
  for (int j = 1; j < stages; ++j) box.emplace_back(-1.0, 4.0);
  for (int j = 1; j < stages; ++j) box.emplace_back(0.0, 6.0);
  box.emplace_back(0.0, 6.0);
  return box;
}

void CEConfig::validate(int stages) const {
  if (population < 2) throw std::invalid_argument("ce: population must be >= 2");
  if (!(elite_frac > 0.0 && elite_frac <= 1.0)) {
    throw std::invalid_argument("ce: elite_frac must lie in (0,1]");
  }
  if (population * elite_frac < 2.0) {
    throw std::invalid_argument("ce: population * elite_frac must be >= 2");
  }
  if (!(smoothing > 0.0 && smoothing <= 1.0)) {
    throw std::invalid_argument("ce: smoothing must lie in (0,1]");
  }
  if (max_iters < 1) throw std::invalid_argument("ce: max_iters must be >= 1");
  if (!(tol_sd > 0.0)) throw std::invalid_argument("ce: tol_sd must be positive");
  if (n_lo < 2) throw std::invalid_argument("ce: n_lo must be >= 2 for a valid design");
  if (n_hi < n_lo) throw std::invalid_argument("ce: n_hi must be >= n_lo");
  const std::size_t want = 2 * (static_cast<std::size_t>(stages) - 1) + 1;
  if (boundary_box.size() != want) {
    throw std::invalid_argument("ce: boundary_box needs " + std::to_string(want) +
                                " coordinate ranges for J=" + std::to_string(stages));
  }
  for (const auto& [lo, hi] : boundary_box) {
    if (!(lo < hi)) throw std::invalid_argument("ce: each box range needs lo < hi");
  }
}

namespace {

struct Proposal {
  std::vector<double> n_probs;  // categorical over n_lo..n_hi
  std::vector<double> mu;
  std::vector<double> sd;

  double mean_n(int n_lo) const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_probs.size(); ++i) m += n_probs[i] * (n_lo + double(i));
    return m;
  }
  double sd_n(int n_lo) const {
    const double m = mean_n(n_lo);
    double v = 0.0;
    for (std::size_t i = 0; i < n_probs.size(); ++i) {
      const double d = n_lo + double(i) - m;
      v += n_probs[i] * d * d;
    }
    return std::sqrt(v);
  }
  double spread(int n_lo) const {
    double s = sd_n(n_lo);
    for (double v : sd) s = std::max(s, v);
    return s;
  }
};

double sample_truncated_normal(UniformStream& rng, double mu, double sd, double lo, double hi) {
  if (sd <= 1e-12) return std::clamp(mu, lo, hi);
  const double a = std_normal_cdf((lo - mu) / sd);
  const double b = std_normal_cdf((hi - mu) / sd);
  if (b - a <= 1e-300) return std::clamp(mu, lo, hi);
  const double u = a + rng.next_uniform() * (b - a);
  const double z = std_normal_quantile(std::clamp(u, 1e-17, 1.0 - 1e-17));
  return std::clamp(mu + sd * z, lo, hi);
}

Design assemble_design(int stages, int n, const std::vector<double>& coords, StoppingRule rule) {
  Design d;
  d.n = n;
  d.rule = rule;
  d.futility.assign(coords.begin(), coords.begin() + (stages - 1));
  d.efficacy.assign(coords.begin() + (stages - 1), coords.begin() + 2 * (stages - 1));
  const double tie = coords.back();
  d.futility.push_back(tie);
  d.efficacy.push_back(tie);
  return d;
}

bool interim_constraints_ok(int stages, const std::vector<double>& coords) {
  for (int j = 0; j < stages - 1; ++j) {
    if (!(coords[j] < coords[stages - 1 + j])) return false;
  }
  return true;
}

}  // namespace

OptimResult ce_optimize(const TrialSettings& settings, StoppingRule rule,
                        const ObjectiveSpec& spec, const CEConfig& ce, const ResponseBank& bank,
                        int threads) {
  settings.validate();
  spec.validate();
  ce.validate(settings.stages);
  if (settings.arms != bank.config().arms || settings.stages != bank.config().stages) {
    throw std::invalid_argument("ce_optimize: bank geometry does not match the settings");
  }
  if (ce.n_hi > bank.config().n_max) {
    throw std::invalid_argument("ce_optimize: n_hi exceeds bank capacity n_max");
  }

  const int J = settings.stages;
  const int K = settings.arms;
  const int n_vals = ce.n_hi - ce.n_lo + 1;
  const int dim = 2 * (J - 1) + 1;
  const double sigma_true = std::sqrt(settings.sigma2);

  Proposal prop;
  prop.n_probs.assign(n_vals, 1.0 / n_vals);
  prop.mu.resize(dim);
  prop.sd.resize(dim);
  if (ce.init_design.has_value()) {
    const Design& init = *ce.init_design;
    if (init.stages() != J) throw std::invalid_argument("ce: init design has wrong stage count");
    for (int j = 0; j < J - 1; ++j) prop.mu[j] = init.futility[j];
    for (int j = 0; j < J - 1; ++j) prop.mu[J - 1 + j] = init.efficacy[j];
    prop.mu[dim - 1] = init.efficacy[J - 1];
  } else {
    for (int j = 0; j < J - 1; ++j) prop.mu[j] = 0.0;
    for (int j = 0; j < J - 1; ++j) prop.mu[J - 1 + j] = 2.0;
    prop.mu[dim - 1] = 2.0;
  }
  for (int c = 0; c < dim; ++c) {
    prop.mu[c] = std::clamp(prop.mu[c], ce.boundary_box[c].first, ce.boundary_box[c].second);
    prop.sd[c] = 0.25 * (ce.boundary_box[c].second - ce.boundary_box[c].first);
  }

  UniformStream rng{RngStream{ce.seed, 0xCE00000000000001ULL, 0}};
  OCEvaluator evaluator(bank, threads);

  struct Candidate {
    int n = 0;
    std::vector<double> coords;
    double score = 0.0;
    OCEstimate oc_null, oc_alt;
  };

  OptimResult result;
  double best_score = std::numeric_limits<double>::infinity();
  const int elite_count = static_cast<int>(std::ceil(ce.population * ce.elite_frac));

  for (int iter = 1; iter <= ce.max_iters; ++iter) {
    // --- sample population (single-threaded, deterministic) ---
    std::vector<Candidate> pop(ce.population);
    for (auto& cand : pop) {
      double u = rng.next_uniform();
      int ni = 0;
      double acc = 0.0;
      for (; ni < n_vals - 1; ++ni) {
        acc += prop.n_probs[ni];
        if (u < acc) break;
      }
      cand.n = ce.n_lo + ni;

      cand.coords.resize(dim);
      bool ok = false;
      for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        for (int c = 0; c < dim; ++c) {
          cand.coords[c] = sample_truncated_normal(rng, prop.mu[c], prop.sd[c],
                                                   ce.boundary_box[c].first,
                                                   ce.boundary_box[c].second);
        }
        ok = interim_constraints_ok(J, cand.coords);
      }
      if (!ok) {
        throw std::runtime_error(
            "ce_optimize: could not sample a design with f_j < e_j at interim stages; "
            "the boundary box appears infeasible");
      }
    }

    // --- evaluate, grouped by n so each table is built once ---
    std::vector<int> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return pop[a].n < pop[b].n; });
    std::size_t g = 0;
    while (g < order.size()) {
      std::size_t h = g;
      while (h < order.size() && pop[order[h]].n == pop[order[g]].n) ++h;
      auto table = evaluator.table_for(pop[order[g]].n);
      parallel_chunks(h - g, threads, 1, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
        for (std::uint64_t idx = b; idx < e; ++idx) {
          Candidate& cand = pop[order[g + idx]];
          const Design design = assemble_design(J, cand.n, cand.coords, rule);
          auto [oc0, oc1] = evaluator.evaluate_pair_on(*table, design, settings.t_mode(),
                                                       spec.delta, sigma_true);
          cand.score = objective(design, oc0, oc1, spec, J, K);
          cand.oc_null = std::move(oc0);
          cand.oc_alt = std::move(oc1);
        }
      });
      g = h;
    }

    // --- track best-ever ---
    std::vector<int> rank(pop.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(),
                     [&](int a, int b) { return pop[a].score < pop[b].score; });
    const Candidate& top = pop[rank[0]];
    if (top.score < best_score) {
      best_score = top.score;
      result.best = assemble_design(J, top.n, top.coords, rule);
      result.score = top.score;
      result.oc_null = top.oc_null;
      result.oc_alt = top.oc_alt;
    }

    // --- refit proposal to the elite fraction ---
    const double lam = ce.smoothing;
    std::vector<double> freq(n_vals, 0.0);
    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (int i = 0; i < elite_count; ++i) {
      const Candidate& cand = pop[rank[i]];
      freq[cand.n - ce.n_lo] += 1.0;
      for (int c = 0; c < dim; ++c) mean[c] += cand.coords[c];
    }
    for (int c = 0; c < dim; ++c) mean[c] /= elite_count;
    for (int i = 0; i < elite_count; ++i) {
      const Candidate& cand = pop[rank[i]];
      for (int c = 0; c < dim; ++c) {
        const double d = cand.coords[c] - mean[c];
        var[c] += d * d;
      }
    }
    for (int c = 0; c < dim; ++c) {
      prop.mu[c] = lam * mean[c] + (1.0 - lam) * prop.mu[c];
      prop.sd[c] = lam * std::sqrt(var[c] / elite_count) + (1.0 - lam) * prop.sd[c];
    }
    for (int i = 0; i < n_vals; ++i) {
      prop.n_probs[i] = lam * freq[i] / elite_count + (1.0 - lam) * prop.n_probs[i];
    }

    CETraceRow row;
    row.iteration = iter;
    row.best_score = best_score;
    row.mean_n = prop.mean_n(ce.n_lo);
    row.sd_n = prop.sd_n(ce.n_lo);
    row.coord_mean = prop.mu;
    row.coord_sd = prop.sd;
    row.elite_threshold = pop[rank[elite_count - 1]].score;
    result.trace.push_back(std::move(row));
    result.iterations = iter;

    if (prop.spread(ce.n_lo) < ce.tol_sd) {
      result.converged = true;
      break;
    }
  }

  result.feasible = result.oc_null.fwer <= spec.alpha && (1.0 - result.oc_alt.power) <= spec.beta;
  return result;
}

}  // namespace mams
