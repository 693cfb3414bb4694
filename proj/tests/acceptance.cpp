// Acceptance suite: runs every acceptance criterion at full scale and prints
// one [PASS]/[FAIL] line per criterion. Exit code = number of failed
// criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mams/comparators.hpp"
#include "mams/config.hpp"
#include "mams/dist.hpp"
#include "mams/oc.hpp"
#include "mams/optimizer.hpp"
#include "mams/rng.hpp"

namespace fs = std::filesystem;
using namespace mams;

namespace {

struct Criterion {
  std::string name;
  bool pass = true;
  std::vector<std::string> details;

  void fail(const std::string& msg) {
    pass = false;
    details.push_back(msg);
  }
  void note(const std::string& msg) { details.push_back(msg); }
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// published reference values: fwer, power, ESS(0), ESS(delta) per
// (scenario, rule, approach) across sigma2 in {0.25, 0.5, 1, 2, 4}
// ---------------------------------------------------------------------------
struct ReferenceRow {
  const char* scenario;
  const char* rule;
  const char* approach;
  double fwer[5], power[5], ess0[5], essd[5];
};

const ReferenceRow kReference[] = {
    {"scenario1", "simultaneous", "A1",
     {0.0000, 0.0035, 0.0499, 0.1816, 0.3421},
     {0.9981, 0.9776, 0.9078, 0.7986, 0.6949},
     {194.2, 210.6, 224.6, 225.3, 216.2},
     {216.4, 222.1, 222.6, 217.6, 208.8}},
    {"scenario1", "simultaneous", "A2",
     {0.0508, 0.0508, 0.0518, 0.0517, 0.0514},
     {1.0000, 0.9952, 0.9080, 0.6314, 0.3541},
     {223.8, 224.0, 224.4, 224.3, 224.0},
     {180.3, 190.4, 222.5, 246.8, 252.0}},
    {"scenario1", "simultaneous", "A3",
     {0.0491, 0.0492, 0.0501, 0.0497, 0.0496},
     {0.9999, 0.9951, 0.9068, 0.6276, 0.3498},
     {223.9, 224.1, 224.5, 224.4, 224.1},
     {180.3, 190.9, 223.6, 247.8, 252.8}},
    {"scenario1", "simultaneous", "A4",
     {0.0493, 0.0490, 0.0504, 0.0504, 0.0487},
     {0.9999, 0.9939, 0.9017, 0.6258, 0.3516},
     {216.0, 216.1, 216.7, 216.3, 216.2},
     {165.6, 190.5, 232.6, 251.3, 250.3}},
    {"scenario2", "simultaneous", "A1",
     {0.0000, 0.0035, 0.0495, 0.1820, 0.3450},
     {0.9970, 0.9740, 0.9100, 0.8120, 0.7140},
     {56.2, 60.9, 64.8, 65.0, 62.6},
     {60.6, 62.0, 62.6, 61.9, 60.2}},
    {"scenario2", "simultaneous", "A2",
     {0.0582, 0.0561, 0.0556, 0.0570, 0.0557},
     {1.0000, 0.9960, 0.9090, 0.6330, 0.3610},
     {64.7, 64.7, 64.7, 64.6, 64.8},
     {52.1, 54.7, 62.5, 68.3, 69.9}},
    {"scenario2", "simultaneous", "A3",
     {0.0519, 0.0497, 0.0500, 0.0503, 0.0495},
     {1.0000, 0.9960, 0.9030, 0.6180, 0.3450},
     {64.8, 64.8, 64.8, 64.7, 64.9},
     {52.1, 55.2, 63.4, 69.2, 70.5}},
    {"scenario2", "simultaneous", "A4",
     {0.0510, 0.0487, 0.0495, 0.0494, 0.0489},
     {1.0000, 0.9960, 0.9010, 0.6210, 0.3530},
     {63.6, 63.5, 63.5, 63.5, 63.6},
     {48.7, 55.9, 66.4, 70.7, 70.6}},
    {"scenario1", "separate", "A1",
     {0.0000, 0.0035, 0.0494, 0.1820, 0.3410},
     {0.9970, 0.9720, 0.9060, 0.8110, 0.7260},
     {185.6, 201.2, 217.0, 224.1, 222.5},
     {271.1, 270.4, 263.5, 250.0, 234.7}},
    {"scenario1", "separate", "A2",
     {0.0509, 0.0519, 0.0519, 0.0517, 0.0522},
     {1.0000, 0.9960, 0.9050, 0.6220, 0.3490},
     {216.6, 216.3, 217.0, 216.6, 216.7},
     {253.5, 255.8, 263.3, 263.3, 255.3}},
    {"scenario1", "separate", "A3",
     {0.0489, 0.0500, 0.0501, 0.0499, 0.0504},
     {1.0000, 0.9960, 0.9040, 0.6170, 0.3440},
     {216.5, 216.3, 217.0, 216.6, 216.7},
     {254.3, 256.6, 264.0, 263.9, 255.6}},
    {"scenario1", "separate", "A4",
     {0.0494, 0.0501, 0.0497, 0.0498, 0.0508},
     {1.0000, 0.9950, 0.9000, 0.6220, 0.3520},
     {205.7, 205.6, 206.2, 205.7, 205.8},
     {254.1, 257.9, 263.9, 257.9, 245.9}},
    {"scenario2", "separate", "A1",
     {0.0000, 0.0035, 0.0507, 0.1818, 0.3461},
     {0.9975, 0.9747, 0.9096, 0.8168, 0.7292},
     {56.1, 60.9, 65.5, 67.8, 67.3},
     {63.4, 67.7, 70.7, 70.9, 68.8}},
    {"scenario2", "separate", "A2",
     {0.0569, 0.0561, 0.0567, 0.0575, 0.0568},
     {1.0000, 0.9964, 0.9080, 0.6347, 0.3625},
     {65.5, 65.4, 65.5, 65.5, 65.6},
     {61.8, 64.2, 70.7, 73.9, 73.2}},
    {"scenario2", "separate", "A3",
     {0.0501, 0.0497, 0.0504, 0.0509, 0.0499},
     {1.0000, 0.9960, 0.9020, 0.6183, 0.3462},
     {65.5, 65.4, 65.5, 65.5, 65.6},
     {61.8, 64.6, 71.4, 74.4, 73.4}},
    {"scenario2", "separate", "A4",
     {0.0504, 0.0498, 0.0499, 0.0506, 0.0497},
     {1.0000, 0.9953, 0.8992, 0.6215, 0.3536},
     {62.7, 62.6, 62.7, 62.7, 62.8},
     {59.4, 65.6, 72.1, 73.0, 71.0}},
};

constexpr double kSigmaGrid[5] = {0.25, 0.5, 1.0, 2.0, 4.0};
constexpr std::uint64_t kReplicates = 100000;
constexpr std::uint64_t kBankSeed = 1000003;

ResponseBank lean_bank(std::uint64_t replicates, int arms, int stages, int n_max,
                       std::uint64_t seed) {
  BankConfig cfg;
  cfg.replicates = replicates;
  cfg.arms = arms;
  cfg.stages = stages;
  cfg.n_max = n_max;
  cfg.seed = seed;
  cfg.mode = BankMode::Lean;
  return ResponseBank::build(cfg, 2);
}

int run_cmd(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return {};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> parse_design_file(const fs::path& p) {
  std::map<std::string, std::string> kv;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

// ---------------------------------------------------------------------------
// criterion 1: published-design operating characteristics
// ---------------------------------------------------------------------------
Criterion criterion_reference_table() {
  Criterion c{"reference operating characteristics (80 cells, R = 100000)"};
  const auto sets = load_design_sets(std::string(MAMS_DATA_DIR) + "/reference_designs.csv");
  const ResponseBank bank = lean_bank(kReplicates, 3, 2, 45, kBankSeed);

  const std::vector<ScenarioSpec> scenarios{{"scenario1", 0.545, 0.178}, {"scenario2", 1.0, 0.0}};
  const std::vector<StoppingRule> rules{StoppingRule::Simultaneous, StoppingRule::Separate};
  const std::vector<ApproachTag> tags{ApproachTag::A1, ApproachTag::A2, ApproachTag::A3,
                                      ApproachTag::A4};
  const std::vector<double> grid(kSigmaGrid, kSigmaGrid + 5);

  const auto rows = evaluate_approaches(scenarios, rules, tags, grid, sets, 1.0, bank, 2);
  if (rows.size() != 80) {
    c.fail(fmt("expected 80 grid cells, got %zu", rows.size()));
    return c;
  }

  int checked = 0, bad = 0;
  for (const auto& row : rows) {
    const ReferenceRow* ref = nullptr;
    for (const auto& r : kReference) {
      if (row.scenario == r.scenario && rule_name(row.rule) == std::string(r.rule) &&
          approach_name(row.approach) == std::string(r.approach)) {
        ref = &r;
        break;
      }
    }
    if (ref == nullptr) {
      c.fail("unmatched row");
      return c;
    }
    int si = 0;
    while (kSigmaGrid[si] != row.sigma2_true) ++si;
    ++checked;
    const double dfw = row.fwer - ref->fwer[si];
    const double dpw = row.power - ref->power[si];
    const double de0 = row.ess_null - ref->ess0[si];
    const double ded = row.ess_alt - ref->essd[si];
    if (std::fabs(dfw) > 0.005 || std::fabs(dpw) > 0.007 || std::fabs(de0) > 2.0 ||
        std::fabs(ded) > 2.0) {
      ++bad;
      c.fail(fmt("%s/%s/%s sigma2=%.2f: fwer %.4f (ref %.4f), power %.4f (ref %.4f), "
                 "ess %.1f/%.1f (ref %.1f/%.1f)",
                 row.scenario.c_str(), rule_name(row.rule), approach_name(row.approach),
                 row.sigma2_true, row.fwer, ref->fwer[si], row.power, ref->power[si],
                 row.ess_null, row.ess_alt, ref->ess0[si], ref->essd[si]));
    }
  }
  c.note(fmt("%d of %d cells within tolerance (fwer +-0.005, power +-0.007, ess +-2.0)",
             checked - bad, checked));

  // Supplementary (non-gating): the failing scenario2/simultaneous column is
  // reproduced by the same design with its final-stage tie at 2.086 instead
  // of the published 2.010, pinpointing an inconsistency in the source tables.
  OCEvaluator ev(bank, 2);
  Design variant;
  variant.n = 12;
  variant.futility = {0.603, 2.086};
  variant.efficacy = {2.942, 2.086};
  variant.rule = StoppingRule::Simultaneous;
  auto [v0, v1] = ev.evaluate_pair(variant, StatisticMode::t_stat(), {1.0, 0.0, 0.0}, 1.0);
  c.note(fmt("supplementary: scenario2/sim optimal with e2=f2=2.086 gives fwer %.4f "
             "power %.4f (reference row: 0.0495 / 0.9010)",
             v0.fwer, v1.power));
  return c;
}

// ---------------------------------------------------------------------------
// criteria 2 and 3: optimizer parity and fresh-bank feasibility
// ---------------------------------------------------------------------------
struct OptimizerRun {
  std::string config_path;
  int published_n = 0;
  Design published;
  // filled by run:
  bool ok = false;
  Design best;
  double score = 0.0;
  double penalty = 0.0;
  TrialSettings settings;
  BankConfig bank_cfg;
};

bool execute_optimizer(OptimizerRun& run, const fs::path& out_dir, Criterion& c) {
  const int code = run_cmd(std::string(MAMS_BIN) + " optimize --config " + run.config_path +
                           " --threads 2 --out " + out_dir.string() + " > /dev/null");
  if (code != 0) {
    c.fail(fmt("%s: optimize exited with code %d (0 = feasible expected)",
               run.config_path.c_str(), code));
    return false;
  }
  const auto kv = parse_design_file(out_dir / "design.txt");
  if (!kv.count("n") || !kv.count("e") || !kv.count("f") || !kv.count("score") ||
      !kv.count("penalty_patients") || !kv.count("feasible")) {
    c.fail(run.config_path + ": design.txt is missing required keys");
    return false;
  }
  run.best.n = std::stoi(kv.at("n"));
  run.best.efficacy = parse_list(kv.at("e"));
  run.best.futility = parse_list(kv.at("f"));
  run.best.rule = rule_from_name(kv.at("rule"));
  run.score = std::stod(kv.at("score"));
  run.penalty = std::stod(kv.at("penalty_patients"));
  run.ok = kv.at("feasible") == "true";

  const ConfigFile cfg = ConfigFile::parse_file(run.config_path);
  const RunConfig rc = load_optimize_config(cfg, {});
  run.settings = rc.settings;
  run.bank_cfg = rc.bank;
  return true;
}

Criterion criterion_optimizer_parity(std::vector<OptimizerRun>& runs, const fs::path& work) {
  Criterion c{"optimizer parity with the published balanced-optimal designs"};
  for (auto& run : runs) {
    const fs::path out = work / fs::path(run.config_path).stem();
    if (!execute_optimizer(run, out, c)) continue;
    if (!run.ok) c.fail(run.config_path + ": returned design flagged infeasible");
    if (std::abs(run.best.n - run.published_n) > 1) {
      c.fail(fmt("%s: n = %d, published %d (tolerance +-1)", run.config_path.c_str(), run.best.n,
                 run.published_n));
    }

    // score of the published design on the same bank, same objective
    BankConfig bc = run.bank_cfg;
    bc.mode = BankMode::Lean;  // identical contents, no storage
    const ResponseBank bank = ResponseBank::build(bc, 2);
    ObjectiveSpec spec;
    spec.alpha = run.settings.alpha;
    spec.beta = run.settings.beta;
    spec.penalty = run.penalty;
    spec.delta = run.settings.lfc();
    Design pub = run.published;
    pub.rule = run.best.rule;
    auto [p0, p1] = estimate_oc_pair(pub, run.settings.t_mode(), spec.delta,
                                     std::sqrt(run.settings.sigma2), bank, 2);
    const double pub_score = objective(pub, p0, p1, spec, run.settings.stages, run.settings.arms);
    if (run.score > pub_score + 1.0) {
      c.fail(fmt("%s: score %.3f exceeds published design's %.3f + 1.0", run.config_path.c_str(),
                 run.score, pub_score));
    } else {
      c.note(fmt("%s: n=%d score %.3f vs published-on-same-bank %.3f",
                 fs::path(run.config_path).stem().string().c_str(), run.best.n, run.score,
                 pub_score));
    }
  }
  return c;
}

Criterion criterion_fresh_bank(const std::vector<OptimizerRun>& runs) {
  Criterion c{"fresh-bank feasibility re-check of optimizer-returned designs"};
  for (const auto& run : runs) {
    if (run.best.n == 0) {
      c.fail(run.config_path + ": no design to re-check");
      continue;
    }
    BankConfig bc = run.bank_cfg;
    bc.seed += 1;
    bc.mode = BankMode::Lean;
    const ResponseBank fresh = ResponseBank::build(bc, 2);
    auto [o0, o1] = estimate_oc_pair(run.best, run.settings.t_mode(), run.settings.lfc(),
                                     std::sqrt(run.settings.sigma2), fresh, 2);
    const double max_fwer = run.settings.alpha + 0.005;
    const double min_power = 1.0 - run.settings.beta - 0.007;
    if (o0.fwer > max_fwer || o1.power < min_power) {
      c.fail(fmt("%s: fresh-bank fwer %.4f (limit %.4f), power %.4f (floor %.4f)",
                 run.config_path.c_str(), o0.fwer, max_fwer, o1.power, min_power));
    } else {
      c.note(fmt("%s: fresh-bank fwer %.4f, power %.4f",
                 fs::path(run.config_path).stem().string().c_str(), o0.fwer, o1.power));
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// criterion 4: classical t-test oracle equivalence
// ---------------------------------------------------------------------------
Criterion criterion_t_oracle() {
  Criterion c{"K=1, J=1 equivalence with the classical pooled t-test"};

  // independently coded textbook statistic
  const auto textbook_t = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (double x : a) ma += x;
    for (double x : b) mb += x;
    ma /= a.size();
    mb /= b.size();
    double ss = 0;
    for (double x : a) ss += (x - ma) * (x - ma);
    for (double x : b) ss += (x - mb) * (x - mb);
    const double sp = std::sqrt(ss / (a.size() + b.size() - 2));
    return (mb - ma) / (sp * std::sqrt(1.0 / a.size() + 1.0 / b.size()));
  };

  RngStream stream{5551, 0, 0};
  Design d;
  d.n = 10;
  d.efficacy = {1.5};
  d.futility = {1.5};
  int mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    RealizedResponses r;
    r.arms = 1;
    r.stages = 1;
    r.n = 10;
    r.values = draw_std_normal(stream, 20);
    std::vector<double> control(r.values.begin(), r.values.begin() + 10);
    std::vector<double> treatment(r.values.begin() + 10, r.values.end());
    const bool expect = textbook_t(control, treatment) >= d.efficacy[0];
    const auto out = run_trial(d, r, StatisticMode::t_stat());
    if (expect != (out.rejected[0] == 1)) ++mismatches;
  }
  if (mismatches != 0) {
    c.fail(fmt("%d of 1000 datasets disagreed with the textbook test", mismatches));
  } else {
    c.note("1000 of 1000 random datasets agree exactly");
  }

  // simulated size at the exact t quantile
  const ResponseBank bank = lean_bank(kReplicates, 1, 1, 10, 8191);
  Design sized;
  sized.n = 10;
  sized.efficacy = {student_t_quantile(0.95, 18)};
  sized.futility = sized.efficacy;
  EvalTask task{sized, StatisticMode::t_stat(), {0.0}, 1.0, &bank};
  const OCEstimate oc = estimate_oc(task, 2);
  if (std::fabs(oc.fwer - 0.05) > 0.003) {
    c.fail(fmt("simulated size %.4f outside 0.05 +- 0.003", oc.fwer));
  } else {
    c.note(fmt("simulated size at the t quantile boundary: %.4f", oc.fwer));
  }
  return c;
}

// ---------------------------------------------------------------------------
// criterion 5: invariance suite
// ---------------------------------------------------------------------------
Criterion criterion_invariances() {
  Criterion c{"invariance suite (location/scale, classification sets, nesting, sigma columns)"};
  RngStream stream{777, 0, 0};

  Design d;
  d.n = 6;
  d.efficacy = {2.1, 1.8};
  d.futility = {0.2, 1.8};

  // location/scale transforms preserve outcomes
  for (int rep = 0; rep < 300; ++rep) {
    d.rule = rep % 2 == 0 ? StoppingRule::Simultaneous : StoppingRule::Separate;
    RealizedResponses r;
    r.arms = 3;
    r.stages = 2;
    r.n = 6;
    r.values = draw_std_normal(stream, 4 * 2 * 6);
    const auto base_t = run_trial(d, r, StatisticMode::t_stat());
    const auto base_z = run_trial(d, r, StatisticMode::z_stat(1.0));

    RealizedResponses shifted = r;
    for (auto& v : shifted.values) v += 4.5;
    RealizedResponses scaled = r;
    for (auto& v : scaled.values) v *= 2.5;

    const auto sh_t = run_trial(d, shifted, StatisticMode::t_stat());
    const auto sh_z = run_trial(d, shifted, StatisticMode::z_stat(1.0));
    const auto sc_t = run_trial(d, scaled, StatisticMode::t_stat());
    const auto sc_z = run_trial(d, scaled, StatisticMode::z_stat(2.5));
    if (sh_t.rejected != base_t.rejected || sh_t.decision_stage != base_t.decision_stage ||
        sh_z.rejected != base_z.rejected || sh_z.decision_stage != base_z.decision_stage) {
      c.fail("location invariance violated");
      break;
    }
    if (sc_t.rejected != base_t.rejected || sc_t.decision_stage != base_t.decision_stage) {
      c.fail("t-statistic scale invariance violated");
      break;
    }
    if (sc_z.rejected != base_z.rejected || sc_z.decision_stage != base_z.decision_stage) {
      c.fail("z-statistic scale equivariance violated");
      break;
    }
  }

  // classification-set membership for every simultaneous replicate, plus
  // bank subset nesting, on the published scenario-1 design
  const ResponseBank bank = lean_bank(20000, 3, 2, 45, 4242);
  Design pub;
  pub.n = 45;
  pub.futility = {0.777, 2.197};
  pub.efficacy = {2.330, 2.197};
  pub.rule = StoppingRule::Simultaneous;
  bool membership_ok = true;
  for (std::uint64_t r = 0; r < 20000 && membership_ok; ++r) {
    const auto data = bank.realize(r, 45, {0, 0, 0}, 1.0);
    const auto out = run_trial(pub, data, StatisticMode::t_stat());
    for (int j = 1; j <= 2; ++j) {
      bool rejected_by_j = false;
      for (int k = 0; k < 3; ++k) {
        if (out.rejected[k] && out.decision_stage[k] <= j) rejected_by_j = true;
      }
      if (rejected_by_j) {
        for (int k = 0; k < 3; ++k) {
          if (out.decision_stage[k] > j) membership_ok = false;
        }
      }
    }
  }
  if (!membership_ok) {
    c.fail("a simultaneous-rule outcome left the classification set");
  } else {
    c.note("all 20000 simultaneous replicates stay in the classification set");
  }

  bool nesting_ok = true;
  for (std::uint64_t r = 0; r < 50 && nesting_ok; ++r) {
    const auto small = bank.realize(r, 20, {0.5, 0.2, 0.2}, 1.5);
    const auto large = bank.realize(r, 40, {0.5, 0.2, 0.2}, 1.5);
    for (int k = 0; k <= 3 && nesting_ok; ++k) {
      for (int j = 0; j < 2 && nesting_ok; ++j) {
        for (int i = 0; i < 20; ++i) {
          if (small.at(k, j, i) != large.at(k, j, i)) {
            nesting_ok = false;
            break;
          }
        }
      }
    }
  }
  if (!nesting_ok) c.fail("bank subset nesting violated");

  // exact sigma2 invariance of the common-bank t-statistic FWER column
  OCEvaluator ev(bank, 2);
  for (const bool optimal : {false, true}) {
    Design t_design = pub;
    if (optimal) {
      t_design.n = 41;
      t_design.futility = {0.606, 2.084};
      t_design.efficacy = {2.742, 2.084};
    }
    double first = -1.0;
    for (double s2 : kSigmaGrid) {
      const OCEstimate oc =
          ev.evaluate(t_design, StatisticMode::t_stat(), {0, 0, 0}, std::sqrt(s2));
      if (first < 0.0) first = oc.fwer;
      if (oc.fwer != first) {
        c.fail(fmt("t-statistic FWER column not exactly constant: %.6f vs %.6f at sigma2=%.2f",
                   oc.fwer, first, s2));
        break;
      }
    }
  }
  if (c.pass) c.note("t-statistic FWER columns exactly constant across the variance grid");
  return c;
}

// ---------------------------------------------------------------------------
// criterion 6: quantile substitution checks
// ---------------------------------------------------------------------------
Criterion criterion_substitution() {
  Criterion c{"quantile substitution: tail preservation and direction"};
  const std::vector<std::int64_t> totals{4 * 45, 4 * 90};  // scenario-1 geometry: nu = 176, 356
  auto [e2, f2] = quantile_substitute({2.330, 2.197}, {0.777, 2.197}, totals, 3);

  if (std::fabs(student_t_cdf(e2[0], 176) - std_normal_cdf(2.330)) > 1e-10 ||
      std::fabs(student_t_cdf(e2[1], 356) - std_normal_cdf(2.197)) > 1e-10 ||
      std::fabs(student_t_cdf(f2[0], 176) - std_normal_cdf(0.777)) > 1e-10) {
    c.fail("substituted boundary does not preserve the normal upper-tail probability to 1e-10");
  }
  if (!(e2[0] > 2.330 && e2[0] < 2.36)) {
    c.fail(fmt("nu=176 anchor out of range: e' = %.6f", e2[0]));
  } else {
    c.note(fmt("e'(2.330, nu=176) = %.6f", e2[0]));
  }
  for (double b : {0.25, 0.777, 1.5, 2.330, 3.2}) {
    for (std::int64_t total : {12, 40, 180, 1000}) {
      auto [eb, fb] = quantile_substitute({b}, {b}, {total}, 3);
      if (!(eb[0] > b)) {
        c.fail(fmt("b' <= b at b=%.3f, total=%lld", b, static_cast<long long>(total)));
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// criterion 7: byte-identical outputs at 1, 2, 8 worker threads
// ---------------------------------------------------------------------------
Criterion criterion_determinism(const fs::path& work) {
  Criterion c{"byte-identical outputs at 1, 2 and 8 worker threads"};
  const fs::path cfg_dir = MAMS_CONFIG_DIR;

  // a reduced optimize config keeps this criterion fast; determinism is the
  // point here, so a completed-but-infeasible exit (2) is as good as 0
  const fs::path small_opt = work / "determinism_optimize.cfg";
  {
    std::ofstream os(small_opt);
    os << "[trial]\narms = 3\nstages = 2\nalpha = 0.1\nbeta = 0.2\n"
          "delta1 = 1\ndelta0 = 0\nsigma2 = 1.0\nrule = simultaneous\n"
          "[bank]\nreplicates = 8000\nn_max = 16\nseed = 31415\nmode = lean\n"
          "[weights]\nw1 = 0.34\nw2 = 0.33\nw3 = 0.33\n"
          "[ce]\npopulation = 120\nelite_frac = 0.15\nmax_iters = 8\ntol_sd = 0.02\n"
          "n_lo = 6\nn_hi = 14\nseed = 99\n"
          "[optimize]\npenalty = 90\n[single_stage]\nmode = t\nn_max = 64\n"
          "[output]\ndir = out\n";
  }

  struct Job {
    std::string name;
    std::string command;  // without --threads/--out
    std::vector<std::string> outputs;
  };
  const std::vector<Job> jobs{
      {"evaluate",
       std::string(MAMS_BIN) + " evaluate --config " +
           (cfg_dir / "evaluate_published.cfg").string() + " --replicates 20000",
       {"evaluate.csv"}},
      {"scan",
       std::string(MAMS_BIN) + " scan --config " + (cfg_dir / "scan_scenario1.cfg").string() +
           " --replicates 10000",
       {"scan.csv"}},
      {"single-stage",
       std::string(MAMS_BIN) + " single-stage --config " +
           (cfg_dir / "scenario2_simultaneous.cfg").string() + " --replicates 20000",
       {"single_stage.csv"}},
      {"optimize", std::string(MAMS_BIN) + " optimize --config " + small_opt.string(),
       {"design.txt", "trace.csv"}},
  };

  for (const auto& job : jobs) {
    std::map<std::string, std::string> reference;
    bool job_ok = true;
    for (int threads : {1, 2, 8}) {
      const fs::path out = work / ("det_" + job.name + "_t" + std::to_string(threads));
      const int code = run_cmd(job.command + " --threads " + std::to_string(threads) + " --out " +
                               out.string() + " > /dev/null");
      if (code != 0 && !(job.name == "optimize" && code == 2)) {
        c.fail(fmt("%s exited with code %d at %d threads", job.name.c_str(), code, threads));
        job_ok = false;
        continue;
      }
      for (const auto& file : job.outputs) {
        const std::string content = slurp(out / file);
        if (content.empty()) {
          c.fail(job.name + ": empty output " + file);
          job_ok = false;
          continue;
        }
        auto [it, inserted] = reference.emplace(file, content);
        if (!inserted && it->second != content) {
          c.fail(fmt("%s: %s differs between thread counts", job.name.c_str(), file.c_str()));
          job_ok = false;
        }
      }
    }
    if (job_ok) c.note(job.name + ": outputs identical at 1/2/8 threads");
  }
  return c;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "mams_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  std::vector<OptimizerRun> optimizer_runs(2);
  optimizer_runs[0].config_path = std::string(MAMS_CONFIG_DIR) + "/scenario2_simultaneous.cfg";
  optimizer_runs[0].published_n = 12;
  optimizer_runs[0].published.n = 12;
  optimizer_runs[0].published.futility = {0.603, 2.010};
  optimizer_runs[0].published.efficacy = {2.942, 2.010};
  optimizer_runs[1].config_path = std::string(MAMS_CONFIG_DIR) + "/scenario1_simultaneous.cfg";
  optimizer_runs[1].published_n = 41;
  optimizer_runs[1].published.n = 41;
  optimizer_runs[1].published.futility = {0.606, 2.084};
  optimizer_runs[1].published.efficacy = {2.742, 2.084};

  std::vector<Criterion> results;
  const auto add_timed = [&](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c = fn();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.note(fmt("(%.1f s)", s));
    results.push_back(std::move(c));
  };

  add_timed([] { return criterion_reference_table(); });
  add_timed([&] { return criterion_optimizer_parity(optimizer_runs, work); });
  add_timed([&] { return criterion_fresh_bank(optimizer_runs); });
  add_timed([] { return criterion_t_oracle(); });
  add_timed([] { return criterion_invariances(); });
  add_timed([] { return criterion_substitution(); });
  add_timed([&] { return criterion_determinism(work); });

  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const Criterion& c = results[i];
    std::printf("[%s] criterion %zu: %s\n", c.pass ? "PASS" : "FAIL", i + 1, c.name.c_str());
    for (const auto& d : c.details) std::printf("        %s\n", d.c_str());
    if (!c.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed,
              results.size());
  fs::remove_all(work);
  return failed;
}
