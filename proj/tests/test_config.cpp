#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>
#include <string>

#include "mams/config.hpp"

using namespace mams;

namespace {

const char* kOptimizeConfig = R"(
# scenario 2, simultaneous stopping
[trial]
arms = 3
stages = 2
alpha = 0.05
beta = 0.1
delta1 = 1
delta0 = 0
sigma2 = 1.0
rule = simultaneous

[bank]
replicates = 5000
n_max = 25
seed = 77
mode = lean

[weights]
w1 = 0.3333333333333333
w2 = 0.3333333333333333
w3 = 0.3333333333333333

[ce]
population = 100
elite_frac = 0.2
n_lo = 8
n_hi = 20
seed = 5

[optimize]
penalty = 92

[output]
dir = out
)";

const char* kEvaluateConfig = R"(
[trial]
arms = 3
stages = 2
alpha = 0.05
beta = 0.1
delta1 = 0.545
delta0 = 0.178
sigma2 = 1.0

[bank]
replicates = 2000
n_max = 45
seed = 9
mode = lean

[scenario.scenario1]
delta1 = 0.545
delta0 = 0.178

[evaluate]
scenarios = scenario1
rules = simultaneous, separate
approaches = A1, A2, A3, A4
sigma2_grid = 0.25, 1.0, 4.0

[design.scenario1.simultaneous.triangular]
n = 45
f = 0.777, 2.197
e = 2.330, 2.197

[design.scenario1.simultaneous.balanced_optimal]
n = 41
f = 0.606, 2.084
e = 2.742, 2.084

[design.scenario1.separate.triangular]
n = 43
f = 0.777, 2.198
e = 2.330, 2.197

[design.scenario1.separate.balanced_optimal]
n = 40
f = 0.721, 2.052
e = 2.925, 2.052
)";

}  // namespace

TEST_CASE("config parser: sections, comments, types, line anchors") {
  const auto cfg = ConfigFile::parse_string(
      "[a]\nx = 1.5  # trailing comment\nname = hello\nlist = 1, 2, 3\n[b.c]\nflag = 7\n",
      "test.cfg");
  CHECK(cfg.get_double("a", "x") == 1.5);
  CHECK(cfg.get_string("a", "name") == "hello");
  CHECK(cfg.get_double_list("a", "list") == std::vector<double>{1, 2, 3});
  CHECK(cfg.get_int("b.c", "flag") == 7);
  CHECK(cfg.has_section("b.c"));
  CHECK(!cfg.has("a", "missing"));
  CHECK(cfg.get_int_or("a", "missing", 42) == 42);

  // missing key names the key
  try {
    cfg.get_string("a", "absent");
    FAIL("expected error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("a.absent") != std::string::npos);
  }

  // bad number carries the line anchor
  const auto bad = ConfigFile::parse_string("[s]\nv = abc\n", "bad.cfg");
  try {
    bad.get_double("s", "v");
    FAIL("expected error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
  }

  CHECK_THROWS(ConfigFile::parse_string("x = 1\n", "nosection.cfg"));
  CHECK_THROWS(ConfigFile::parse_string("[s]\nnot a kv\n", "noeq.cfg"));
  CHECK_THROWS(ConfigFile::parse_string("[unterminated\n", "brackets.cfg"));
}

TEST_CASE("infinities parse in boundary lists") {
  const auto cfg = ConfigFile::parse_string("[d]\ne = inf, 2.0\nf = -inf, 2.0\n", "inf.cfg");
  const auto e = cfg.get_double_list("d", "e");
  CHECK(e[0] == std::numeric_limits<double>::infinity());
  const auto f = cfg.get_double_list("d", "f");
  CHECK(f[0] == -std::numeric_limits<double>::infinity());
}

TEST_CASE("optimize config resolves with overrides") {
  const auto cfg = ConfigFile::parse_string(kOptimizeConfig, "opt.cfg");
  CliOverrides cli;
  const RunConfig rc = load_optimize_config(cfg, cli);
  CHECK(rc.settings.arms == 3);
  CHECK(rc.rule == StoppingRule::Simultaneous);
  CHECK(rc.bank.replicates == 5000);
  CHECK(rc.bank.mode == BankMode::Lean);
  CHECK(rc.ce.population == 100);
  CHECK(rc.ce.n_lo == 8);
  CHECK(!rc.penalty_auto);
  CHECK(rc.spec.penalty == 92.0);
  CHECK(rc.spec.delta == EffectVector{1.0, 0.0, 0.0});
  CHECK(rc.out_dir == "out");

  // CLI overrides win and are reflected in the echo lines
  CliOverrides cli2;
  cli2.seed = 1234;
  cli2.replicates = 600;
  cli2.out_dir = "elsewhere";
  const RunConfig rc2 = load_optimize_config(cfg, cli2);
  CHECK(rc2.bank.seed == 1234);
  CHECK(rc2.bank.replicates == 600);
  CHECK(rc2.out_dir == "elsewhere");
  bool found_seed = false;
  for (const auto& [k, v] : rc2.echo) {
    if (k == "bank.seed") {
      CHECK(v == "1234");
      found_seed = true;
    }
  }
  CHECK(found_seed);
}

TEST_CASE("missing required keys are reported by name") {
  const std::string no_nmax = std::string(kOptimizeConfig);
  auto removed = no_nmax;
  const auto pos = removed.find("n_max = 25\n");
  removed.erase(pos, std::string("n_max = 25\n").size());
  const auto cfg = ConfigFile::parse_string(removed, "opt.cfg");
  try {
    load_optimize_config(cfg, {});
    FAIL("expected error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("bank.n_max") != std::string::npos);
  }
}

TEST_CASE("evaluate config builds the design sets and ties final stages") {
  const auto cfg = ConfigFile::parse_string(kEvaluateConfig, "eval.cfg");
  const RunConfig rc = load_evaluate_config(cfg, {});
  CHECK(rc.scenarios.size() == 1);
  CHECK(rc.scenarios[0].delta1 == 0.545);
  CHECK(rc.eval_rules.size() == 2);
  CHECK(rc.approaches.size() == 4);
  CHECK(rc.sigma2_grid.size() == 3);
  CHECK(rc.design_sets.size() == 2);

  const auto& sep = find_design_set(rc.design_sets, "scenario1", StoppingRule::Separate);
  CHECK(sep.triangular.n == 43);
  CHECK(sep.triangular.futility[1] == 2.197);  // tied to e_J
  const auto& sim = find_design_set(rc.design_sets, "scenario1", StoppingRule::Simultaneous);
  CHECK(sim.optimal.n == 41);
}

TEST_CASE("scan config and theta grids") {
  const std::string scan_cfg = std::string(kEvaluateConfig) +
                               "\n[scan]\ndesign = scenario1.simultaneous.balanced_optimal\n"
                               "rule = simultaneous\nmode = t\ntheta_levels = 0, 0.178, 0.545\n";
  const auto cfg = ConfigFile::parse_string(scan_cfg, "scan.cfg");
  const RunConfig rc = load_scan_config(cfg, {});
  CHECK(rc.scan_design.n == 41);
  CHECK(rc.theta_levels.size() == 3);

  const auto grid = theta_grid(rc.theta_levels, 3);
  CHECK(grid.size() == 27);
  CHECK(grid[0] == EffectVector{0, 0, 0});
  CHECK(grid[1] == EffectVector{0, 0, 0.178});
  CHECK(grid[26] == EffectVector{0.545, 0.545, 0.545});
}
