#include "mams/report.hpp"

#include <cmath>
#include <cstdio>

namespace mams {

namespace {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string compact(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", value);
  return buf;
}

}  // namespace

std::string format_rate(double value) { return fixed(value, 4); }
std::string format_ess(double value) { return fixed(value, 1); }
std::string format_boundary(double value) { return fixed(value, 6); }

void write_config_header(std::ostream& os, const RunConfig& rc) {
  for (const auto& [key, value] : rc.echo) {
    os << "# " << key << " = " << value << "\n";
  }
}

void write_comparison_csv(std::ostream& os, const RunConfig& rc,
                          const std::vector<ComparisonRow>& rows) {
  write_config_header(os, rc);
  os << "scenario,rule,approach,sigma2_true,fwer,power,ess_null,ess_alt,mc_se_fwer,R\n";
  for (const auto& row : rows) {
    os << row.scenario << ',' << rule_name(row.rule) << ',' << approach_name(row.approach) << ','
       << compact(row.sigma2_true) << ',' << format_rate(row.fwer) << ','
       << format_rate(row.power) << ',' << format_ess(row.ess_null) << ','
       << format_ess(row.ess_alt) << ',' << fixed(row.mc_se_fwer, 6) << ',' << row.replicates
       << "\n";
  }
}

void write_scan_csv(std::ostream& os, const RunConfig& rc, const ScanResult& scan, int arms) {
  write_config_header(os, rc);
  os << "kind";
  for (int k = 1; k <= arms; ++k) os << ",theta_" << k;
  os << ",error_rate,true_null_arms\n";
  for (const auto& pt : scan.points) {
    os << "point";
    for (double v : pt.theta) os << ',' << compact(v);
    os << ',' << format_rate(pt.error_rate) << ',' << pt.true_null_arms << "\n";
  }
  os << "max";
  for (int k = 0; k < arms; ++k) os << ',';
  os << ',' << format_rate(scan.max_rate) << ",\n";
}

void write_trace_csv(std::ostream& os, const RunConfig& rc, const OptimResult& result,
                     int stages) {
  write_config_header(os, rc);
  os << "iteration,best_score,mean_n,sd_n";
  for (int j = 1; j < stages; ++j) os << ",f" << j << "_mean,f" << j << "_sd";
  for (int j = 1; j < stages; ++j) os << ",e" << j << "_mean,e" << j << "_sd";
  os << ",c" << stages << "_mean,c" << stages << "_sd,elite_threshold\n";
  for (const auto& row : result.trace) {
    os << row.iteration << ',' << fixed(row.best_score, 6) << ',' << fixed(row.mean_n, 3) << ','
       << fixed(row.sd_n, 4);
    for (std::size_t c = 0; c < row.coord_mean.size(); ++c) {
      os << ',' << fixed(row.coord_mean[c], 6) << ',' << fixed(row.coord_sd[c], 6);
    }
    os << ',' << fixed(row.elite_threshold, 6) << "\n";
  }
}

void write_design_report(std::ostream& os, const RunConfig& rc, const OptimResult& result,
                         double penalty) {
  write_config_header(os, rc);
  const Design& d = result.best;
  os << "n = " << d.n << "\n";
  os << "e = ";
  for (std::size_t j = 0; j < d.efficacy.size(); ++j) {
    os << (j ? ", " : "") << format_boundary(d.efficacy[j]);
  }
  os << "\nf = ";
  for (std::size_t j = 0; j < d.futility.size(); ++j) {
    os << (j ? ", " : "") << format_boundary(d.futility[j]);
  }
  os << "\nrule = " << rule_name(d.rule) << "\n";
  os << "score = " << fixed(result.score, 6) << "\n";
  os << "fwer = " << format_rate(result.oc_null.fwer) << "\n";
  os << "power = " << format_rate(result.oc_alt.power) << "\n";
  os << "ess_null = " << format_ess(result.oc_null.ess_null) << "\n";
  os << "ess_alt = " << format_ess(result.oc_alt.ess_alt) << "\n";
  os << "penalty_patients = " << compact(penalty) << "\n";
  os << "feasible = " << (result.feasible ? "true" : "false") << "\n";
  os << "iterations = " << result.iterations << "\n";
  os << "converged = " << (result.converged ? "true" : "false") << "\n";
}

void write_single_stage_csv(std::ostream& os, const RunConfig& rc,
                            const SingleStageResult& result, int arms) {
  write_config_header(os, rc);
  os << "n_per_arm,total,e1,fwer,power\n";
  os << result.n << ',' << result.total << ',' << format_boundary(result.e1) << ','
     << format_rate(result.fwer) << ',' << format_rate(result.power) << "\n";
  (void)arms;
}

}  // namespace mams
