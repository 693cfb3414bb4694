#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mams/comparators.hpp"
#include "mams/config.hpp"
#include "mams/oc.hpp"
#include "mams/optimizer.hpp"

namespace mams {

// Fixed-precision numeric formatting shared by every writer: rejection rates
// to 4 decimals, expected sample sizes to 1 decimal.
std::string format_rate(double value);
std::string format_ess(double value);
std::string format_boundary(double value);  // 6 decimals

// Echoes the resolved configuration as '# key = value' lines so every output
// file is self-describing and byte-stable across reruns.
void write_config_header(std::ostream& os, const RunConfig& rc);

void write_comparison_csv(std::ostream& os, const RunConfig& rc,
                          const std::vector<ComparisonRow>& rows);

void write_scan_csv(std::ostream& os, const RunConfig& rc, const ScanResult& scan, int arms);

void write_trace_csv(std::ostream& os, const RunConfig& rc, const OptimResult& result,
                     int stages);

void write_design_report(std::ostream& os, const RunConfig& rc, const OptimResult& result,
                         double penalty);

void write_single_stage_csv(std::ostream& os, const RunConfig& rc,
                            const SingleStageResult& result, int arms);

}  // namespace mams
