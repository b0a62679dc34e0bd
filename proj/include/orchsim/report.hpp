// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "orchsim/simulate.hpp"

namespace orchsim {

std::string run_report_json(const RunReport& run, const RunConfig& config);
std::string run_report_csv(const RunReport& run);

/// Writes <out_dir>/report.json and <out_dir>/summary.csv, creating the
/// directory when needed. Output is byte-stable for a given run.
void write_run_report(const RunReport& run, const RunConfig& config, const std::string& out_dir);

}  // namespace orchsim
