#pragma once

#include "deepesn/experiment.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace deepesn {

/// Human-readable summary: protocol metadata, then one ESN/DeepESN table per task
/// with the selected layer count, selected hyperparameters and ordering flags.
std::string format_report(const ExperimentReport& report);

/// Comma-separated trial log, one row per trial, header first. Per-guess MSEs are
/// ';'-joined inside their column. Output is a pure function of the report.
void write_trial_log(const ExperimentReport& report, std::ostream& out);

/// Parses a log written by write_trial_log back into a report (metadata is not
/// part of the log and stays empty). Selection is recomputed from the rows.
ExperimentReport read_trial_log(std::istream& in);

}  // namespace deepesn
