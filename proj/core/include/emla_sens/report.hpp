#pragma once

#include <string>
#include <vector>

#include "emla_sens/metrics.hpp"

namespace emla {

enum class ReportFormat { csv, json };

struct ReportOptions {
  std::string out_dir;
  ReportFormat format = ReportFormat::csv;
};

/// Serializes a sweep report into the output directory:
///   - metrics_<payload>.csv (or .json) per grid point: the metric traces;
///   - sensitivity.csv (or .json): traces plus payload partials, stacked by
///     payload, then sample, then actuator;
///   - summary.json: per payload and actuator, the consumed energy and the
///     peak force/power magnitudes.
/// Numbers are written with 17 significant digits so parsing them back
/// recovers the exact doubles; undefined conversion entries become empty
/// CSV fields / JSON nulls. Output bytes depend only on the report content.
/// Returns the files written; on failure removes them before rethrowing.
std::vector<std::string> write_report(const SensitivityReport& report,
                                      const ReportOptions& options);

/// Writes power.svg, force.svg, energy.svg and efficiency.svg: for each
/// actuator a value panel and a payload-partial panel over time, taken at
/// the highest payload of the grid. A single-payload report gets a note in
/// place of the partial panels. Deterministic bytes; returns the files
/// written.
std::vector<std::string> emit_plots(const SensitivityReport& report,
                                    const std::string& out_dir);

}  // namespace emla
