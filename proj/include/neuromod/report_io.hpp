#pragma once

#include <filesystem>
#include <string>

#include "neuromod/experiments.hpp"

namespace neuromod {

// Fixed-point decimal text, independent of the C locale. Negative zero is
// written without a sign.
std::string format_fixed(double x, int decimals = 9);

// Header "time,<signal names>" followed by one row per recorded sample.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

// Metrics report: experiment name, echoed configuration text, assumptions,
// phases, scalar metrics, vectors and (when given) a step-size check.
// Non-finite values are written as null.
std::string metrics_json(const ExperimentReport& report, const std::string& config_text,
                         const ConvergenceReport* dt_check = nullptr);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace neuromod
