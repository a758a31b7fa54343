#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ppset/sim.hpp"

namespace ppset {

enum class ReportFormat { json, csv, svg };

nlohmann::json report_to_json(const TrialReport& report);
TrialReport report_from_json(const nlohmann::json& j);

// Header: <parameter>,coverage_mean,coverage_sd,removal_mean,removal_sd[,saved_mean,saved_sd]
std::string report_to_csv(const TrialReport& report);

// Two stacked panels against the swept parameter: coverage (with the 1 - alpha target dashed)
// and removal fraction. Means are lines, +-1 SD is a shaded band.
std::string report_to_svg(const TrialReport& report);

// Writes report.<ext> under `dir` and returns the path. Throws ConfigError on an empty report.
std::filesystem::path emit_report(const TrialReport& report, ReportFormat format, const std::filesystem::path& dir,
                                  const std::string& stem = "report");

}  // namespace ppset
