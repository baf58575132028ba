#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "gossipmon/metrics.hpp"

namespace gossipmon {

enum class ReportFormat { csv, json };

inline constexpr const char* kCsvHeader =
    "scheme,population,groups,regions,round,intra_group_msgs,inter_group_msgs,inter_cloud_msgs,"
    "dropped,total";

// Header, one row per round, then a TOTAL row.
std::string report_csv(const MetricsReport& report);
nlohmann::ordered_json report_json(const MetricsReport& report);

// Writes the report to `path`. Throws IoError naming the path on failure.
void emit_report(const MetricsReport& report, ReportFormat format, const std::filesystem::path& path);

nlohmann::ordered_json snapshots_json(std::span<const CoverageSnapshot> snapshots);

}  // namespace gossipmon
