#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "confound/experiment.hpp"

namespace confound {

enum class ReportFormat { Json, Csv };

ReportFormat report_format_from_string(std::string_view name);

// Keys appear in a fixed order, so equal reports serialize to equal bytes.
nlohmann::ordered_json report_to_json(const Report& report);
Report report_from_json(const nlohmann::ordered_json& json);

std::string report_json_string(const Report& report);
// One row per run record, header first. Reals use 17 significant digits.
std::string records_csv(const Report& report);
// Long format: section,key,value.
std::string summary_csv(const Report& report);

// "runs.csv" -> "runs.summary.csv".
std::filesystem::path summary_path(const std::filesystem::path& path);

// JSON: the whole report in one file. CSV: records at `path`, summary in the
// sibling summary_path(path). Throws IoError.
void emit_report(const Report& report, const std::filesystem::path& path, ReportFormat format);

}  // namespace confound
