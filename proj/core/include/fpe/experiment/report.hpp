#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fpe/experiment/pipeline.hpp"

namespace fpe::experiment {

enum class ReportFormat { Csv, Markdown, JsonLines };

ReportFormat parse_report_format(std::string_view name);
std::string_view extension(ReportFormat format) noexcept;  // csv, md, jsonl

/// Deterministic text of the report. Timings are left out so that equal
/// (config, seed) give byte-identical output.
std::string render_report(const ExperimentReport& report, ReportFormat format);

/// Writes <dir>/<stem>.<ext>; returns the path. Throws Error{IoError}.
std::filesystem::path emit_report(const ExperimentReport& report, ReportFormat format,
                                  const std::filesystem::path& dir, std::string_view stem = "report");

/// Wall-clock timings as CSV (algorithm,train_seconds,predict_seconds).
std::string render_timings(const ExperimentReport& report);

/// Parses the json-lines form back; timings come back as zero.
ExperimentReport parse_report_jsonl(std::string_view text);
ExperimentReport load_report_jsonl(const std::filesystem::path& path);

}  // namespace fpe::experiment
