#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "svsim/runner.hpp"

namespace svsim {

enum class ReportFormat { kCsv, kJsonLines };

ReportFormat parse_report_format(const std::string& name);

// Number rendering shared by every output format, so csv and jsonl carry
// the same values.
std::string format_number(double v);
std::string format_seconds(TimeNs t);

// Writes the summary, per-frame PSNR, throughput series, event log and
// diff map into out_dir (created if missing). Returns the paths written,
// in a fixed order.
std::vector<std::filesystem::path> emit_report(const RunReport& report,
                                               const std::filesystem::path& out_dir,
                                               ReportFormat format);

// Kernel traces, delivery logs and installed rules of every run, under
// out_dir/trace. Runs must have been simulated with tracing enabled.
std::vector<std::filesystem::path> emit_traces(const RunReport& report,
                                               const std::filesystem::path& out_dir);

// Plain-text diff map of one method at the report's diff-map frame.
std::string render_diff_map(const RunReport& report, std::size_t method);

}  // namespace svsim
