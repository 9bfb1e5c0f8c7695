#pragma once

#include "ergodica/sweep.hpp"

#include <filesystem>
#include <string>

namespace ergodica {

enum class ReportFormat { csv, json };

/// Shortest round-trip decimal form; "nan" / "inf" for nonfinite values.
std::string format_number(double v);

/// CSV with header eps,lambda_eps,lambda_bar,abs_err_lambda,eigfun_err,
/// z_norm,v_norm,seconds and one line per row.
std::string report_csv(const SweepReport& report);
/// Rows parsed back from report_csv output (only the CSV columns are set).
std::vector<SweepRow> rows_from_csv(const std::string& text);

/// Full report as JSON with a fixed key order.
std::string report_json(const SweepReport& report);
SweepReport report_from_json(const std::string& text);

/// Writes the report to `path` (created directories included). Throws IoError.
void emit_report(const SweepReport& report, ReportFormat format, const std::filesystem::path& path);

/// Field-by-field equality treating NaN == NaN.
bool same_report(const SweepReport& a, const SweepReport& b);

}  // namespace ergodica
