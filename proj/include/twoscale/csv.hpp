#pragma once

#include "twoscale/orchestrator.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace twoscale {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a whole field; throws ConfigError.
double parse_double(std::string_view text);

/// One RFC-4180 record, quoting fields that contain ',', '"', CR or LF.
std::string csv_record(const std::vector<std::string>& fields);
/// Splits one RFC-4180 record (no embedded line breaks).
std::vector<std::string> parse_csv_record(std::string_view line);

/// Column layout:
///   time [s], truth:<state> [unit]..., meas:<output> [unit]...,
///   <scheme>:<state> [unit]... (composite or full-model estimate),
///   <scheme>.slow:<state> [unit]..., <scheme>.fast:<fast state> [unit]...
/// One row per delta_f instant.
void write_csv(const RunRecord& rec, std::ostream& out);
void export_csv(const RunRecord& rec, const std::filesystem::path& path);

/// Inverse of write_csv for the trajectory columns (message logs, x_fss and
/// timings are not part of the file).
RunRecord read_csv(std::istream& in);
RunRecord import_csv(const std::filesystem::path& path);

}  // namespace twoscale
