#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace brlab::tools {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaMajor = 1;
inline constexpr int kReportSchemaMinor = 0;
std::string report_schema_version();

/// Thrown for unreadable or incompatible reports.
struct ReportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// %.17g; non-finite values are rejected.
std::string format_number(double v);

/// Deterministic JSON text: keys in insertion order, two-space indent,
/// floating-point numbers at 17 significant digits.
std::string dump_json(const Json& j);

/// Finite numbers as-is, NaN and infinities as null.
Json finite_or_null(double v);

/// Writes to a temporary sibling and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& text);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// <stem>.csv (comma separated, header row) and <stem>.dat (gnuplot, '#' header).
void write_table(const std::filesystem::path& dir, const std::string& stem, const Table& table);

/// --out, then BRLAB_OUT, then the config's output entry, then "brlab_out".
std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag,
                                      const std::optional<std::string>& config_value);

/// Parses report.json and checks its schema major.
Json read_report(const std::filesystem::path& path);

}  // namespace brlab::tools
