#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ocmc {

enum class ReportFormat { kCsv, kJson };

// "csv" or "json"; anything else raises kInvalidArgument.
ReportFormat parse_format(const std::string& text);

// 17 significant digits; non-finite values raise kInvalidArgument.
std::string format_number(double value);

// Two-space indented JSON with keys in lexicographic order and every
// floating-point number printed by format_number.
void write_json(std::ostream& out, const nlohmann::json& doc);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<nlohmann::json>> rows;  // scalars only
};

// One row per element of a top-level "rows" or "checks" array, otherwise
// the document itself is the single row. Nested objects become dotted
// columns and arrays indexed columns (h.0, h.1, ...).
Table flatten(const nlohmann::json& doc);

// RFC 4180 quoting where needed; numbers by format_number.
void write_csv(std::ostream& out, const Table& table);
// Cells that parse completely as numbers come back as numbers, "true" and
// "false" as booleans, everything else as strings.
Table read_csv(std::istream& in);

void emit_report(std::ostream& out, const nlohmann::json& doc, ReportFormat format);

}  // namespace ocmc
