#include "ocmc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "ocmc/errors.hpp"

namespace ocmc {

namespace {

using json = nlohmann::json;

void write_value(std::ostream& out, const json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out << ",\n";
        first = false;
        out << pad << json(key).dump() << ": ";
        write_value(out, item, indent + 2);
      }
      out << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // Short arrays of scalars stay on one line.
      const bool flat = std::all_of(v.begin(), v.end(), [](const json& e) {
        return !e.is_structured();
      }) && v.size() <= 8;
      out << (flat ? "[" : "[\n");
      bool first = true;
      for (const json& item : v) {
        if (!first) out << (flat ? ", " : ",\n");
        first = false;
        if (!flat) out << pad;
        write_value(out, item, indent + 2);
      }
      if (flat) {
        out << "]";
      } else {
        out << "\n" << close << "]";
      }
      return;
    }
    case json::value_t::number_float:
      out << format_number(v.get<double>());
      return;
    default:
      out << v.dump();
  }
}

void flatten_into(const json& v, const std::string& prefix,
                  std::vector<std::pair<std::string, json>>& cells) {
  if (v.is_object()) {
    for (const auto& [key, item] : v.items()) {
      flatten_into(item, prefix.empty() ? key : prefix + "." + key, cells);
    }
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      flatten_into(v[i], prefix + "." + std::to_string(i), cells);
    }
  } else {
    cells.emplace_back(prefix, v);
  }
}

std::string csv_cell(const json& v) {
  std::string text;
  if (v.is_null()) return text;
  if (v.is_number_float()) {
    text = format_number(v.get<double>());
  } else if (v.is_string()) {
    text = v.get<std::string>();
  } else {
    text = v.dump();
  }
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

json parse_cell(const std::string& text, bool quoted) {
  if (text.empty() && !quoted) return nullptr;
  if (!quoted) {
    if (text == "true") return true;
    if (text == "false") return false;
    const char* begin = text.data();
    const char* end = begin + text.size();
    std::int64_t i = 0;
    auto ri = std::from_chars(begin, end, i);
    if (ri.ec == std::errc() && ri.ptr == end) return i;
    double d = 0.0;
    auto rd = std::from_chars(begin, end, d);
    if (rd.ec == std::errc() && rd.ptr == end) return d;
  }
  return text;
}

// Splits one CSV record, honoring quotes across embedded newlines.
bool read_record(std::istream& in, std::vector<json>& cells) {
  cells.clear();
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  bool any = false;
  char c = 0;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get(c);
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      quoted = true;
    } else if (c == ',') {
      cells.push_back(parse_cell(field, quoted));
      field.clear();
      quoted = false;
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!any) return false;
  if (in_quotes) throw Error(ErrorKind::kInvalidArgument, "unterminated quote in CSV");
  cells.push_back(parse_cell(field, quoted));
  return true;
}

}  // namespace

ReportFormat parse_format(const std::string& text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  throw Error(ErrorKind::kInvalidArgument, "format must be csv or json, got \"" + text + "\"");
}

std::string format_number(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::kInvalidArgument, "non-finite number in report");
  }
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_json(std::ostream& out, const nlohmann::json& doc) {
  write_value(out, doc, 0);
  out << "\n";
}

Table flatten(const nlohmann::json& doc) {
  std::vector<json> items;
  if (doc.is_object() && doc.contains("rows") && doc["rows"].is_array()) {
    items.assign(doc["rows"].begin(), doc["rows"].end());
  } else if (doc.is_object() && doc.contains("checks") && doc["checks"].is_array()) {
    items.assign(doc["checks"].begin(), doc["checks"].end());
  } else {
    items.push_back(doc);
  }
  Table table;
  std::map<std::string, std::size_t> column;
  std::vector<std::vector<std::pair<std::string, json>>> flat(items.size());
  for (std::size_t r = 0; r < items.size(); ++r) {
    flatten_into(items[r], "", flat[r]);
    for (const auto& [key, value] : flat[r]) {
      if (column.emplace(key, table.header.size()).second) table.header.push_back(key);
    }
  }
  for (const auto& cells : flat) {
    std::vector<json> row(table.header.size(), nullptr);
    for (const auto& [key, value] : cells) row[column.at(key)] = value;
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << csv_cell(table.header[i]);
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << "\n";
  }
}

Table read_csv(std::istream& in) {
  Table table;
  std::vector<json> cells;
  if (!read_record(in, cells)) return table;
  for (const json& c : cells) {
    table.header.push_back(c.is_string() ? c.get<std::string>() : c.dump());
  }
  while (read_record(in, cells)) {
    if (cells.size() == 1 && cells[0].is_null()) continue;
    if (cells.size() != table.header.size()) {
      throw Error(ErrorKind::kInvalidArgument, "CSV row width differs from header");
    }
    table.rows.push_back(cells);
  }
  return table;
}

void emit_report(std::ostream& out, const nlohmann::json& doc, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    write_json(out, doc);
  } else {
    write_csv(out, flatten(doc));
  }
}

}  // namespace ocmc
