#pragma once

#include <charconv>
#include <fstream>
#include <span>
#include <string>
#include <system_error>

#include <json.hpp>

#include "lcmavg/errors.hpp"
#include "lcmavg/exact_sums.hpp"

namespace lcmavg {

// Shortest decimal representation that parses back to the same double.
// Locale-independent ('.' separator) by construction.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw InvariantError("format_double: to_chars failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

// CSV body for convergence-style rows. Fixed header, one row per x,
// full-precision round-trip decimals.
inline std::string render_table_csv(std::span<const ConvergenceRow> rows) {
  if (rows.empty()) throw ConfigError("emit_table: rows must be nonempty");
  std::string out = "x,value,main_term,relative_error\n";
  for (const ConvergenceRow& row : rows) {
    out += std::to_string(row.x);
    out += ',';
    out += format_double(row.value);
    out += ',';
    out += format_double(row.main_term);
    out += ',';
    out += format_double(row.relative_error);
    out += '\n';
  }
  return out;
}

// JSON document: array of row objects plus a caller-supplied metadata
// object (function, parameters, constants used, engine version, caps).
inline nlohmann::json render_table_json(std::span<const ConvergenceRow> rows,
                                        nlohmann::json metadata) {
  if (rows.empty()) throw ConfigError("emit_table: rows must be nonempty");
  nlohmann::json doc;
  nlohmann::json arr = nlohmann::json::array();
  for (const ConvergenceRow& row : rows) {
    arr.push_back({{"x", row.x},
                   {"value", row.value},
                   {"main_term", row.main_term},
                   {"relative_error", row.relative_error}});
  }
  doc["rows"] = std::move(arr);
  doc["metadata"] = std::move(metadata);
  return doc;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output path: " + path);
  out << content;
  if (!out) throw ConfigError("failed writing output path: " + path);
}

enum class OutputFormat { csv, json };

inline OutputFormat parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigError("unknown output format: " + s);
}

// Writes rows (+ metadata, JSON only) to path.
inline void emit_table(std::span<const ConvergenceRow> rows,
                       OutputFormat format, const std::string& path,
                       const nlohmann::json& metadata = {}) {
  if (format == OutputFormat::csv) {
    write_text_file(path, render_table_csv(rows));
  } else {
    write_text_file(path, render_table_json(rows, metadata).dump(2) + "\n");
  }
}

}  // namespace lcmavg
