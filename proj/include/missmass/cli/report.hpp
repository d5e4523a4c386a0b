#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "missmass/cli/record.hpp"

namespace missmass::cli {

enum class Format { table, csv, json };

inline Format format_from_string(const std::string& s) {
  if (s == "table") return Format::table;
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("unknown format '" + s + "' (expected table, csv or json)");
}

namespace detail {

// %.12g for numbers, bare text for strings, true/false for booleans.
inline std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "nan";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
    return buf;
  }
  return v.dump();
}

inline void flatten(const json& obj, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& [k, v] : obj.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten(v, key, out);
    } else if (v.is_array()) {
      std::string s;
      for (const auto& e : v) s += (s.empty() ? "" : ",") + cell(e);
      out.emplace_back(key, "[" + s + "]");
    } else {
      out.emplace_back(key, cell(v));
    }
  }
}

}  // namespace detail

inline std::string render_csv(const ResultRecord& r) {
  std::string out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + r.columns[i];
  out += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + detail::cell(row[i]);
    out += "\n";
  }
  return out;
}

inline std::string render_table(const ResultRecord& r) {
  std::ostringstream os;
  os << "kind: " << r.kind << "\n";
  os << "status: " << r.status << "\n";
  if (r.config.contains("master_seed")) os << "master_seed: " << r.config["master_seed"].dump() << "\n";
  std::vector<std::pair<std::string, std::string>> kv;
  detail::flatten(r.summary, "", kv);
  for (const auto& [k, v] : kv) os << k << ": " << v << "\n";
  for (const auto& v : r.violations) os << "violation: " << v << "\n";
  os << "\n";

  std::vector<std::vector<std::string>> cells;
  cells.push_back(r.columns);
  for (const auto& row : r.rows) {
    std::vector<std::string> line;
    for (const auto& c : row) line.push_back(detail::cell(c));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(r.columns.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) {
      if (i) os << "  ";
      os << std::string(width[i] - line[i].size(), ' ') << line[i];
    }
    os << "\n";
  }
  return os.str();
}

inline std::string render_json(const ResultRecord& r) { return to_json(r).dump(2) + "\n"; }

inline std::string report(const ResultRecord& r, Format f) {
  switch (f) {
    case Format::table: return render_table(r);
    case Format::csv: return render_csv(r);
    case Format::json: return render_json(r);
  }
  throw ConfigError("unknown format");
}

}  // namespace missmass::cli
