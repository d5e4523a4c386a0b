#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "missmass/errors.hpp"

namespace missmass::cli {

using json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "missmass-0.1.0";

// Everything a run produces. `config` is the effective config (defaults
// filled, effective seed), so feeding it back reproduces the run.
struct ResultRecord {
  std::string artifact_version = kArtifactVersion;
  std::string kind;
  json config = json::object();
  json summary = json::object();
  std::vector<std::string> columns;
  // One JSON array per row, in column order.
  json rows = json::array();
  std::vector<std::string> violations;
  std::string status = "ok";
  double wall_clock_seconds = 0.0;

  // Wall clock is excluded: it is the one field allowed to differ between
  // otherwise identical runs.
  bool operator==(const ResultRecord& o) const {
    return artifact_version == o.artifact_version && kind == o.kind && config == o.config &&
           summary == o.summary && columns == o.columns && rows == o.rows && violations == o.violations &&
           status == o.status;
  }

  void add_violation(std::string what) {
    violations.push_back(std::move(what));
    status = "violation";
  }
};

// JSON has no NaN or infinity; those become null.
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const ResultRecord& r, bool with_wall_clock = true) {
  json j = {{"artifact_version", r.artifact_version},
            {"kind", r.kind},
            {"config", r.config},
            {"summary", r.summary},
            {"columns", r.columns},
            {"rows", r.rows},
            {"violations", r.violations},
            {"status", r.status}};
  if (with_wall_clock) j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

inline ResultRecord record_from_json(const json& j) {
  ResultRecord r;
  try {
    r.artifact_version = j.at("artifact_version").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.config = j.at("config");
    r.summary = j.at("summary");
    r.columns = j.at("columns").get<std::vector<std::string>>();
    r.rows = j.at("rows");
    r.violations = j.at("violations").get<std::vector<std::string>>();
    r.status = j.at("status").get<std::string>();
    r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed result record: ") + e.what());
  }
  return r;
}

// The deterministic part of a record, as bytes.
inline std::string payload(const ResultRecord& r) { return to_json(r, false).dump(); }

}  // namespace missmass::cli
