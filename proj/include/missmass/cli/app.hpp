#pragma once

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "missmass/cli/config.hpp"
#include "missmass/cli/record.hpp"
#include "missmass/cli/report.hpp"
#include "missmass/cli/run.hpp"

namespace missmass::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitViolation = 2 };

// Bad input maps to 1; a run that executed but hit a degenerate state or
// violated a checked invariant maps to 2.
inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const DegenerateError*>(&e) || dynamic_cast<const InsufficientDataError*>(&e) ||
      dynamic_cast<const TruncationError*>(&e) || dynamic_cast<const UndefinedEstimatorError*>(&e)) {
    return kExitViolation;
  }
  return kExitConfig;
}

inline void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write output '" + path + "'");
  f << text;
}

// Whole command line: `missmass <kind> --config <path> [--format ...]
// [--out <path>] [--workers N] [--validate-only]`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Missing-mass estimation laboratory"};
  app.name("missmass");
  std::string kind, config_path, format = "table", out_path;
  unsigned workers = 0;
  bool validate_only = false;
  app.add_option("kind", kind, "Experiment kind")->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--format", format, "table, csv or json");
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
  app.add_flag("--validate-only", validate_only, "Print diagnostics and the effective config, then exit");
  app.footer("kinds: risk, rate, geometric-probe, concentration, posterior-dp, posterior-stable, kn-scaling, "
             "lemmas, impossibility\nexit: 0 ok, 1 config error, 2 degenerate run or invariant violation\n"
             "env: MISSMASS_SEED overrides master_seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "missmass: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const Format fmt = format_from_string(format);
    if (!is_kind(kind)) throw ConfigError("unknown kind '" + kind + "'");
    json config = read_config_file(config_path);
    const auto seed = env_seed();
    apply_seed_override(config, seed);
    if (seed) err << "missmass: master_seed " << *seed << " (from MISSMASS_SEED)\n";

    const Validation v = validate(config, kind);
    if (validate_only) {
      for (const auto& d : v.diagnostics) out << "diagnostic: " << d << "\n";
      if (v.ok()) out << v.effective.dump(2) << "\n";
      return v.ok() ? kExitOk : kExitConfig;
    }
    if (!v.ok()) {
      for (const auto& d : v.diagnostics) err << "missmass: " << d << "\n";
      return kExitConfig;
    }

    const ResultRecord rec = run(config, kind, Workers{workers});
    const std::string dest = out_path.empty() ? v.effective["output_path"].get<std::string>() : out_path;
    write_output(report(rec, fmt), dest, out);
    for (const auto& viol : rec.violations) err << "missmass: violation: " << viol << "\n";
    return rec.violations.empty() ? kExitOk : kExitViolation;
  } catch (const Error& e) {
    err << "missmass: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace missmass::cli
