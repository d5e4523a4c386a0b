#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "missmass/cli.hpp"
#include "missmass/rng.hpp"

namespace missmass::cli {
namespace {

namespace fs = std::filesystem;

const std::string kConfigDir = MISSMASS_CONFIG_DIR;
const std::string kGoldenDir = MISSMASS_GOLDEN_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool has_diag(const Validation& v, const std::string& needle) {
  for (const auto& d : v.diagnostics) {
    if (d.find(needle) != std::string::npos) return true;
  }
  return false;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "missmass");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_temp(const std::string& name, const json& j) {
  const fs::path p = fs::temp_directory_path() / ("missmass_test_" + name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

class SeedEnv {
 public:
  explicit SeedEnv(const char* value) { ::setenv("MISSMASS_SEED", value, 1); }
  ~SeedEnv() { ::unsetenv("MISSMASS_SEED"); }
};

json quick(const std::string& name) { return read_config_file(kConfigDir + "/quick/" + name + ".json"); }

TEST(Validate, SpecExamples) {
  json risk = {{"master_seed", 1}, {"law", {{"alpha", 1.2}}}};
  EXPECT_TRUE(has_diag(validate(risk, "risk"), "alpha outside (0,1)"));

  json kn = {{"master_seed", 1}, {"eta", -0.6}, {"alpha", 0.5}};
  EXPECT_TRUE(has_diag(validate(kn, "kn-scaling"), "eta ≤ −alpha"));

  for (const auto& kind : kinds()) {
    const auto v = validate(json{{"master_seed", 3}}, kind);
    EXPECT_TRUE(v.ok()) << kind << ": " << (v.diagnostics.empty() ? "" : v.diagnostics[0]);
  }
}

TEST(Validate, ReportsEveryProblem) {
  json cfg = {{"kind", "rate"},
              {"law", {{"alpha", 0.5}, {"J", 0}, {"colour", "red"}}},
              {"ns", {100, 50}},
              {"replicates", "many"}};
  const auto v = validate(cfg, "risk");
  EXPECT_TRUE(has_diag(v, "master_seed: missing"));
  EXPECT_TRUE(has_diag(v, "kind: config says 'rate'"));
  EXPECT_TRUE(has_diag(v, "law.colour: unknown key"));
  EXPECT_TRUE(has_diag(v, "replicates: expected number, got string"));

  const auto v2 = validate(json{{"master_seed", 1}, {"ns", {100, 50}}, {"law", {{"J", 0}}}}, "risk");
  EXPECT_TRUE(has_diag(v2, "ns: must be strictly increasing"));
  EXPECT_TRUE(has_diag(v2, "law.J: must be >= 1"));

  EXPECT_TRUE(has_diag(validate(json{{"master_seed", -4}}, "risk"), "master_seed"));
  EXPECT_TRUE(has_diag(validate(json{{"master_seed", 1}}, "histogram"), "unknown kind"));
  EXPECT_TRUE(has_diag(validate(json::array(), "risk"), "top level"));
  EXPECT_TRUE(has_diag(validate(json{{"master_seed", 1}, {"eps_grid", {0.3}}}, "impossibility"), "eps outside"));
}

TEST(Validate, EffectiveConfigSpellsOutDefaults) {
  const auto v = validate(json{{"master_seed", 11}, {"law", {{"alpha", 0.7}}}}, "concentration");
  ASSERT_TRUE(v.ok());
  EXPECT_EQ(v.effective["master_seed"], 11);
  EXPECT_EQ(v.effective["kind"], "concentration");
  EXPECT_DOUBLE_EQ(v.effective["law"]["alpha"].get<double>(), 0.7);
  EXPECT_EQ(v.effective["law"]["family"], "zipf");
  EXPECT_EQ(v.effective["replicates"], 5000);
  EXPECT_TRUE(v.effective.contains("eps_grid"));
  // Feeding the effective config back is a fixed point.
  EXPECT_EQ(validate(v.effective, "concentration").effective, v.effective);
}

TEST(Validate, LawConstructorFailuresAreDiagnostics) {
  json cfg = {{"master_seed", 1}, {"law", {{"family", "geometric"}, {"q", 0.01}, {"J", 1000}}}};
  EXPECT_TRUE(has_diag(validate(cfg, "risk"), "underflows"));
  cfg["law"] = {{"family", "explicit"}, {"masses", {0.2, -0.5}}};
  EXPECT_TRUE(has_diag(validate(cfg, "risk"), "explicit masses must be positive"));
  cfg["law"] = {{"family", "pareto"}};
  EXPECT_TRUE(has_diag(validate(cfg, "risk"), "unknown family"));
}

TEST(Validate, UnreadableConfigIsConfigError) {
  EXPECT_THROW(read_config_file("/nonexistent/missmass.json"), ConfigError);
  const fs::path p = fs::temp_directory_path() / "missmass_test_broken.json";
  std::ofstream(p) << "{ \"master_seed\": ";
  EXPECT_THROW(read_config_file(p.string()), ConfigError);
}

// Random configs that pass validation must never fail on a precondition
// at run time; degenerate outcomes (exit 2) are allowed.
TEST(Validate, ValidConfigsNeverHitPreconditionErrors) {
  Rng rng(RngStream{404, 0});
  const char* families[] = {"zipf", "zipf-log", "geometric", "explicit"};
  int ran = 0;
  for (int t = 0; t < 150; ++t) {
    json law = {{"family", families[rng.below(4)]},
                {"alpha", 1.2 * rng.uniform() - 0.1},
                {"beta_log", 4.0 * rng.uniform() - 2.0},
                {"q", 1.2 * rng.uniform() - 0.1},
                {"J", rng.below(3000)}};
    json masses = json::array();
    for (std::uint64_t i = rng.below(4); i > 0; --i) masses.push_back(rng.uniform());
    law["masses"] = masses;
    json ns = json::array();
    std::uint64_t n = rng.below(5);
    for (int i = 0; i < 3; ++i) ns.push_back(n += rng.below(60));
    const std::string kind = rng.below(2) ? "risk" : "concentration";
    json cfg = {{"master_seed", t}, {"law", law}, {"replicates", rng.below(20)}};
    if (kind == "risk") {
      cfg["ns"] = ns;
    } else {
      cfg["n"] = rng.below(200);
      cfg["eps_grid"] = {0.1, 0.5};
    }
    const auto v = validate(cfg, kind);
    if (!v.ok()) continue;
    ++ran;
    try {
      (void)run(cfg, kind, Workers{1});
    } catch (const DegenerateError&) {
    } catch (const InsufficientDataError&) {
    } catch (const Error& e) {
      ADD_FAILURE() << kind << " " << cfg.dump() << ": " << e.what();
    }
  }
  EXPECT_GT(ran, 20);
}

TEST(Run, ImpossibilityRecordMeetsBound) {
  json cfg = {{"master_seed", 1}, {"eps_grid", {0.1}}, {"grid_points", 20000}};
  const auto rec = run(cfg, "impossibility", Workers{1});
  EXPECT_EQ(rec.status, "ok");
  EXPECT_GE(rec.summary["min_slack"].get<double>(), -1e-9);
  EXPECT_EQ(rec.rows.front()[1], 2);
  EXPECT_EQ(rec.rows.back()[1], 10000);
}

TEST(Run, SingleAtomRiskExitsTwo) {
  const auto r = cli({"risk", "--config", kConfigDir + "/quick/risk_single_atom.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("exhausted the support"), std::string::npos);
  EXPECT_THROW(run(quick("risk_single_atom"), "risk", Workers{1}), DegenerateError);
}

TEST(Run, ViolationsExitTwo) {
  json cfg = quick("rate");
  cfg["slope_tolerance"] = 1e-6;
  const fs::path p = write_temp("tight_rate", cfg);
  const auto r = cli({"rate", "--config", p.string(), "--format", "csv"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("violation: slope"), std::string::npos);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "n,mean_loss,stderr,slope,target_slope,r2");
}

TEST(Run, IdenticalConfigGivesIdenticalPayload) {
  const json cfg = quick("posterior_stable");
  const auto a = run(cfg, "posterior-stable", Workers{1});
  const auto b = run(cfg, "posterior-stable", Workers{1});
  EXPECT_EQ(payload(a), payload(b));
  EXPECT_EQ(a, b);
}

TEST(Run, PayloadIndependentOfWorkerCount) {
  for (const char* name : {"risk", "concentration", "posterior_dp", "kn_scaling", "impossibility"}) {
    const json cfg = quick(name);
    const auto kind = cfg["kind"].get<std::string>();
    EXPECT_EQ(payload(run(cfg, kind, Workers{1})), payload(run(cfg, kind, Workers{3}))) << name;
  }
}

TEST(Run, ConfigEchoReproducesRun) {
  const auto first = run(quick("risk"), "risk", Workers{2});
  const auto again = run(first.config, "risk", Workers{1});
  EXPECT_EQ(payload(first), payload(again));
}

TEST(Run, InvalidConfigThrowsConfigError) {
  EXPECT_THROW(run(json{{"law", {{"alpha", 2.0}}}}, "risk"), ConfigError);
  EXPECT_THROW(run(json{{"master_seed", 1}}), ConfigError);
}

TEST(Report, RateCsvHeader) {
  ResultRecord r;
  r.kind = "rate";
  r.columns = {"n", "mean_loss", "stderr", "slope", "target_slope", "r2"};
  EXPECT_EQ(render_csv(r), "n,mean_loss,stderr,slope,target_slope,r2\n");
}

TEST(Report, EmptyGridGivesHeaderOnlyCsv) {
  ResultRecord r;
  r.columns = {"eps", "n", "infimum", "argmin", "bound", "slack"};
  const auto csv = render_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_NE(render_table(r).find("infimum"), std::string::npos);
}

TEST(Report, JsonRoundTripsToEqualRecord) {
  for (const char* name : {"risk", "lemmas", "posterior_stable"}) {
    const json cfg = quick(name);
    const auto rec = run(cfg, cfg["kind"].get<std::string>(), Workers{1});
    const auto back = record_from_json(json::parse(report(rec, Format::json)));
    EXPECT_EQ(back, rec) << name;
    EXPECT_EQ(payload(back), payload(rec)) << name;
    EXPECT_DOUBLE_EQ(back.wall_clock_seconds, rec.wall_clock_seconds);
  }
  EXPECT_THROW(record_from_json(json{{"kind", "risk"}}), DataError);
}

TEST(Report, NonFiniteBecomesNull) {
  ResultRecord r;
  r.columns = {"x"};
  r.rows.push_back({number(std::numeric_limits<double>::quiet_NaN())});
  EXPECT_TRUE(r.rows[0][0].is_null());
  EXPECT_EQ(render_csv(r), "x\nnan\n");
}

TEST(Report, UnknownFormat) {
  EXPECT_THROW(format_from_string("xml"), ConfigError);
  const auto r = cli({"impossibility", "--config", kConfigDir + "/quick/impossibility.json", "--format", "xml"});
  EXPECT_EQ(r.code, 1);
}

// CSV output per subcommand is pinned byte for byte.
TEST(Golden, CsvPerSubcommand) {
  int checked = 0;
  for (const auto& entry : fs::directory_iterator(kGoldenDir)) {
    const std::string name = entry.path().stem().string();
    const json cfg = quick(name);
    const auto r = cli({cfg["kind"].get<std::string>(), "--config", kConfigDir + "/quick/" + name + ".json",
                        "--format", "csv", "--workers", "2"});
    EXPECT_EQ(r.code, 0) << name << ": " << r.err;
    EXPECT_EQ(r.out, slurp(entry.path())) << name;
    ++checked;
  }
  EXPECT_EQ(checked, 9);
}

TEST(Cli, SeedOverrideIsEchoed) {
  const std::string path = kConfigDir + "/quick/risk.json";
  const auto base = cli({"risk", "--config", path, "--format", "json"});
  ASSERT_EQ(base.code, 0);
  EXPECT_EQ(json::parse(base.out)["config"]["master_seed"], 7);
  {
    SeedEnv env("18446744073709551615");
    const auto r = cli({"risk", "--config", path, "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["config"]["master_seed"].get<std::uint64_t>(), 18446744073709551615ULL);
    EXPECT_NE(j["rows"], json::parse(base.out)["rows"]);
    EXPECT_NE(r.err.find("MISSMASS_SEED"), std::string::npos);
  }
  {
    SeedEnv env("12x");
    EXPECT_EQ(cli({"risk", "--config", path}).code, 1);
  }
  {
    SeedEnv env("18446744073709551616");
    EXPECT_EQ(cli({"risk", "--config", path}).code, 1);
  }
  // The override also satisfies a config without a seed.
  {
    SeedEnv env("5");
    const fs::path p = write_temp("no_seed", json{{"eps_grid", {0.2}}, {"n_max", 20}, {"grid_points", 100}});
    EXPECT_EQ(cli({"impossibility", "--config", p.string()}).code, 0);
  }
}

TEST(Cli, ExitCodesAndOutputs) {
  EXPECT_EQ(cli({"risk"}).code, 1);
  EXPECT_EQ(cli({"histogram", "--config", kConfigDir + "/quick/risk.json"}).code, 1);
  EXPECT_EQ(cli({"risk", "--config", "/nonexistent.json"}).code, 1);
  // Subcommand and config disagree.
  EXPECT_EQ(cli({"rate", "--config", kConfigDir + "/quick/risk.json"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);

  const fs::path out = fs::temp_directory_path() / "missmass_test_out.csv";
  fs::remove(out);
  const auto r = cli({"impossibility", "--config", kConfigDir + "/quick/impossibility.json", "--format", "csv",
                      "--out", out.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(slurp(out), slurp(kGoldenDir + "/impossibility.csv"));

  const auto table = cli({"impossibility", "--config", kConfigDir + "/quick/impossibility.json"});
  EXPECT_NE(table.out.find("status: ok"), std::string::npos);
  EXPECT_NE(table.out.find("master_seed: 7"), std::string::npos);
}

TEST(Cli, ValidateOnly) {
  const fs::path bad = write_temp("bad_alpha", json{{"master_seed", 1}, {"law", {{"alpha", 1.2}}}});
  const auto r = cli({"risk", "--config", bad.string(), "--validate-only"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("alpha outside (0,1)"), std::string::npos);

  const auto ok = cli({"risk", "--config", kConfigDir + "/quick/risk.json", "--validate-only"});
  EXPECT_EQ(ok.code, 0);
  const auto eff = json::parse(ok.out);
  EXPECT_EQ(eff["law"]["beta_log"], 0.0);
  EXPECT_EQ(eff["output_path"], "");
}

TEST(Cli, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), 1);
  EXPECT_EQ(exit_code_for(ParameterError("x")), 1);
  EXPECT_EQ(exit_code_for(DomainError("x")), 1);
  EXPECT_EQ(exit_code_for(DataError("x")), 1);
  EXPECT_EQ(exit_code_for(UnsupportedFamilyError("x")), 1);
  EXPECT_EQ(exit_code_for(DegenerateError("x")), 2);
  EXPECT_EQ(exit_code_for(InsufficientDataError("x")), 2);
  EXPECT_EQ(exit_code_for(TruncationError("x")), 2);
  EXPECT_EQ(exit_code_for(UndefinedEstimatorError("x")), 2);
}

}  // namespace
}  // namespace missmass::cli
