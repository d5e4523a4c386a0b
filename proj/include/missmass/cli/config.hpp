#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "missmass/betalab.hpp"
#include "missmass/errors.hpp"
#include "missmass/laws.hpp"

namespace missmass::cli {

using json = nlohmann::json;

inline const std::vector<std::string>& kinds() {
  static const std::vector<std::string> k{"risk",          "rate",          "geometric-probe",
                                          "concentration", "posterior-dp",  "posterior-stable",
                                          "kn-scaling",    "lemmas",        "impossibility"};
  return k;
}

inline bool is_kind(const std::string& kind) {
  for (const auto& k : kinds()) {
    if (k == kind) return true;
  }
  return false;
}

// Floor for the Good-Turing multiplicative loss on geometric(0.5) at n in
// {1e3, 1e4, 1e5}, R = 2000. An independent numpy run measured a minimum
// mean loss of 1.774 (stderr about 0.08); the floor sits ten standard
// errors below it. The probe fails if the loss drops under it.
inline constexpr double kGeometricLossFloor = 1.0;

// min sqrt(a) * gap over the default Lemma 2 grid, rounded down.
inline constexpr double kLemma2Floor = 0.3321735554;

namespace detail {

inline json zipf_law(double alpha, std::uint64_t J) {
  return {{"family", "zipf"}, {"alpha", alpha}, {"beta_log", 0.0}, {"q", 0.5}, {"J", J},
          {"masses", json::array()}};
}

inline json pow2_grid(int lo, int hi) {
  json out = json::array();
  for (int e = lo; e <= hi; ++e) out.push_back(std::uint64_t{1} << e);
  return out;
}

}  // namespace detail

// Every key a kind accepts, with its default. master_seed has no default.
inline json kind_defaults(const std::string& kind) {
  json d;
  if (kind == "risk") {
    d = {{"law", detail::zipf_law(0.5, 100000)}, {"ns", {1000, 4000, 16000}}, {"replicates", 200}};
  } else if (kind == "rate") {
    d = {{"law", detail::zipf_law(0.5, 1000000)},
         {"ns", detail::pow2_grid(10, 17)},
         {"replicates", 1000},
         {"slope_tolerance", 0.1},
         {"min_r2", 0.95}};
  } else if (kind == "geometric-probe") {
    d = {{"q", 0.5},
         {"ns", {1000, 10000, 100000}},
         {"replicates", 2000},
         {"loss_floor", kGeometricLossFloor},
         {"max_abs_slope", 0.1}};
  } else if (kind == "concentration") {
    d = {{"law", detail::zipf_law(0.5, 1000000)},
         {"n", 10000},
         {"replicates", 5000},
         {"eps_grid", {0.05, 0.1, 0.2, 0.3, 0.5}}};
  } else if (kind == "posterior-dp") {
    d = {{"ns", {1, 5, 20, 100}}, {"replicates", 10000}, {"trunc_tol", 1e-12}, {"negative_control", true}};
  } else if (kind == "posterior-stable") {
    d = {{"alphas", {0.3, 0.5, 0.7}}, {"n", 50},          {"replicates", 5000},
         {"trunc_tol", 1e-12},        {"control_shift", 0.2}, {"conditional", true}};
  } else if (kind == "kn-scaling") {
    d = {{"eta", 0.0},
         {"alpha", 0.5},
         {"ns", {1000, 10000, 100000}},
         {"replicates", 1000},
         {"stabilization_tolerance", 0.05},
         {"quantile_cap", 100.0}};
  } else if (kind == "lemmas") {
    d = {{"lemma1", {{"a_min", 20.0}, {"b_max", 2000.0}, {"ratio", 1.3}}},
         {"lemma2",
          {{"a_start", 4.0},
           {"a_max", 1000.0},
           {"b_max", 10000.0},
           {"ratio", 1.5},
           {"random_pairs", 1000},
           {"identity_tolerance", 1e-10},
           {"floor", kLemma2Floor}}}};
  } else if (kind == "impossibility") {
    d = {{"eps_grid", {0.05, 0.1, 0.15, 0.2, 0.24}},
         {"n_min", 2},
         {"n_max", 10000},
         {"n_ratio", 1.5},
         {"grid_points", 100000},
         {"slack_tolerance", 1e-9}};
  } else {
    throw ConfigError("unknown kind '" + kind + "'");
  }
  d["kind"] = kind;
  d["output_path"] = "";
  return d;
}

inline json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

// MISSMASS_SEED, when set, replaces master_seed. Must be an unsigned 64-bit
// decimal.
inline std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("MISSMASS_SEED");
  if (raw == nullptr) return std::nullopt;
  const std::string s(raw);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("MISSMASS_SEED must be an unsigned decimal integer, got '" + s + "'");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno == ERANGE) throw ConfigError("MISSMASS_SEED does not fit in 64 bits");
  return static_cast<std::uint64_t>(v);
}

inline void apply_seed_override(json& config, std::optional<std::uint64_t> seed) {
  if (seed && config.is_object()) config["master_seed"] = *seed;
}

// Integer from a validated config value (integral floats allowed).
inline std::uint64_t count_value(const json& v) {
  if (v.is_number_integer()) return v.get<std::uint64_t>();
  return static_cast<std::uint64_t>(v.get<double>());
}

// Law parameters from an effective config object.
inline LawSpec law_spec(const json& law) {
  LawSpec spec;
  spec.family = family_from_string(law["family"].get<std::string>());
  spec.alpha = law["alpha"].get<double>();
  spec.beta_log = law["beta_log"].get<double>();
  spec.q = law["q"].get<double>();
  spec.J = static_cast<std::size_t>(count_value(law["J"]));
  spec.masses = law["masses"].get<std::vector<double>>();
  return spec;
}

namespace detail {

inline bool same_shape(const json& want, const json& got) {
  if (want.is_number()) return got.is_number();
  if (want.is_boolean()) return got.is_boolean();
  if (want.is_string()) return got.is_string();
  if (want.is_array()) return got.is_array();
  if (want.is_object()) return got.is_object();
  return true;
}

inline const char* type_name(const json& v) {
  if (v.is_number()) return "number";
  if (v.is_boolean()) return "boolean";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  if (v.is_object()) return "object";
  return "null";
}

// Overlays `user` onto `defaults`, reporting unknown keys and type clashes.
inline void merge(json& into, const json& user, const std::string& prefix, std::vector<std::string>& diags) {
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!into.contains(key)) {
      diags.push_back(path + ": unknown key");
      continue;
    }
    json& slot = into[key];
    if (!same_shape(slot, value)) {
      diags.push_back(path + ": expected " + std::string(type_name(slot)) + ", got " + type_name(value));
      continue;
    }
    if (slot.is_object()) {
      merge(slot, value, path, diags);
    } else {
      slot = value;
    }
  }
}

class Checker {
 public:
  explicit Checker(std::vector<std::string>& diags) : diags_(diags) {}

  void fail(const std::string& path, const std::string& msg) { diags_.push_back(path + ": " + msg); }

  // Non-negative integer; integral floats such as 1e5 are accepted.
  std::optional<std::uint64_t> count(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
      fail(path, "must be >= 0");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) {
      fail(path, "must be a non-negative integer");
      return std::nullopt;
    }
    return static_cast<std::uint64_t>(d);
  }

  std::optional<std::vector<std::uint64_t>> count_list(const json& v, const std::string& path) {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        fail(path, "entries must be numbers");
        return std::nullopt;
      }
      auto c = count(v[i], path + "[" + std::to_string(i) + "]");
      if (!c) return std::nullopt;
      out.push_back(*c);
    }
    return out;
  }

  std::optional<std::vector<double>> real_list(const json& v, const std::string& path) {
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) {
        fail(path, "entries must be numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  // ns: non-empty, positive, strictly increasing.
  void sample_sizes(const json& v, const std::string& path, std::uint64_t min_n = 1) {
    const auto ns = count_list(v, path);
    if (!ns) return;
    if (ns->empty()) return fail(path, "must not be empty");
    for (std::size_t i = 0; i < ns->size(); ++i) {
      if ((*ns)[i] < min_n) return fail(path, "entries must be >= " + std::to_string(min_n));
      if (i > 0 && (*ns)[i] <= (*ns)[i - 1]) return fail(path, "must be strictly increasing");
    }
  }

  void at_least(const json& v, const std::string& path, std::uint64_t lo) {
    const auto c = count(v, path);
    if (c && *c < lo) fail(path, "must be >= " + std::to_string(lo));
  }

  void open_interval(double x, double lo, double hi, const std::string& path, const std::string& name) {
    if (!(x > lo && x < hi)) {
      std::ostringstream os;
      os << name << " outside (" << lo << "," << hi << ")";
      fail(path, os.str());
    }
  }

  void positive(double x, const std::string& path) {
    if (!(x > 0.0) || !std::isfinite(x)) fail(path, "must be > 0");
  }

 private:
  std::vector<std::string>& diags_;
};

inline void check_law(const json& law, Checker& c, std::vector<std::string>& diags) {
  const auto family = law["family"].get<std::string>();
  Family fam{};
  try {
    fam = family_from_string(family);
  } catch (const Error&) {
    return c.fail("law.family", "unknown family '" + family + "'");
  }
  const std::size_t before = diags.size();
  if (fam == Family::zipf || fam == Family::zipf_log) {
    c.open_interval(law["alpha"].get<double>(), 0.0, 1.0, "law.alpha", "alpha");
  }
  if (fam == Family::geometric) c.open_interval(law["q"].get<double>(), 0.0, 1.0, "law.q", "q");
  if (fam == Family::explicit_masses) {
    if (law["masses"].empty()) c.fail("law.masses", "explicit family needs a non-empty masses list");
  } else {
    c.at_least(law["J"], "law.J", 1);
  }
  if (!c.real_list(law["masses"], "law.masses")) return;
  if (diags.size() != before) return;
  // Anything the constructor still rejects (underflow, bad explicit masses).
  try {
    (void)make_law(law_spec(law));
  } catch (const Error& e) {
    c.fail("law", e.what());
  }
}

inline void check_kind(const std::string& kind, const json& cfg, std::vector<std::string>& diags) {
  Checker c(diags);
  if (cfg.contains("replicates")) {
    c.at_least(cfg["replicates"], "replicates", kind == "posterior-dp" || kind == "kn-scaling" ? 1 : 2);
  }
  if (kind == "risk" || kind == "rate") {
    check_law(cfg["law"], c, diags);
    c.sample_sizes(cfg["ns"], "ns");
    if (kind == "rate") {
      const auto ns = c.count_list(cfg["ns"], "ns");
      if (ns && ns->size() < 3) c.fail("ns", "rate fit needs at least 3 sample sizes");
      c.positive(cfg["slope_tolerance"].get<double>(), "slope_tolerance");
      const double r2 = cfg["min_r2"].get<double>();
      if (!(r2 >= 0.0 && r2 <= 1.0)) c.fail("min_r2", "must lie in [0,1]");
    }
  } else if (kind == "geometric-probe") {
    c.open_interval(cfg["q"].get<double>(), 0.0, 1.0, "q", "q");
    c.sample_sizes(cfg["ns"], "ns");
    const auto ns = c.count_list(cfg["ns"], "ns");
    if (ns && ns->size() < 3) c.fail("ns", "slope fit needs at least 3 sample sizes");
    c.positive(cfg["loss_floor"].get<double>(), "loss_floor");
    c.positive(cfg["max_abs_slope"].get<double>(), "max_abs_slope");
  } else if (kind == "concentration") {
    check_law(cfg["law"], c, diags);
    c.at_least(cfg["n"], "n", 1);
    const auto eps = c.real_list(cfg["eps_grid"], "eps_grid");
    if (eps) {
      if (eps->empty()) c.fail("eps_grid", "must not be empty");
      for (double e : *eps) c.positive(e, "eps_grid");
    }
  } else if (kind == "posterior-dp") {
    c.sample_sizes(cfg["ns"], "ns");
    c.open_interval(cfg["trunc_tol"].get<double>(), 0.0, 1.0, "trunc_tol", "trunc_tol");
  } else if (kind == "posterior-stable") {
    const auto alphas = c.real_list(cfg["alphas"], "alphas");
    if (alphas) {
      if (alphas->empty()) c.fail("alphas", "must not be empty");
      for (double a : *alphas) c.open_interval(a, 0.0, 1.0, "alphas", "alpha");
    }
    c.at_least(cfg["n"], "n", 2);
    c.open_interval(cfg["trunc_tol"].get<double>(), 0.0, 1.0, "trunc_tol", "trunc_tol");
    c.open_interval(cfg["control_shift"].get<double>(), 0.0, 0.5, "control_shift", "control_shift");
  } else if (kind == "kn-scaling") {
    const double eta = cfg["eta"].get<double>();
    const double alpha = cfg["alpha"].get<double>();
    if (!(alpha >= 0.0 && alpha < 1.0)) c.fail("alpha", "alpha outside [0,1)");
    if (!(eta > -alpha)) c.fail("eta", "eta ≤ −alpha");
    c.sample_sizes(cfg["ns"], "ns", alpha == 0.0 ? 2 : 1);
    const auto ns = c.count_list(cfg["ns"], "ns");
    if (ns && ns->size() < 2) c.fail("ns", "stabilization check needs at least 2 sample sizes");
    c.positive(cfg["stabilization_tolerance"].get<double>(), "stabilization_tolerance");
    c.positive(cfg["quantile_cap"].get<double>(), "quantile_cap");
  } else if (kind == "lemmas") {
    const json& l1 = cfg["lemma1"];
    const double a_min = l1["a_min"].get<double>();
    if (!(a_min >= kLemma1MinShape)) {
      c.fail("lemma1.a_min", "must be >= 20 (verified domain of the density bound)");
    }
    if (!(l1["b_max"].get<double>() > a_min)) c.fail("lemma1.b_max", "must exceed a_min");
    if (!(l1["ratio"].get<double>() > 1.0)) c.fail("lemma1.ratio", "must be > 1");
    const json& l2 = cfg["lemma2"];
    if (!(l2["a_start"].get<double>() > 3.0)) c.fail("lemma2.a_start", "must be > 3");
    if (!(l2["a_max"].get<double>() >= l2["a_start"].get<double>())) c.fail("lemma2.a_max", "must be >= a_start");
    if (!(l2["b_max"].get<double>() > 2.0 * l2["a_start"].get<double>())) {
      c.fail("lemma2.b_max", "must exceed 2 a_start");
    }
    if (!(l2["ratio"].get<double>() > 1.0)) c.fail("lemma2.ratio", "must be > 1");
    c.count(l2["random_pairs"], "lemma2.random_pairs");
    c.positive(l2["identity_tolerance"].get<double>(), "lemma2.identity_tolerance");
    c.positive(l2["floor"].get<double>(), "lemma2.floor");
  } else if (kind == "impossibility") {
    const auto eps = c.real_list(cfg["eps_grid"], "eps_grid");
    if (eps) {
      if (eps->empty()) c.fail("eps_grid", "must not be empty");
      for (double e : *eps) c.open_interval(e, 0.0, 0.25, "eps_grid", "eps");
    }
    c.at_least(cfg["n_min"], "n_min", 2);
    const auto lo = c.count(cfg["n_min"], "n_min");
    const auto hi = c.count(cfg["n_max"], "n_max");
    if (lo && hi && *hi < *lo) c.fail("n_max", "must be >= n_min");
    if (!(cfg["n_ratio"].get<double>() > 1.0)) c.fail("n_ratio", "must be > 1");
    c.at_least(cfg["grid_points"], "grid_points", 2);
    const double tol = cfg["slack_tolerance"].get<double>();
    if (!(tol >= 0.0)) c.fail("slack_tolerance", "must be >= 0");
  }
}

}  // namespace detail

struct Validation {
  std::vector<std::string> diagnostics;
  // Defaults filled in; meaningful only when diagnostics is empty.
  json effective;

  bool ok() const { return diagnostics.empty(); }
};

// Collects every precondition violation without running anything. `kind`
// is the subcommand; a config-level "kind" must agree with it.
inline Validation validate(const json& config, const std::string& kind) {
  Validation v;
  if (!is_kind(kind)) {
    v.diagnostics.push_back("kind: unknown kind '" + kind + "'");
    return v;
  }
  if (!config.is_object()) {
    v.diagnostics.push_back("config: top level must be an object");
    return v;
  }
  v.effective = kind_defaults(kind);
  json user = config;
  if (user.contains("kind")) {
    if (!user["kind"].is_string() || user["kind"].get<std::string>() != kind) {
      v.diagnostics.push_back("kind: config says '" +
                              (user["kind"].is_string() ? user["kind"].get<std::string>() : user["kind"].dump()) +
                              "' but the subcommand is '" + kind + "'");
    }
    user.erase("kind");
  }
  if (!user.contains("master_seed")) {
    v.diagnostics.push_back("master_seed: missing (set it in the config or via MISSMASS_SEED)");
  } else {
    const json& seed = user["master_seed"];
    if (seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
      v.effective["master_seed"] = seed.get<std::uint64_t>();
    } else {
      v.diagnostics.push_back("master_seed: must be an unsigned 64-bit integer");
    }
    user.erase("master_seed");
  }
  detail::merge(v.effective, user, "", v.diagnostics);
  if (v.diagnostics.empty()) detail::check_kind(kind, v.effective, v.diagnostics);
  return v;
}

inline Validation validate(const json& config) {
  if (!config.is_object() || !config.contains("kind") || !config["kind"].is_string()) {
    Validation v;
    v.diagnostics.push_back("kind: missing");
    return v;
  }
  return validate(config, config["kind"].get<std::string>());
}


inline std::vector<std::uint64_t> count_list(const json& v) {
  std::vector<std::uint64_t> out;
  for (const auto& e : v) out.push_back(count_value(e));
  return out;
}

}  // namespace missmass::cli
