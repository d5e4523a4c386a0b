#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "missmass/bayes.hpp"
#include "missmass/betalab.hpp"
#include "missmass/cli/config.hpp"
#include "missmass/cli/record.hpp"
#include "missmass/montecarlo.hpp"

namespace missmass::cli {

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

inline json law_summary(const DiscreteLaw& law) {
  return {{"family", std::string(to_string(law.family()))},
          {"support", law.size()},
          {"residual", number(law.residual())}};
}

inline json risk_rows(const RiskCurve& curve) {
  json rows = json::array();
  for (const auto& p : curve.points) {
    rows.push_back({p.n, number(p.mean_loss), number(p.std_error), p.replicates, p.exhausted_support_count});
  }
  return rows;
}

inline void run_risk(const json& cfg, std::uint64_t seed, Workers w, ResultRecord& rec) {
  const DiscreteLaw law = make_law(law_spec(cfg["law"]));
  const auto ns = count_list(cfg["ns"]);
  const auto curve = risk_curve(law, ns, count_value(cfg["replicates"]), seed, w);
  rec.columns = {"n", "mean_loss", "stderr", "replicates", "exhausted_support_count"};
  rec.rows = risk_rows(curve);
  rec.summary = {{"law", law_summary(law)}};
}

inline void run_rate(const json& cfg, std::uint64_t seed, Workers w, ResultRecord& rec) {
  const DiscreteLaw law = make_law(law_spec(cfg["law"]));
  const auto ns = count_list(cfg["ns"]);
  const auto curve = risk_curve(law, ns, count_value(cfg["replicates"]), seed, w);
  // Target -alpha/2 needs an index; non-zipf laws fall back to the config alpha.
  const auto fit = fit_rate(curve, cfg["law"]["alpha"].get<double>());
  rec.columns = {"n", "mean_loss", "stderr", "slope", "target_slope", "r2"};
  for (const auto& p : curve.points) {
    rec.rows.push_back({p.n, number(p.mean_loss), number(p.std_error), number(fit.slope), fit.target_slope,
                        number(fit.r_squared)});
  }
  const double tol = cfg["slope_tolerance"].get<double>();
  const double min_r2 = cfg["min_r2"].get<double>();
  rec.summary = {{"law", law_summary(law)},
                 {"slope", number(fit.slope)},
                 {"intercept", number(fit.intercept)},
                 {"r2", number(fit.r_squared)},
                 {"target_slope", fit.target_slope},
                 {"points_used", fit.points_used}};
  if (!(std::fabs(fit.slope - fit.target_slope) <= tol)) {
    rec.add_violation("slope " + fmt(fit.slope) + " outside " + fmt(fit.target_slope) + " +/- " + fmt(tol));
  }
  if (!(fit.r_squared >= min_r2)) {
    rec.add_violation("r2 " + fmt(fit.r_squared) + " below " + fmt(min_r2));
  }
}

inline void run_geometric(const json& cfg, std::uint64_t seed, Workers w, ResultRecord& rec) {
  const double q = cfg["q"].get<double>();
  const auto ns = count_list(cfg["ns"]);
  const auto curve = geometric_inconsistency_probe(q, ns, count_value(cfg["replicates"]), seed, w);
  const auto fit = fit_rate(curve, 0.0);
  double min_loss = INFINITY;
  rec.columns = {"n", "mean_loss", "stderr", "replicates", "exhausted_support_count", "slope"};
  for (const auto& p : curve.points) {
    min_loss = std::min(min_loss, p.mean_loss);
    rec.rows.push_back({p.n, number(p.mean_loss), number(p.std_error), p.replicates, p.exhausted_support_count,
                        number(fit.slope)});
  }
  const double floor = cfg["loss_floor"].get<double>();
  const double max_slope = cfg["max_abs_slope"].get<double>();
  rec.summary = {{"support", geometric_probe_support(q, ns.back())},
                 {"min_mean_loss", number(min_loss)},
                 {"slope", number(fit.slope)},
                 {"r2", number(fit.r_squared)}};
  if (!(min_loss >= floor)) {
    rec.add_violation("min mean_loss " + fmt(min_loss) + " below floor " + fmt(floor));
  }
  if (!(std::fabs(fit.slope) < max_slope)) {
    rec.add_violation("|slope| " + fmt(std::fabs(fit.slope)) + " not below " + fmt(max_slope));
  }
}

inline void run_concentration(const json& cfg, std::uint64_t seed, Workers w, ResultRecord& rec) {
  const DiscreteLaw law = make_law(law_spec(cfg["law"]));
  const auto eps = cfg["eps_grid"].get<std::vector<double>>();
  const auto rep = concentration_check(law, count_value(cfg["n"]), count_value(cfg["replicates"]), eps, seed, w);
  rec.columns = {"eps", "empirical_exceedance", "analytic_bound", "tolerance", "a_n"};
  for (std::size_t i = 0; i < rep.eps_grid.size(); ++i) {
    rec.rows.push_back({rep.eps_grid[i], rep.empirical_exceedance[i], number(rep.analytic_bound[i]),
                        rep.tolerance[i], rep.a_n});
    if (rep.empirical_exceedance[i] > rep.analytic_bound[i] + rep.tolerance[i]) {
      rec.add_violation("eps " + fmt(rep.eps_grid[i]) + ": exceedance " + fmt(rep.empirical_exceedance[i]) +
                        " above bound " + fmt(rep.analytic_bound[i]) + " + " + fmt(rep.tolerance[i]));
    }
  }
  rec.summary = {{"law", law_summary(law)},
                 {"expected_k1", rep.expected_k1},
                 {"expected_k2", rep.expected_k2},
                 {"a_n", rep.a_n}};
}

inline json ks_cells(const KSReport& ks) {
  return {ks.statistic, ks.critical_value_5pct, ks.acceptance_threshold, ks.accepted};
}

inline void run_posterior_dp(const json& cfg, std::uint64_t seed, Workers w, ResultRecord& rec) {
  const auto ns = count_list(cfg["ns"]);
  const std::size_t R = count_value(cfg["replicates"]);
  const double tol = cfg["trunc_tol"].get<double>();
  const bool control = cfg["negative_control"].get<bool>();
  rec.columns = {"case", "n", "ref_a", "ref_b", "statistic", "critical_value_5pct", "acceptance_threshold",
                 "accepted"};
  double worst = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const std::uint64_t n = ns[i];
    const std::uint64_t s = missmass::detail::derive_seed(seed, i);
    const BetaParams ref{1.0, static_cast<double>(n)};
    const auto ks = dp_posterior_check(n, R, tol, s, w);
    worst = std::max(worst, ks.statistic);
    json row = {"posterior", n, ref.a, ref.b};
    for (const auto& c : ks_cells(ks)) row.push_back(c);
    rec.rows.push_back(row);
    if (!ks.accepted) {
      rec.add_violation("n " + std::to_string(n) + ": KS " + fmt(ks.statistic) + " not below " +
                        fmt(ks.acceptance_threshold));
    }
    if (control) {
      const BetaParams wrong{2.0, static_cast<double>(n)};
      const auto neg = dp_posterior_check(n, R, tol, s, w, wrong);
      json crow = {"control", n, wrong.a, wrong.b};
      for (const auto& c : ks_cells(neg)) crow.push_back(c);
      rec.rows.push_back(crow);
      if (neg.accepted) rec.add_violation("n " + std::to_string(n) + ": negative control Beta(2, n) not rejected");
    }
  }
  rec.summary = {{"max_statistic", worst}, {"replicates", R}};
}

inline void run_posterior_stable(const json& cfg, std::uint64_t seed, Workers w, ResultRecord& rec) {
  const auto alphas = cfg["alphas"].get<std::vector<double>>();
  const std::uint64_t n = count_value(cfg["n"]);
  const std::size_t R = count_value(cfg["replicates"]);
  const double tol = cfg["trunc_tol"].get<double>();
  const double shift = cfg["control_shift"].get<double>();
  const bool conditional = cfg["conditional"].get<bool>();
  rec.columns = {"case",      "alpha",    "composition_alpha",   "k", "n_samples", "statistic", "critical_value_5pct",
                 "acceptance_threshold", "accepted"};
  double worst = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double a = alphas[i];
    const std::uint64_t s = missmass::detail::derive_seed(seed, 100 + i);
    auto push = [&](const char* name, double comp, std::uint64_t k, const KSReport& ks) {
      json row = {name, a, number(comp), k, ks.n_samples};
      for (const auto& c : ks_cells(ks)) row.push_back(c);
      rec.rows.push_back(row);
    };
    const auto ks = stable_posterior_check(a, n, R, tol, s, w);
    worst = std::max(worst, ks.statistic);
    push("mixture", a, 0, ks);
    if (!ks.accepted) {
      rec.add_violation("alpha " + fmt(a) + ": two-sample KS " + fmt(ks.statistic) + " not below " +
                        fmt(ks.acceptance_threshold));
    }
    // Mismatched discount for the composition arm; stays inside (0,1).
    const double wrong = a + shift < 1.0 ? a + shift : a - shift;
    const auto neg = stable_posterior_check(a, n, R, tol, s, w, wrong);
    push("control", wrong, 0, neg);
    if (neg.accepted) rec.add_violation("alpha " + fmt(a) + ": negative control not rejected");
    if (conditional) {
      const auto cond = stable_posterior_conditional(a, n, R, tol, s, w);
      push("conditional", a, cond.k, cond.ks);
      if (!cond.ks.accepted) {
        rec.add_violation("alpha " + fmt(a) + ": conditional KS at k = " + std::to_string(cond.k) + " rejected");
      }
    }
  }
  rec.summary = {{"n", n}, {"replicates", R}, {"max_statistic", worst}};
}

inline void run_kn_scaling(const json& cfg, std::uint64_t seed, Workers w, ResultRecord& rec) {
  const PYParams py{cfg["eta"].get<double>(), cfg["alpha"].get<double>()};
  const auto ns = count_list(cfg["ns"]);
  const auto table = kn_scaling(py, ns, count_value(cfg["replicates"]), seed, w);
  const double cap = cfg["quantile_cap"].get<double>();
  rec.columns = {"n", "q05", "q25", "q50", "q75", "q95", "mean"};
  for (const auto& row : table.rows) {
    json r = {row.n};
    for (double q : row.quantiles) {
      r.push_back(number(q));
      if (!(q > 0.0 && q <= cap)) {
        rec.add_violation("n " + std::to_string(row.n) + ": quantile " + fmt(q) + " outside (0, " + fmt(cap) + "]");
      }
    }
    r.push_back(number(row.mean));
    rec.rows.push_back(r);
  }
  const double prev = table.rows[table.rows.size() - 2].quantiles[2];
  const double last = table.rows.back().quantiles[2];
  const double change = std::fabs(last - prev) / prev;
  const double tol = cfg["stabilization_tolerance"].get<double>();
  rec.summary = {{"normalization", table.normalization}, {"median_relative_change", number(change)}};
  if (!(change <= tol)) {
    rec.add_violation("median relative change " + fmt(change) + " above " + fmt(tol));
  }
}

inline void run_lemmas(const json& cfg, std::uint64_t seed, Workers, ResultRecord& rec) {
  const json& l1 = cfg["lemma1"];
  const json& l2 = cfg["lemma2"];
  rec.columns = {"lemma", "a", "b", "value", "margin"};

  const auto r1 = lemma1_sweep(l1["a_min"].get<double>(), l1["b_max"].get<double>(), l1["ratio"].get<double>());
  for (const auto& p : r1.points) rec.rows.push_back({"lemma1", p.a, p.b, p.value, p.margin});
  if (r1.violations > 0) rec.add_violation("lemma1: " + std::to_string(r1.violations) + " grid points with margin <= 0");

  // Grid rows: value is the gap, margin is sqrt(a) * gap minus the floor.
  const double floor = l2["floor"].get<double>();
  const auto r2 = lemma2_sweep(l2["a_start"].get<double>(), l2["a_max"].get<double>(), l2["b_max"].get<double>(),
                               l2["ratio"].get<double>());
  for (const auto& p : r2.points) rec.rows.push_back({"lemma2", p.a, p.b, p.value, p.margin - floor});
  if (r2.points.empty()) rec.add_violation("lemma2: empty grid");
  if (!(r2.min_margin >= floor)) {
    rec.add_violation("lemma2: min sqrt(a) gap " + fmt(r2.min_margin) + " below floor " + fmt(floor));
  }

  // Random admissible pairs: closed form against the CDF difference. The
  // margin is tolerance minus the discrepancy.
  const double tol = l2["identity_tolerance"].get<double>();
  const double b_max = l2["b_max"].get<double>();
  const std::uint64_t pairs = count_value(l2["random_pairs"]);
  Rng rng(RngStream{seed, 0});
  double worst = 0.0;
  std::size_t bad = 0;
  for (std::uint64_t i = 0; i < pairs; ++i) {
    const double b = 6.5 + (b_max - 6.5) * rng.uniform();
    const double a = 3.0 + (b / 2.0 - 3.0) * rng.uniform_open();
    const double gap = lemma2_gap(a, b);
    const double err = std::fabs(gap - lemma2_gap_cdf(a, b));
    worst = std::max(worst, err);
    if (!(err <= tol)) ++bad;
    rec.rows.push_back({"lemma2-identity", a, b, gap, tol - err});
  }
  if (bad > 0) rec.add_violation("lemma2: " + std::to_string(bad) + " random pairs off the CDF difference by > " + fmt(tol));

  rec.summary = {{"lemma1_points", r1.points.size()},
                 {"lemma1_min_margin", number(r1.min_margin)},
                 {"lemma1_violations", r1.violations},
                 {"lemma2_points", r2.points.size()},
                 {"lemma2_min_scaled_gap", number(r2.min_margin)},
                 {"lemma2_identity_max_error", worst}};
}

inline std::vector<std::uint64_t> integer_grid(std::uint64_t lo, std::uint64_t hi, double ratio) {
  std::vector<std::uint64_t> out;
  for (double x : geometric_grid(static_cast<double>(lo), static_cast<double>(hi), ratio)) {
    const auto n = static_cast<std::uint64_t>(std::llround(x));
    if (out.empty() || n > out.back()) out.push_back(std::min(n, hi));
  }
  if (out.back() != hi) out.push_back(hi);
  return out;
}

inline void run_impossibility(const json& cfg, std::uint64_t, Workers w, ResultRecord& rec) {
  const auto eps = cfg["eps_grid"].get<std::vector<double>>();
  const auto ns = integer_grid(count_value(cfg["n_min"]), count_value(cfg["n_max"]), cfg["n_ratio"].get<double>());
  const std::size_t grid = count_value(cfg["grid_points"]);
  const double tol = cfg["slack_tolerance"].get<double>();
  std::vector<ImpossibilityResult> res(eps.size() * ns.size());
  parallel_for(res.size(), w, [&](std::size_t i) {
    res[i] = impossibility_profile(ns[i % ns.size()], eps[i / ns.size()], grid);
  });
  rec.columns = {"eps", "n", "infimum", "argmin", "bound", "slack"};
  double min_slack = INFINITY;
  for (const auto& r : res) {
    rec.rows.push_back({r.eps, r.n, r.infimum, r.argmin, r.bound, r.slack});
    min_slack = std::min(min_slack, r.slack);
    if (r.slack < -tol) {
      rec.add_violation("eps " + fmt(r.eps) + ", n " + std::to_string(r.n) + ": slack " + fmt(r.slack));
    }
  }
  rec.summary = {{"grid_n", ns.size()}, {"min_slack", min_slack}};
}

}  // namespace detail

// Validates, dispatches to the module pipeline and returns the record.
// Invalid configs raise ConfigError listing every diagnostic; library
// errors propagate unchanged.
inline ResultRecord run(const json& config, const std::string& kind, Workers workers = {}) {
  const Validation v = validate(config, kind);
  if (!v.ok()) {
    std::string msg = "invalid config:";
    for (const auto& d : v.diagnostics) msg += "\n  " + d;
    throw ConfigError(msg);
  }
  const auto start = std::chrono::steady_clock::now();
  ResultRecord rec;
  rec.kind = kind;
  rec.config = v.effective;
  const json& cfg = v.effective;
  const std::uint64_t seed = cfg["master_seed"].get<std::uint64_t>();
  if (kind == "risk") detail::run_risk(cfg, seed, workers, rec);
  else if (kind == "rate") detail::run_rate(cfg, seed, workers, rec);
  else if (kind == "geometric-probe") detail::run_geometric(cfg, seed, workers, rec);
  else if (kind == "concentration") detail::run_concentration(cfg, seed, workers, rec);
  else if (kind == "posterior-dp") detail::run_posterior_dp(cfg, seed, workers, rec);
  else if (kind == "posterior-stable") detail::run_posterior_stable(cfg, seed, workers, rec);
  else if (kind == "kn-scaling") detail::run_kn_scaling(cfg, seed, workers, rec);
  else if (kind == "lemmas") detail::run_lemmas(cfg, seed, workers, rec);
  else if (kind == "impossibility") detail::run_impossibility(cfg, seed, workers, rec);
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

inline ResultRecord run(const json& config, Workers workers = {}) {
  if (!config.is_object() || !config.contains("kind") || !config["kind"].is_string()) {
    throw ConfigError("invalid config:\n  kind: missing");
  }
  return run(config, config["kind"].get<std::string>(), workers);
}

}  // namespace missmass::cli
