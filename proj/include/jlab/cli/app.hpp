#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jlab/circle_oracle.hpp"
#include "jlab/cli/config.hpp"
#include "jlab/empirical_measure.hpp"
#include "jlab/error.hpp"
#include "jlab/julia_sampler.hpp"
#include "jlab/rational_map.hpp"
#include "jlab/recurrence.hpp"
#include "jlab/rng.hpp"
#include "jlab/thermo.hpp"

namespace jlab::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kConfigError = 2, kNumericFailure = 3 };

// Streams reserved for experiment-level draws, disjoint from sample walks.
inline constexpr std::uint64_t kCaseStream = std::uint64_t{1} << 41;
inline constexpr std::uint64_t kCovarianceStream = std::uint64_t{1} << 42;

using Json = nlohmann::ordered_json;

/// Collects named pass/fail checks for a report.
class Checks {
public:
  void add(const std::string& name, Json value, Json threshold, bool pass) {
    Json j;
    j["name"] = name;
    j["value"] = std::move(value);
    j["threshold"] = std::move(threshold);
    j["pass"] = pass;
    list_.push_back(std::move(j));
    all_ = all_ && pass;
  }
  bool all() const { return all_; }
  const Json& json() const { return list_; }

private:
  Json list_ = Json::array();
  bool all_ = true;
};

struct Context {
  const ExperimentConfig& cfg;
  const RationalMap& map;
  unsigned workers;
  std::filesystem::path out;
  std::ostream& log;
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw Error("cannot write '" + path.string() + "'");
  f << text;
  if (!f)
    throw Error("failed writing '" + path.string() + "'");
}

template <class Writer>
void write_csv(const Context& ctx, const std::string& name, Writer&& w) {
  std::ostringstream os;
  w(os);
  write_text(ctx.out / name, os.str());
}

inline bool is_exact_power(const RationalMap& map) {
  const auto& p = map.numerator();
  const auto& q = map.denominator();
  if (q.degree() != 0 || q.coefficient(0) != Complex(1.0))
    return false;
  for (std::size_t i = 0; i < p.degree(); ++i)
    if (p.coefficient(i) != Complex{})
      return false;
  return p.leading() == Complex(1.0);
}

inline RadiusSchedule schedule(const ExperimentConfig& c) { return RadiusSchedule(c.r0, c.k_max); }

inline JuliaSample sample(const Context& ctx) {
  return inverse_iteration_sample(ctx.map, ctx.cfg.sample_count, ctx.cfg.burn_in, ctx.cfg.seed, ctx.workers);
}

/// Probe walks come from a stream range disjoint from the sample's.
inline std::vector<Complex> probe_points(const Context& ctx) {
  if (ctx.cfg.probes == 0)
    return {};
  return inverse_iteration_sample(ctx.map, ctx.cfg.probes, ctx.cfg.burn_in, ctx.cfg.seed, ctx.workers, std::nullopt,
                                  kProbeStreamOffset)
      .points;
}

inline Json expansion_json(const ExpansionEstimate& e) {
  Json j;
  j["lambda_hat"] = e.lambda_hat;
  j["C_hat"] = e.C_hat;
  j["log_lambda_stderr"] = e.log_lambda_stderr;
  j["k_range"] = {e.k_min, e.k_max};
  return j;
}

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v)
    s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double mean_stderr(const std::vector<double>& v) {
  if (v.size() < 2)
    return 0.0;
  const double m = mean(v);
  double s2 = 0.0;
  for (double x : v)
    s2 += (x - m) * (x - m);
  return std::sqrt(s2 / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

} // namespace detail

inline Json run_sample(const Context& ctx, Checks& checks) {
  const auto s = detail::sample(ctx);
  detail::write_csv(ctx, "sample.csv", [&](std::ostream& os) { write_sample_csv(os, s.points); });
  const auto h = hyperbolicity_estimate(ctx.map, s.points, ctx.cfg.hyperbolicity_n);
  if (ctx.cfg.check_lambda_min)
    checks.add("lambda_hat", h.lambda_hat, *ctx.cfg.check_lambda_min, h.lambda_hat > *ctx.cfg.check_lambda_min);
  Json r;
  r["count"] = s.points.size();
  r["burn_in"] = s.burn_in;
  r["start"] = detail::complex_json(s.start);
  r["hyperbolicity"] = detail::expansion_json(h);
  return r;
}

inline Json run_dimension(const Context& ctx, Checks& checks) {
  const auto& c = ctx.cfg;
  Json r;

  const auto spectrum = periodic_spectrum(ctx.map, c.period_n);
  std::vector<double> grid;
  for (int i = 0; i < c.grid_points; ++i)
    grid.push_back(c.s_lo + (c.s_hi - c.s_lo) * i / (c.grid_points - 1));
  const auto curve = pressure_curve(spectrum, grid);
  detail::write_csv(ctx, "pressure.csv", [&](std::ostream& os) { write_pressure_csv(os, curve); });
  bool decreasing = true;
  for (std::size_t i = 1; i < curve.values.size(); ++i)
    decreasing = decreasing && curve.values[i].second < curve.values[i - 1].second;
  checks.add("pressure_decreasing", decreasing, true, decreasing);
  if (ctx.map.has_unit_circle_julia()) {
    const double d = ctx.map.degree(), n = c.period_n;
    double worst = 0.0;
    for (const auto& [s, p] : curve.values)
      worst = std::max(worst, std::abs(p - std::log((std::pow(d, n) - 1.0) * std::pow(d, -n * s)) / n));
    checks.add("pressure_closed_form_error", worst, 1e-9, worst <= 1e-9);
    r["pressure_closed_form_error"] = worst;
  }
  const auto root = hausdorff_dimension(spectrum, c.thermo_tol, c.s_lo, c.s_hi);
  r["bowen"] = {{"s", root.s}, {"tol", root.tol}, {"period_n", root.n}, {"repelling_points", spectrum.log_multipliers.size()}};

  const auto s = detail::sample(ctx);
  const auto h = hyperbolicity_estimate(ctx.map, s.points, c.hyperbolicity_n);
  r["hyperbolicity"] = detail::expansion_json(h);
  const auto sched = detail::schedule(c);
  const EmpiricalMeasure mu(s.points, sched.r_min());
  const auto probes = detail::probe_points(ctx);
  std::vector<std::optional<DimensionEstimate>> dims(probes.size());
  std::vector<std::string> errors(probes.size());
  parallel_for(probes.size(), ctx.workers, [&](std::size_t i) {
    try {
      dims[i] = local_dimension(mu, probes[i], sched);
    } catch (const NumericError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<double> ds;
  Json table = Json::array();
  for (std::size_t i = 0; i < probes.size(); ++i) {
    Json row;
    row["probe"] = detail::complex_json(probes[i]);
    row["dimension"] = dims[i] ? dimension_to_json(*dims[i]) : Json();
    row["error"] = errors[i].empty() ? Json() : Json(errors[i]);
    table.push_back(std::move(row));
    if (dims[i])
      ds.push_back(dims[i]->slope);
  }
  detail::write_csv(ctx, "dimension.csv", [&](std::ostream& os) {
    os << "probe_re,probe_im,d,d_stderr,d_lower,d_upper,k_first,k_last\n";
    for (std::size_t i = 0; i < probes.size(); ++i) {
      if (!dims[i])
        continue;
      const auto& d = *dims[i];
      os << format_double(probes[i].real()) << ',' << format_double(probes[i].imag()) << ',' << format_double(d.slope)
         << ',' << format_double(d.slope_stderr) << ',' << format_double(d.d_lower) << ','
         << format_double(d.d_upper) << ',' << d.k_first << ',' << d.k_last << '\n';
    }
  });
  const double md = detail::mean(ds), md_se = detail::mean_stderr(ds);
  r["local_dimension"] = {{"mean", md}, {"stderr", md_se}, {"probes", probes.size()}, {"estimated", ds.size()}};
  r["probes"] = std::move(table);

  if (c.check_bowen_min)
    checks.add("bowen_min", root.s, *c.check_bowen_min, root.s >= *c.check_bowen_min);
  if (c.check_bowen_max)
    checks.add("bowen_max", root.s, *c.check_bowen_max, root.s <= *c.check_bowen_max);
  if (c.check_lambda_min)
    checks.add("lambda_hat", h.lambda_hat, *c.check_lambda_min, h.lambda_hat > *c.check_lambda_min);
  if (c.check_dimension_gap) {
    const bool ok = !ds.empty() && std::abs(root.s - md) <= *c.check_dimension_gap;
    checks.add("bowen_vs_mean_local_dimension", std::abs(root.s - md), *c.check_dimension_gap, ok);
  }
  if (c.check_mean_dimension) {
    const bool ok = !ds.empty() && std::abs(md - *c.check_mean_dimension) <= c.check_mean_dimension_tol;
    checks.add("mean_local_dimension", md, Json::array({*c.check_mean_dimension, c.check_mean_dimension_tol}), ok);
  }
  return r;
}

/// Monotonicity cases: z and w drawn from the sample, r log-uniform in
/// [1e-3, 0.5], k uniform in [1, 4]; every fourth case puts w inside N_r(z)
/// by taking w = z.
inline std::vector<MonotonicityCase> monotonicity_cases(const Context& ctx, std::span<const Complex> pts) {
  const CounterRng rng(ctx.cfg.seed);
  std::vector<MonotonicityCase> cases;
  const auto n = static_cast<std::uint32_t>(std::min<std::size_t>(pts.size(), UINT32_MAX));
  for (std::size_t i = 0; i < ctx.cfg.monotonicity_cases; ++i) {
    const auto s = kCaseStream + i;
    const Complex z = pts[rng.below(s, 0, n)];
    const Complex w = i % 4 == 0 ? z : pts[rng.below(s, 1, n)];
    const double r = 1e-3 * std::pow(500.0, rng.uniform(s, 2));
    const double k = 1.0 + 3.0 * rng.uniform(s, 3);
    cases.push_back({w, z, r, k});
  }
  return cases;
}

inline Json run_recurrence(const Context& ctx, Checks& checks) {
  const auto& c = ctx.cfg;
  const auto sched = detail::schedule(c);
  const bool forward = ctx.map.has_unit_circle_julia();
  std::vector<RecurrenceRecord> records;
  if (forward) {
    auto probes = detail::probe_points(ctx);
    records.resize(probes.size());
    parallel_for(probes.size(), ctx.workers,
                 [&](std::size_t i) { records[i] = recurrence_record(ctx.map, probes[i], sched, c.n_max); });
  } else {
    const Complex anchor = most_repelling_fixed_point(ctx.map);
    records.resize(c.probes);
    parallel_for(c.probes, ctx.workers, [&](std::size_t i) {
      ShadowedOrbit orbit(ctx.map, anchor, c.n_max, c.burn_in, c.seed, kProbeStreamOffset + i);
      records[i] = recurrence_record(orbit, sched, c.n_max);
    });
  }
  for (const auto& z : c.extra_probes)
    records.push_back(recurrence_record(ctx.map, z, sched, c.n_max));
  detail::write_csv(ctx, "recurrence.csv", [&](std::ostream& os) { write_recurrence_csv(os, records); });

  Json rows = Json::array();
  for (const auto& rec : records) {
    Json j;
    j["probe"] = detail::complex_json(rec.center);
    try {
      j["recurrence"] = rate_to_json(estimate_rate(rec, c.n_max));
      j["error"] = Json();
    } catch (const NumericError& e) {
      j["recurrence"] = Json();
      j["error"] = e.what();
    }
    const auto p = detect_period(ctx.map, rec.center);
    j["period"] = p ? Json(*p) : Json();
    rows.push_back(std::move(j));
  }
  Json r;
  r["orbit_model"] = forward ? "forward" : "shadowed";
  r["n_max"] = c.n_max;
  r["probes"] = std::move(rows);

  if (c.monotonicity_cases > 0) {
    const auto pts = inverse_iteration_sample(ctx.map, std::max<std::size_t>(c.sample_count, 1), c.burn_in, c.seed,
                                              ctx.workers)
                         .points;
    const auto cases = monotonicity_cases(ctx, pts);
    const auto rep = verify_monotonicity(ctx.map, cases, c.monotonicity_n_max, ctx.workers);
    Json m;
    m["cases"] = cases.size();
    m["n_max"] = c.monotonicity_n_max;
    m["eq9_violations"] = rep.eq9_violations;
    m["eq10_violations"] = rep.eq10_violations;
    m["sandwich_checked"] = rep.sandwich_checked;
    m["sandwich_left_failures"] = rep.sandwich_left_failures;
    m["sandwich_right_failures"] = rep.sandwich_right_failures;
    r["monotonicity"] = std::move(m);
    checks.add("radius_monotonicity_violations", rep.eq9_violations, 0, rep.eq9_violations == 0);
    checks.add("incidence_monotonicity_violations", rep.eq10_violations, 0, rep.eq10_violations == 0);
  }
  return r;
}

inline Json run_covariance(const Context& ctx, Checks& checks) {
  const auto& c = ctx.cfg;
  const auto f = observable_by_name(c.observable);
  std::vector<CovarianceEstimate> seq;
  Complex z0;
  if (ctx.map.has_unit_circle_julia()) {
    z0 = std::polar(1.0, 2.0 * std::numbers::pi * c.start_turns);
    ForwardOrbit src(ctx.map, z0);
    seq = covariance_sequence(z0, src, f, f, c.cov_n_lo, c.cov_n_hi, c.cov_length);
  } else {
    ShadowedOrbit src(ctx.map, most_repelling_fixed_point(ctx.map), c.cov_length + static_cast<std::size_t>(c.cov_n_hi),
                      c.burn_in, c.seed, kCovarianceStream);
    z0 = src.center();
    seq = covariance_sequence(z0, src, f, f, c.cov_n_lo, c.cov_n_hi, c.cov_length);
  }
  detail::write_csv(ctx, "covariance.csv", [&](std::ostream& os) { write_covariance_csv(os, seq); });
  const auto cls = decay_fit(decay_sequence(seq));
  Json r;
  r["observable"] = c.observable;
  r["start"] = detail::complex_json(z0);
  r["length"] = c.cov_length;
  r["batches"] = kBatches;
  r["classification"] = classification_to_json(cls);
  if (c.check_decay_model)
    checks.add("decay_model", to_string(cls.model), *c.check_decay_model, to_string(cls.model) == *c.check_decay_model);
  return r;
}

inline Json run_verify(const Context& ctx, Checks& checks) {
  const auto& c = ctx.cfg;
  const auto sched = detail::schedule(c);
  const auto s = detail::sample(ctx);
  const EmpiricalMeasure mu(s.points, sched.r_min());
  ComparisonReport rep;
  if (ctx.map.has_unit_circle_julia()) {
    auto probes = detail::probe_points(ctx);
    probes.insert(probes.end(), c.extra_probes.begin(), c.extra_probes.end());
    rep = compare_rate_dimension(ctx.map, mu, probes, sched, c.n_max, c.rate_tol, ctx.workers);
  } else {
    rep = compare_rate_dimension_shadowed(ctx.map, mu, c.probes, sched, c.n_max, c.rate_tol, c.seed, ctx.workers,
                                          c.burn_in);
    if (!c.extra_probes.empty()) {
      auto extra = compare_rate_dimension(ctx.map, mu, c.extra_probes, sched, c.n_max, c.rate_tol, ctx.workers);
      for (auto& p : extra.probes)
        rep.probes.push_back(std::move(p));
      rep = jlab::detail::summarize(std::move(rep.probes), c.rate_tol);
    }
  }
  std::vector<RecurrenceRecord> records;
  for (const auto& p : rep.probes)
    records.push_back(p.record);
  detail::write_csv(ctx, "verify_recurrence.csv", [&](std::ostream& os) { write_recurrence_csv(os, records); });

  bool exceptions_exact = true;
  for (const auto& p : rep.probes)
    if (p.period)
      exceptions_exact = exceptions_exact && p.rate && p.rate->bounded && p.rate->rate == 0.0 &&
                         p.rate->R_lower == 0.0 && p.rate->R_upper == 0.0;
  checks.add("pass_fraction", rep.pass_fraction(), c.check_pass_fraction,
             rep.evaluated > 0 && rep.pass_fraction() >= c.check_pass_fraction);
  if (rep.exceptions > 0)
    checks.add("measure_zero_exceptions_rate_zero", exceptions_exact, true, exceptions_exact);
  Json r = comparison_to_json(rep);
  r["n_max"] = c.n_max;
  r["sample_count"] = s.points.size();
  return r;
}

inline Json run_oracle(const Context& ctx, Checks& checks) {
  const auto& c = ctx.cfg;
  if (!detail::is_exact_power(ctx.map))
    throw ConfigError("map: the oracle needs T(z) = z^d exactly");
  const int d = ctx.map.degree();
  const CounterRng rng(c.seed);

  // Forward orbits in floating point track the exact orbit only while the
  // accumulated expansion d^n stays well below 1/eps.
  const auto horizon = static_cast<std::uint64_t>(std::floor(30.0 * std::log(2.0) / std::log(d)));
  std::size_t compared = 0, mismatches = 0, beyond = 0;
  std::ostringstream rt;
  rt << "probe_re,probe_im,r,tau,truncated,exact\n";
  for (std::size_t i = 0; i < c.oracle_cases; ++i) {
    const auto s = kCaseStream + i;
    const BigInt q = 3 + BigInt(rng.below(s, 0, (1u << 20) - 3));
    const BigInt p = BigInt(rng.below(s, 1, static_cast<std::uint32_t>(q)));
    const RationalAngle theta(p, q);
    const double r = 0.01 * std::pow(10.0, rng.uniform(s, 2));
    const Complex z = theta.to_complex();
    const auto num = return_time(ctx.map, z, z, r, c.oracle_n_max);
    const auto exact = oracle_return_time(theta, d, exact_rational(chord_to_halfwidth(r)), c.oracle_n_max);
    rt << format_double(z.real()) << ',' << format_double(z.imag()) << ',' << format_double(r) << ',' << num.n_max()
       << ',' << (num.found() ? 0 : 1) << ',' << exact.n_max() << '\n';
    if (!exact.found() || exact.value() > horizon) {
      ++beyond;
      continue;
    }
    ++compared;
    mismatches += !(num == exact);
  }
  detail::write_text(ctx.out / "oracle_recurrence.csv", rt.str());
  const double mismatch = compared ? static_cast<double>(mismatches) / static_cast<double>(compared) : 0.0;

  const auto smp = detail::sample(ctx);
  const EmpiricalMeasure mu(smp.points, detail::schedule(c).r_min());
  const double n = static_cast<double>(mu.size());
  std::size_t within = 0;
  std::ostringstream ms;
  ms << "probe_re,probe_im,r,measure,exact\n";
  for (std::size_t i = 0; i < c.oracle_arcs; ++i) {
    const auto s = kCaseStream + c.oracle_cases + i;
    const BigInt q = 3 + BigInt(rng.below(s, 0, (1u << 20) - 3));
    const RationalAngle theta(BigInt(rng.below(s, 1, static_cast<std::uint32_t>(q))), q);
    const double r = 1e-3 * std::pow(500.0, rng.uniform(s, 2));
    const Complex z = theta.to_complex();
    const double measured = mu.measure(z, r);
    const double exact = chord_ball_measure(r);
    const double se = std::sqrt(exact * (1.0 - exact) / n);
    within += std::abs(measured - exact) <= 3.0 * se;
    ms << format_double(z.real()) << ',' << format_double(z.imag()) << ',' << format_double(r) << ','
       << format_double(measured) << ',' << format_double(exact) << '\n';
  }
  detail::write_text(ctx.out / "oracle_measure.csv", ms.str());
  const double within_fraction = c.oracle_arcs ? static_cast<double>(within) / static_cast<double>(c.oracle_arcs) : 1.0;

  checks.add("return_time_mismatch_fraction", mismatch, c.check_oracle_mismatch, mismatch < c.check_oracle_mismatch);
  checks.add("arc_measure_within_3se_fraction", within_fraction, c.check_measure_fraction,
             within_fraction >= c.check_measure_fraction);
  Json r;
  r["return_times"] = {{"cases", c.oracle_cases},     {"compared", compared},   {"beyond_horizon", beyond},
                       {"horizon", horizon},          {"mismatches", mismatches}, {"mismatch_fraction", mismatch}};
  r["arc_measures"] = {{"arcs", c.oracle_arcs}, {"sample_count", smp.points.size()}, {"within_3se", within},
                       {"within_fraction", within_fraction}};
  return r;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"sample", "dimension", "recurrence", "covariance", "verify", "oracle"};
  return names;
}

/// Runs one subcommand; returns the process exit code. Progress and timing
/// go to `log`, diagnostics to `err`; artifacts go to the output directory.
inline int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  CLI::App app{"Julia-set recurrence and dimension experiments", "jlab"};
  std::string sub, config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::vector<std::string> sets;
  app.add_option("subcommand", sub, "sample|dimension|recurrence|covariance|verify|oracle")
      ->required()
      ->check(CLI::IsMember(subcommands()));
  app.add_option("--config", config_path, "experiment config file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "overrides sampler.seed");
  app.add_option("--workers", workers, "worker threads; results do not depend on it")->check(CLI::Range(1u, 1024u));
  app.add_option("--out", out_dir, "output directory (default: output.dir, then $JLAB_OUT, then ./jlab_out)");
  app.add_option("--set", sets, "override a config key: key=value");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    log << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "jlab: " << e.what() << '\n';
    return kConfigError;
  }

  ExperimentConfig cfg;
  std::filesystem::path out;
  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + s + "'");
      overrides.emplace_back(jlab::cli::detail::trim(s.substr(0, eq)), jlab::cli::detail::trim(s.substr(eq + 1)));
    }
    if (seed_opt->count() > 0)
      overrides.emplace_back("sampler.seed", std::to_string(seed));
    cfg = load_config(config_path, overrides);
    if (!out_dir.empty())
      out = out_dir;
    else if (cfg.output_dir)
      out = *cfg.output_dir;
    else if (const char* env = std::getenv("JLAB_OUT"); env && *env)
      out = env;
    else
      out = "jlab_out";
    std::filesystem::create_directories(out);
  } catch (const ConfigError& e) {
    err << "jlab: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "jlab: " << e.what() << '\n';
    return kConfigError;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const RationalMap map = map_from_json(cfg.map_spec);
    const Context ctx{cfg, map, workers, out, log};
    Checks checks;
    Json results;
    if (sub == "sample")
      results = run_sample(ctx, checks);
    else if (sub == "dimension")
      results = run_dimension(ctx, checks);
    else if (sub == "recurrence")
      results = run_recurrence(ctx, checks);
    else if (sub == "covariance")
      results = run_covariance(ctx, checks);
    else if (sub == "verify")
      results = run_verify(ctx, checks);
    else
      results = run_oracle(ctx, checks);

    Json report;
    report["tool"] = "jlab";
    report["version"] = kVersion;
    report["subcommand"] = sub;
    report["seed"] = cfg.seed;
    report["map"] = map_to_json(map);
    Json echo = Json::object();
    for (const auto& [k, v] : cfg.resolved)
      echo[k] = v;
    report["config"] = std::move(echo);
    report["results"] = std::move(results);
    report["checks"] = checks.json();
    report["pass"] = checks.all();
    detail::write_text(out / (sub + ".json"), report.dump(2) + "\n");

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << sub << ": " << (checks.all() ? "all checks passed" : "CHECK FAILED") << " in " << fmt::format("{:.2f}", secs)
        << " s; artifacts in " << out.string() << '\n';
    for (const auto& ch : checks.json())
      log << "  " << (ch["pass"].get<bool>() ? "ok  " : "FAIL") << ' ' << ch["name"].get<std::string>() << " = "
          << ch["value"].dump() << " (threshold " << ch["threshold"].dump() << ")\n";
    return checks.all() ? kPass : kCheckFailed;
  } catch (const ConfigError& e) {
    err << "jlab: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "jlab: invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "jlab: numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

} // namespace jlab::cli
