#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "jlab/complex.hpp"
#include "jlab/error.hpp"
#include "jlab/rational_map.hpp"

namespace jlab::cli {

/// One experiment: `key = value` lines, `#` comments. Keys are fixed; the
/// defaults below apply to anything not set.
struct ExperimentConfig {
  nlohmann::json map_spec;

  std::size_t sample_count = 100'000;
  std::size_t burn_in = 60;
  std::uint64_t seed = 0;

  double r0 = 0.5;
  int k_max = 14;

  std::uint64_t n_max = 10'000'000;
  std::size_t probes = 20;
  double rate_tol = 0.15;
  std::vector<Complex> extra_probes;
  std::size_t monotonicity_cases = 0;
  std::uint64_t monotonicity_n_max = 100'000;

  int period_n = 10;
  double s_lo = 0.0;
  double s_hi = 2.0;
  double thermo_tol = 1e-4;
  int grid_points = 21;
  int hyperbolicity_n = 20;

  std::string observable = "sawtooth";
  int cov_n_lo = 1;
  int cov_n_hi = 12;
  std::size_t cov_length = 10'000'000;
  double start_turns = 0.1234567;

  std::size_t oracle_cases = 1000;
  std::size_t oracle_arcs = 100;
  std::uint64_t oracle_n_max = 10'000;

  std::optional<double> check_bowen_min;
  std::optional<double> check_bowen_max;
  std::optional<double> check_dimension_gap;
  std::optional<double> check_lambda_min;
  std::optional<double> check_mean_dimension;
  double check_mean_dimension_tol = 0.1;
  double check_pass_fraction = 0.9;
  std::optional<std::string> check_decay_model;
  double check_oracle_mismatch = 0.02;
  double check_measure_fraction = 1.0;

  std::optional<std::string> output_dir;

  /// Every key that was set, after overrides, for the report. output.dir
  /// is left out so artifacts do not depend on where they were written.
  std::map<std::string, std::string> resolved;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void fail(const std::string& key, const std::string& what, const std::string& value) {
  throw ConfigError(key + ": " + what + " (got '" + value + "')");
}

inline double parse_real(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
    fail(key, "expected a finite number", v);
  return x;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v, std::uint64_t lo, std::uint64_t hi) {
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    // Accept integral scientific notation such as 1e7.
    const double x = parse_real(key, v);
    if (x < 0.0 || x != std::floor(x) || x > 9.0e15)
      fail(key, "expected a non-negative integer", v);
    n = static_cast<std::uint64_t>(x);
  }
  if (n < lo || n > hi)
    fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", v);
  return n;
}

inline int parse_int(const std::string& key, const std::string& v, int lo, int hi) {
  int n = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail(key, "expected an integer", v);
  if (n < lo || n > hi)
    fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", v);
  return n;
}

inline double parse_positive(const std::string& key, const std::string& v) {
  const double x = parse_real(key, v);
  if (!(x > 0.0))
    fail(key, "must be positive", v);
  return x;
}

inline double parse_fraction(const std::string& key, const std::string& v) {
  const double x = parse_real(key, v);
  if (!(x >= 0.0 && x <= 1.0))
    fail(key, "must lie in [0, 1]", v);
  return x;
}

inline nlohmann::json parse_json(const std::string& key, const std::string& v) {
  try {
    return nlohmann::json::parse(v);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(key + ": invalid JSON: " + e.what());
  }
}

inline void validate_map(const std::string& key, const nlohmann::json& spec) {
  try {
    (void)map_from_json(spec);
  } catch (const InvalidArgument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

} // namespace detail

/// Reads `key = value` lines. Duplicate keys are an error.
inline std::map<std::string, std::string> parse_key_values(std::istream& is, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

/// Sets one key. `base` resolves map_file paths.
inline void apply_key(ExperimentConfig& c, const std::string& key, const std::string& v,
                      const std::filesystem::path& base) {
  using namespace detail;
  constexpr std::uint64_t kBig = 1'000'000'000'000ull;
  if (key == "map") {
    c.map_spec = parse_json(key, v);
    validate_map(key, c.map_spec);
    c.resolved.erase("map_file");
  } else if (key == "map_file") {
    c.resolved.erase("map");
    const auto path = base / v;
    std::ifstream in(path);
    if (!in)
      fail(key, "cannot open file", path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    c.map_spec = parse_json(key, ss.str());
    validate_map(key, c.map_spec);
  } else if (key == "sampler.count") {
    c.sample_count = parse_count(key, v, 1, 100'000'000);
  } else if (key == "sampler.burn_in") {
    c.burn_in = parse_count(key, v, 1, 100'000);
  } else if (key == "sampler.seed") {
    c.seed = parse_count(key, v, 0, UINT64_MAX);
  } else if (key == "schedule.r0") {
    c.r0 = parse_positive(key, v);
  } else if (key == "schedule.k_max") {
    c.k_max = parse_int(key, v, 3, 60);
  } else if (key == "recurrence.n_max") {
    c.n_max = parse_count(key, v, 1, kBig);
  } else if (key == "recurrence.probes") {
    c.probes = parse_count(key, v, 0, 1'000'000);
  } else if (key == "recurrence.tol") {
    c.rate_tol = parse_positive(key, v);
  } else if (key == "recurrence.extra_probes") {
    const auto j = parse_json(key, v);
    if (!j.is_array())
      fail(key, "expected a JSON array of [re, im] pairs", v);
    c.extra_probes.clear();
    for (const auto& p : j) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        fail(key, "expected a JSON array of [re, im] pairs", v);
      c.extra_probes.push_back(make_complex(p[0].get<double>(), p[1].get<double>()));
    }
  } else if (key == "recurrence.monotonicity_cases") {
    c.monotonicity_cases = parse_count(key, v, 0, 10'000'000);
  } else if (key == "recurrence.monotonicity_n_max") {
    c.monotonicity_n_max = parse_count(key, v, 1, kBig);
  } else if (key == "thermo.period_n") {
    c.period_n = parse_int(key, v, 1, 64);
  } else if (key == "thermo.s_lo") {
    c.s_lo = parse_real(key, v);
  } else if (key == "thermo.s_hi") {
    c.s_hi = parse_real(key, v);
  } else if (key == "thermo.tol") {
    c.thermo_tol = parse_positive(key, v);
  } else if (key == "thermo.grid_points") {
    c.grid_points = parse_int(key, v, 2, 100'000);
  } else if (key == "thermo.hyperbolicity_n") {
    c.hyperbolicity_n = parse_int(key, v, 8, 200);
  } else if (key == "covariance.observable") {
    if (v != "re" && v != "im" && v != "sawtooth" && v != "const")
      fail(key, "expected one of re, im, sawtooth, const", v);
    c.observable = v;
  } else if (key == "covariance.n_lo") {
    c.cov_n_lo = parse_int(key, v, 0, 10'000);
  } else if (key == "covariance.n_hi") {
    c.cov_n_hi = parse_int(key, v, 0, 10'000);
  } else if (key == "covariance.length") {
    c.cov_length = parse_count(key, v, 10'000, kBig);
  } else if (key == "covariance.start_turns") {
    c.start_turns = parse_real(key, v);
  } else if (key == "oracle.cases") {
    c.oracle_cases = parse_count(key, v, 0, 10'000'000);
  } else if (key == "oracle.arcs") {
    c.oracle_arcs = parse_count(key, v, 0, 10'000'000);
  } else if (key == "oracle.n_max") {
    c.oracle_n_max = parse_count(key, v, 1, kBig);
  } else if (key == "check.bowen_min") {
    c.check_bowen_min = parse_real(key, v);
  } else if (key == "check.bowen_max") {
    c.check_bowen_max = parse_real(key, v);
  } else if (key == "check.dimension_gap") {
    c.check_dimension_gap = parse_positive(key, v);
  } else if (key == "check.lambda_min") {
    c.check_lambda_min = parse_real(key, v);
  } else if (key == "check.mean_dimension") {
    c.check_mean_dimension = parse_real(key, v);
  } else if (key == "check.mean_dimension_tol") {
    c.check_mean_dimension_tol = parse_positive(key, v);
  } else if (key == "check.pass_fraction") {
    c.check_pass_fraction = parse_fraction(key, v);
  } else if (key == "check.decay_model") {
    if (v != "Polynomial" && v != "SuperPolynomialEvidence" && v != "Inconclusive")
      fail(key, "expected Polynomial, SuperPolynomialEvidence or Inconclusive", v);
    c.check_decay_model = v;
  } else if (key == "check.oracle_mismatch") {
    c.check_oracle_mismatch = parse_fraction(key, v);
  } else if (key == "check.measure_fraction") {
    c.check_measure_fraction = parse_fraction(key, v);
  } else if (key == "output.dir") {
    if (v.empty())
      fail(key, "must not be empty", v);
    c.output_dir = v;
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
  if (key != "output.dir")
    c.resolved[key] = v;
}

/// Cross-field checks after all keys are in.
inline void validate(ExperimentConfig& c) {
  if (c.map_spec.is_null())
    throw ConfigError("map: no map given (set map or map_file)");
  if (c.k_max < 3)
    throw ConfigError("schedule.k_max: need at least 4 radii");
  if (!(c.s_lo < c.s_hi))
    throw ConfigError("thermo.s_lo: must be below thermo.s_hi (got " + std::to_string(c.s_lo) + " >= " +
                      std::to_string(c.s_hi) + ")");
  if (c.cov_n_hi < c.cov_n_lo)
    throw ConfigError("covariance.n_hi: must be at least covariance.n_lo");
}

/// Loads a config file, then applies overrides in order.
inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path.string() + "'");
  const auto kv = parse_key_values(in, path.string());
  if (kv.count("map") && kv.count("map_file"))
    throw ConfigError("map: give either map or map_file, not both");
  ExperimentConfig c;
  const auto base = path.parent_path();
  for (const auto& [k, v] : kv)
    apply_key(c, k, v, base);
  for (const auto& [k, v] : overrides)
    apply_key(c, k, v, std::filesystem::current_path());
  validate(c);
  return c;
}

} // namespace jlab::cli
