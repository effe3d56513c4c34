#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "jlab/complex.hpp"
#include "jlab/empirical_measure.hpp"
#include "jlab/error.hpp"
#include "jlab/julia_sampler.hpp"
#include "jlab/orbit_source.hpp"
#include "jlab/parallel.hpp"
#include "jlab/rational_map.hpp"
#include "jlab/regression.hpp"

namespace jlab {

inline constexpr std::uint64_t kDefaultNMax = 10'000'000;

/// Finite(n) with n >= 1, or NotFound within n_max steps. NotFound orders
/// above every Finite value.
class ReturnTime {
public:
  static ReturnTime finite(std::uint64_t n) {
    if (n < 1)
      throw InvalidArgument("return time must be at least 1");
    return ReturnTime(n, true, false);
  }
  static ReturnTime not_found(std::uint64_t n_max, bool escaped = false) { return ReturnTime(n_max, false, escaped); }

  bool found() const { return found_; }
  /// The orbit left the escape disk or hit a pole before n_max.
  bool escaped() const { return escaped_; }
  std::uint64_t value() const {
    if (!found_)
      throw InvalidArgument("NotFound has no finite value");
    return n_;
  }
  std::uint64_t n_max() const { return n_; }

  friend std::strong_ordering operator<=>(const ReturnTime& a, const ReturnTime& b) {
    if (a.found_ != b.found_)
      return a.found_ ? std::strong_ordering::less : std::strong_ordering::greater;
    if (!a.found_)
      return std::strong_ordering::equal;
    return a.n_ <=> b.n_;
  }
  friend bool operator==(const ReturnTime& a, const ReturnTime& b) { return (a <=> b) == 0; }

private:
  ReturnTime(std::uint64_t n, bool found, bool escaped) : n_(n), found_(found), escaped_(escaped) {}
  std::uint64_t n_;
  bool found_;
  bool escaped_;
};

/// First hitting times of N_{r_i}(z) along x_1, x_2, ... from `src`, for
/// radii in strictly decreasing order. One pass over the orbit serves all
/// radii because a hit at radius r_{i+1} is a hit at r_i.
template <class Source>
std::vector<ReturnTime> first_hits(Source& src, Complex z, std::span<const double> radii, std::uint64_t n_max) {
  if (n_max < 1)
    throw InvalidArgument("n_max must be at least 1");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0))
      throw InvalidArgument("radius must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1]))
      throw InvalidArgument("radii must be strictly decreasing");
  }
  std::vector<ReturnTime> out;
  out.reserve(radii.size());
  bool escaped = false;
  for (std::uint64_t n = 1; n <= n_max && out.size() < radii.size(); ++n) {
    const auto x = src.next();
    if (!x) {
      escaped = true;
      break;
    }
    const double dist = std::abs(*x - z);
    while (out.size() < radii.size() && dist < radii[out.size()])
      out.push_back(ReturnTime::finite(n));
  }
  while (out.size() < radii.size())
    out.push_back(ReturnTime::not_found(n_max, escaped));
  return out;
}

/// Least n in [1, n_max] with |T^n(w) - z| < r.
inline ReturnTime return_time(const RationalMap& map, Complex w, Complex z, double r, std::uint64_t n_max) {
  ForwardOrbit orb(map, w);
  const double radius[1] = {r};
  return first_hits(orb, z, radius, n_max).front();
}

struct RecurrenceRow {
  double r;
  ReturnTime tau;
};

struct RecurrenceRecord {
  Complex center;
  std::vector<RecurrenceRow> rows;
};

/// Power-law exponent of tau_r in 1/r.
///
/// `rate` is the least-squares slope of log tau against -log r over the
/// fit window; R_lower/R_upper are the extreme three-point slopes over the
/// same window. A center whose finite return times all coincide is bounded
/// (periodic) and gets exactly 0.
struct RateEstimate {
  double rate = 0.0;
  double R_lower = 0.0;
  double R_upper = 0.0;
  double slope_stderr = 0.0;
  bool truncated = false;
  bool bounded = false;
  /// The prediction window held fewer than 4 rows; all finite rows were used.
  bool window_fallback = false;
  int k_first = 0;
  int k_last = 0;
};

/// Fit window: a first fit over all finite rows predicts tau_hat, and rows
/// with 10 <= tau_hat <= n_max / 10 are kept. Selecting on the prediction
/// instead of the observed tau avoids keeping only the rows whose
/// exponential fluctuation happened to be large.
inline RateEstimate estimate_rate(const RecurrenceRecord& rec, std::uint64_t n_max) {
  std::vector<std::size_t> idx;
  RateEstimate est;
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    if (rec.rows[i].tau.found())
      idx.push_back(i);
    else
      est.truncated = true;
  }
  if (idx.size() < 4)
    throw NumericError("insufficient recurrence data: " + std::to_string(idx.size()) + " finite rows");

  const auto first_tau = rec.rows[idx.front()].tau.value();
  if (std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return rec.rows[i].tau.value() == first_tau; })) {
    est.bounded = true;
    est.k_first = static_cast<int>(idx.front());
    est.k_last = static_cast<int>(idx.back());
    return est;
  }

  auto xy = [&](const std::vector<std::size_t>& rows, std::vector<double>& x, std::vector<double>& y) {
    x.clear();
    y.clear();
    for (std::size_t i : rows) {
      x.push_back(-std::log(rec.rows[i].r));
      y.push_back(std::log(static_cast<double>(rec.rows[i].tau.value())));
    }
  };
  std::vector<double> x, y;
  xy(idx, x, y);
  const LineFit pre = fit_line(x, y);
  std::vector<std::size_t> window;
  const double lo = std::log(10.0), hi = std::log(static_cast<double>(n_max) / 10.0);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double pred = pre.intercept + pre.slope * x[j];
    if (pred >= lo && pred <= hi)
      window.push_back(idx[j]);
  }
  if (window.size() < 4) {
    window = idx;
    est.window_fallback = true;
  }
  xy(window, x, y);
  const LineFit fit = fit_line(x, y);
  const auto [wlo, whi] = windowed_slope_range(x, y, 3);
  est.rate = fit.slope;
  est.slope_stderr = fit.slope_stderr;
  est.R_lower = wlo;
  est.R_upper = whi;
  est.k_first = static_cast<int>(window.front());
  est.k_last = static_cast<int>(window.back());
  return est;
}

inline RecurrenceRecord recurrence_record(const RationalMap& map, Complex z, const RadiusSchedule& sched,
                                          std::uint64_t n_max) {
  const auto radii = sched.radii();
  ForwardOrbit orb(map, z);
  const auto taus = first_hits(orb, z, radii, n_max);
  RecurrenceRecord rec{z, {}};
  for (std::size_t i = 0; i < radii.size(); ++i)
    rec.rows.push_back({radii[i], taus[i]});
  return rec;
}

/// Record along a true orbit built backwards; the center is orbit.center().
inline RecurrenceRecord recurrence_record(ShadowedOrbit& orbit, const RadiusSchedule& sched, std::uint64_t n_max) {
  const auto radii = sched.radii();
  const auto taus = first_hits(orbit, orbit.center(), radii, std::min<std::uint64_t>(n_max, orbit.length()));
  RecurrenceRecord rec{orbit.center(), {}};
  for (std::size_t i = 0; i < radii.size(); ++i)
    rec.rows.push_back({radii[i], taus[i]});
  return rec;
}

inline RateEstimate recurrence_rate(const RationalMap& map, Complex z, const RadiusSchedule& sched,
                                    std::uint64_t n_max) {
  return estimate_rate(recurrence_record(map, z, sched, n_max), n_max);
}

/// Smallest p <= max_period with |T^p z - z| <= 1e-9 max(1, |z|).
inline std::optional<int> detect_period(const RationalMap& map, Complex z, int max_period = 64) {
  Complex x = z;
  for (int p = 1; p <= max_period; ++p) {
    x = map.step(x);
    if (!is_finite(x))
      return std::nullopt;
    if (std::abs(x - z) <= 1e-9 * std::max(1.0, std::abs(z)))
      return p;
  }
  return std::nullopt;
}

struct MonotonicityCase {
  Complex w;
  Complex z;
  double r;
  double k;
};

enum class ChainOutcome { Holds, Fails, NotApplicable };

struct MonotonicityResult {
  ReturnTime tau_r_z, tau_kr_z, tau_r_w, tau_kr_w, tau_rk_z;
  bool eq9;   // tau_{kr}(z) <= tau_r(z)
  bool eq10;  // tau_{kr}(w,z) <= tau_r(w,z)
  ChainOutcome sandwich_left;   // tau_{kr}(z) <= tau_r(w,z), for w in N_r(z)
  ChainOutcome sandwich_right;  // tau_r(w,z) <= tau_{r/k}(z), for w in N_r(z)
};

struct MonotonicityReport {
  std::vector<MonotonicityResult> cases;
  std::size_t eq9_violations = 0;
  std::size_t eq10_violations = 0;
  std::size_t sandwich_checked = 0;
  std::size_t sandwich_left_failures = 0;
  std::size_t sandwich_right_failures = 0;
};

/// Checks the two radius-monotonicity laws per case. The two-sided sandwich
/// for w near z is evaluated and counted but not treated as a requirement.
inline MonotonicityReport verify_monotonicity(const RationalMap& map, std::span<const MonotonicityCase> cases,
                                              std::uint64_t n_max, unsigned workers = 1) {
  std::vector<MonotonicityResult> res(cases.size(), MonotonicityResult{
      ReturnTime::not_found(n_max), ReturnTime::not_found(n_max), ReturnTime::not_found(n_max),
      ReturnTime::not_found(n_max), ReturnTime::not_found(n_max), true, true, ChainOutcome::NotApplicable,
      ChainOutcome::NotApplicable});
  for (const auto& c : cases)
    if (!(c.k >= 1.0) || !(c.r > 0.0))
      throw InvalidArgument("monotonicity case needs r > 0 and k >= 1");
  parallel_for(cases.size(), workers, [&](std::size_t i) {
    const auto& c = cases[i];
    auto& out = res[i];
    if (c.k == 1.0) {
      const double radii[1] = {c.r};
      ForwardOrbit oz(map, c.z), ow(map, c.w);
      out.tau_r_z = out.tau_kr_z = out.tau_rk_z = first_hits(oz, c.z, radii, n_max)[0];
      out.tau_r_w = out.tau_kr_w = first_hits(ow, c.z, radii, n_max)[0];
    } else {
      const double rz[3] = {c.k * c.r, c.r, c.r / c.k};
      ForwardOrbit oz(map, c.z);
      const auto tz = first_hits(oz, c.z, rz, n_max);
      out.tau_kr_z = tz[0];
      out.tau_r_z = tz[1];
      out.tau_rk_z = tz[2];
      const double rw[2] = {c.k * c.r, c.r};
      ForwardOrbit ow(map, c.w);
      const auto tw = first_hits(ow, c.z, rw, n_max);
      out.tau_kr_w = tw[0];
      out.tau_r_w = tw[1];
    }
    out.eq9 = out.tau_kr_z <= out.tau_r_z;
    out.eq10 = out.tau_kr_w <= out.tau_r_w;
    if (std::abs(c.w - c.z) < c.r) {
      out.sandwich_left = out.tau_kr_z <= out.tau_r_w ? ChainOutcome::Holds : ChainOutcome::Fails;
      out.sandwich_right = out.tau_r_w <= out.tau_rk_z ? ChainOutcome::Holds : ChainOutcome::Fails;
    }
  });
  MonotonicityReport rep;
  for (const auto& r : res) {
    rep.eq9_violations += !r.eq9;
    rep.eq10_violations += !r.eq10;
    if (r.sandwich_left != ChainOutcome::NotApplicable) {
      ++rep.sandwich_checked;
      rep.sandwich_left_failures += r.sandwich_left == ChainOutcome::Fails;
      rep.sandwich_right_failures += r.sandwich_right == ChainOutcome::Fails;
    }
  }
  rep.cases = std::move(res);
  return rep;
}

struct ProbeComparison {
  Complex probe;
  std::optional<RateEstimate> rate;
  std::optional<DimensionEstimate> dim;
  std::optional<int> period;  // set for measure-zero exceptions
  std::string error;
  bool pass = false;
  bool lower_pass = false;
  bool upper_pass = false;
  RecurrenceRecord record;
};

struct ComparisonReport {
  std::vector<ProbeComparison> probes;
  double tol = 0.0;
  std::size_t evaluated = 0;
  std::size_t passed = 0;
  std::size_t lower_passed = 0;
  std::size_t upper_passed = 0;
  std::size_t exceptions = 0;
  std::size_t errors = 0;
  double pass_fraction() const { return evaluated ? static_cast<double>(passed) / static_cast<double>(evaluated) : 0.0; }
};

namespace detail {

inline void finish_probe(ProbeComparison& pc, const EmpiricalMeasure& mu, const RadiusSchedule& sched,
                         std::uint64_t n_max, double tol) {
  try {
    pc.rate = estimate_rate(pc.record, n_max);
  } catch (const NumericError& e) {
    pc.error = e.what();
    return;
  }
  if (pc.period)
    return;
  try {
    pc.dim = local_dimension(mu, pc.probe, sched);
  } catch (const NumericError& e) {
    pc.error = e.what();
    return;
  }
  pc.pass = std::abs(pc.rate->rate - pc.dim->slope) <= tol;
  pc.lower_pass = std::abs(pc.rate->R_lower - pc.dim->d_lower) <= tol;
  pc.upper_pass = std::abs(pc.rate->R_upper - pc.dim->d_upper) <= tol;
}

inline ComparisonReport summarize(std::vector<ProbeComparison> probes, double tol) {
  ComparisonReport rep;
  rep.tol = tol;
  for (const auto& p : probes) {
    if (!p.error.empty()) {
      ++rep.errors;
    } else if (p.period) {
      ++rep.exceptions;
    } else {
      ++rep.evaluated;
      rep.passed += p.pass;
      rep.lower_passed += p.lower_pass;
      rep.upper_passed += p.upper_pass;
    }
  }
  rep.probes = std::move(probes);
  return rep;
}

} // namespace detail

/// Recurrence rate against local dimension at explicit probes, with
/// forward orbits. Periodic probes are measure-zero exceptions: their rate
/// is reported but they do not enter the pass fraction.
inline ComparisonReport compare_rate_dimension(const RationalMap& map, const EmpiricalMeasure& mu,
                                               std::span<const Complex> probes, const RadiusSchedule& sched,
                                               std::uint64_t n_max, double tol, unsigned workers = 1) {
  std::vector<ProbeComparison> out(probes.size());
  parallel_for(probes.size(), workers, [&](std::size_t i) {
    auto& pc = out[i];
    pc.probe = probes[i];
    pc.period = detect_period(map, pc.probe);
    pc.record = recurrence_record(map, pc.probe, sched, n_max);
    detail::finish_probe(pc, mu, sched, n_max, tol);
  });
  return detail::summarize(std::move(out), tol);
}

inline constexpr std::uint64_t kProbeStreamOffset = std::uint64_t{1} << 40;

/// Same comparison for maps without a forward-stable orbit model: probe i
/// is the center of a backward-built orbit of length n_max whose branches
/// come from stream kProbeStreamOffset + i, so probes are Lyubich-typical.
inline ComparisonReport compare_rate_dimension_shadowed(const RationalMap& map, const EmpiricalMeasure& mu,
                                                        std::size_t probe_count, const RadiusSchedule& sched,
                                                        std::uint64_t n_max, double tol, std::uint64_t seed,
                                                        unsigned workers = 1,
                                                        std::size_t burn_in = kDefaultBurnIn) {
  const Complex anchor = most_repelling_fixed_point(map);
  std::vector<ProbeComparison> out(probe_count);
  parallel_for(probe_count, workers, [&](std::size_t i) {
    auto& pc = out[i];
    ShadowedOrbit orbit(map, anchor, n_max, burn_in, seed, kProbeStreamOffset + i);
    pc.probe = orbit.center();
    pc.period = detect_period(map, pc.probe);
    pc.record = recurrence_record(orbit, sched, n_max);
    detail::finish_probe(pc, mu, sched, n_max, tol);
  });
  return detail::summarize(std::move(out), tol);
}

inline nlohmann::ordered_json rate_to_json(const RateEstimate& r) {
  nlohmann::ordered_json j;
  j["rate"] = r.rate;
  j["rate_stderr"] = r.slope_stderr;
  j["R_lower"] = r.R_lower;
  j["R_upper"] = r.R_upper;
  j["truncated"] = r.truncated;
  j["bounded"] = r.bounded;
  j["window_fallback"] = r.window_fallback;
  j["k_first"] = r.k_first;
  j["k_last"] = r.k_last;
  return j;
}

inline nlohmann::ordered_json dimension_to_json(const DimensionEstimate& d) {
  nlohmann::ordered_json j;
  j["d"] = d.slope;
  j["d_stderr"] = d.slope_stderr;
  j["d_lower"] = d.d_lower;
  j["d_upper"] = d.d_upper;
  j["k_first"] = d.k_first;
  j["k_last"] = d.k_last;
  return j;
}

inline nlohmann::ordered_json comparison_to_json(const ComparisonReport& rep) {
  nlohmann::ordered_json probes = nlohmann::ordered_json::array();
  for (const auto& p : rep.probes) {
    nlohmann::ordered_json j;
    j["probe_re"] = p.probe.real();
    j["probe_im"] = p.probe.imag();
    j["recurrence"] = p.rate ? rate_to_json(*p.rate) : nlohmann::ordered_json();
    j["dimension"] = p.dim ? dimension_to_json(*p.dim) : nlohmann::ordered_json();
    j["exception"] = p.period ? nlohmann::ordered_json("measure-zero exception (period " + std::to_string(*p.period) + ")")
                              : nlohmann::ordered_json();
    j["error"] = p.error.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(p.error);
    j["pass"] = p.pass;
    j["lower_pass"] = p.lower_pass;
    j["upper_pass"] = p.upper_pass;
    probes.push_back(std::move(j));
  }
  nlohmann::ordered_json agg;
  agg["tol"] = rep.tol;
  agg["probes"] = rep.probes.size();
  agg["evaluated"] = rep.evaluated;
  agg["passed"] = rep.passed;
  agg["pass_fraction"] = rep.pass_fraction();
  agg["lower_passed"] = rep.lower_passed;
  agg["upper_passed"] = rep.upper_passed;
  agg["exceptions"] = rep.exceptions;
  agg["errors"] = rep.errors;
  nlohmann::ordered_json out;
  out["probes"] = std::move(probes);
  out["aggregate"] = std::move(agg);
  return out;
}

inline void write_recurrence_csv(std::ostream& os, std::span<const RecurrenceRecord> records) {
  os << "probe_re,probe_im,r,tau,truncated\n";
  for (const auto& rec : records)
    for (const auto& row : rec.rows)
      os << format_double(rec.center.real()) << ',' << format_double(rec.center.imag()) << ','
         << format_double(row.r) << ',' << row.tau.n_max() << ',' << (row.tau.found() ? 0 : 1) << '\n';
}

} // namespace jlab
