#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "jlab/complex.hpp"
#include "jlab/error.hpp"
#include "jlab/julia_sampler.hpp"
#include "jlab/orbit_source.hpp"
#include "jlab/rational_map.hpp"
#include "jlab/regression.hpp"
#include "jlab/rng.hpp"

namespace jlab {

/// log|(T^n)'| at the repelling period-n points.
struct PeriodicSpectrum {
  int n = 0;
  std::vector<double> log_multipliers;
};

inline constexpr double kRepellingMargin = 1e-9;

inline PeriodicSpectrum periodic_spectrum(const RationalMap& map, int n) {
  PeriodicSpectrum sp{n, {}};
  for (const auto& p : periodic_points(map, n))
    if (p.multiplier_modulus > 1.0 + kRepellingMargin)
      sp.log_multipliers.push_back(std::log(p.multiplier_modulus));
  if (sp.log_multipliers.empty())
    throw NumericError("no repelling periodic points of period " + std::to_string(n));
  return sp;
}

/// P_n(s) = (1/n) log sum |(T^n)'(z)|^-s, summed stably.
inline double pressure(const PeriodicSpectrum& sp, double s) {
  double top = -INFINITY;
  for (double l : sp.log_multipliers)
    top = std::max(top, -s * l);
  double acc = 0.0;
  for (double l : sp.log_multipliers)
    acc += std::exp(-s * l - top);
  return (top + std::log(acc)) / sp.n;
}

inline double pressure_estimate(const RationalMap& map, double s, int n) { return pressure(periodic_spectrum(map, n), s); }

struct PressureCurve {
  int n;
  std::vector<std::pair<double, double>> values;
};

inline PressureCurve pressure_curve(const PeriodicSpectrum& sp, std::span<const double> s_grid) {
  PressureCurve c{sp.n, {}};
  for (double s : s_grid)
    c.values.emplace_back(s, pressure(sp, s));
  return c;
}

inline void write_pressure_csv(std::ostream& os, const PressureCurve& c) {
  os << "s,P_n\n";
  for (const auto& [s, p] : c.values)
    os << format_double(s) << ',' << format_double(p) << '\n';
}

struct BowenRoot {
  double s;
  double tol;
  int n;
  int iterations;
};

/// Root of s -> P_n(s) on [s_lo, s_hi] by bisection.
inline BowenRoot hausdorff_dimension(const PeriodicSpectrum& sp, double tol, double s_lo = 0.0, double s_hi = 2.0) {
  if (!(tol > 0.0))
    throw InvalidArgument("tolerance must be positive");
  const double p_lo = pressure(sp, s_lo), p_hi = pressure(sp, s_hi);
  if (!(p_lo > 0.0 && p_hi < 0.0))
    throw NumericError("pressure does not change sign on [" + format_double(s_lo) + ", " + format_double(s_hi) +
                       "]: P(" + format_double(s_lo) + ") = " + format_double(p_lo) + ", P(" + format_double(s_hi) +
                       ") = " + format_double(p_hi));
  double a = s_lo, b = s_hi;
  int it = 0;
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    (pressure(sp, m) > 0.0 ? a : b) = m;
    ++it;
  }
  return {0.5 * (a + b), tol, sp.n, it};
}

inline BowenRoot hausdorff_dimension(const RationalMap& map, int n, double tol, double s_lo = 0.0, double s_hi = 2.0) {
  return hausdorff_dimension(periodic_spectrum(map, n), tol, s_lo, s_hi);
}

using Observable = std::function<double(Complex)>;

namespace observables {

inline double re(Complex z) { return z.real(); }
inline double im(Complex z) { return z.imag(); }

/// Fractional angle arg(z) / 2pi in [0, 1).
inline double sawtooth(Complex z) {
  const double t = std::arg(z) / (2.0 * std::numbers::pi);
  return t < 0.0 ? t + 1.0 : t;
}

inline double one(Complex) { return 1.0; }

} // namespace observables

/// Known names: re, im, sawtooth, const.
inline Observable observable_by_name(const std::string& name) {
  if (name == "re")
    return observables::re;
  if (name == "im")
    return observables::im;
  if (name == "sawtooth")
    return observables::sawtooth;
  if (name == "const")
    return observables::one;
  throw InvalidArgument("unknown observable '" + name + "'");
}

struct LipschitzEstimate {
  double value;       // lower bound on the true norm
  std::size_t pairs;  // pairs examined
  bool subsampled;
};

/// max |f(a) - f(b)| / |a - b| over all pairs, or over `max_pairs` seeded
/// random pairs when there are more.
inline LipschitzEstimate lipschitz_norm(const Observable& f, std::span<const Complex> sample,
                                        std::size_t max_pairs = 1'000'000, std::uint64_t seed = 0) {
  const std::size_t n = sample.size();
  if (n < 2)
    throw InvalidArgument("Lipschitz estimate needs at least two points");
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i)
    fv[i] = f(sample[i]);
  double best = 0.0;
  auto visit = [&](std::size_t i, std::size_t j) {
    const double dz = std::abs(sample[i] - sample[j]);
    if (dz > 0.0)
      best = std::max(best, std::abs(fv[i] - fv[j]) / dz);
  };
  const double all = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (all <= static_cast<double>(max_pairs)) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        visit(i, j);
    return {best, static_cast<std::size_t>(all), false};
  }
  const CounterRng rng(seed);
  for (std::size_t t = 0; t < max_pairs; ++t) {
    const auto b = rng.block(0, t);
    const std::uint64_t i = ((std::uint64_t{b[0]} << 32) | b[1]) % n;
    const std::uint64_t j = ((std::uint64_t{b[2]} << 32) | b[3]) % n;
    if (i != j)
      visit(i, j);
  }
  return {best, max_pairs, true};
}

inline constexpr std::size_t kBatches = 8;

struct CovarianceEstimate {
  int n;
  double value;
  double stderr_;
};

namespace detail {

/// Replays a stored orbit x_1, x_2, ... as a source.
class SpanSource {
public:
  explicit SpanSource(std::span<const Complex> xs) : xs_(xs) {}
  std::optional<Complex> next() {
    if (i_ >= xs_.size())
      return std::nullopt;
    return xs_[i_++];
  }

private:
  std::span<const Complex> xs_;
  std::size_t i_ = 1;
};

} // namespace detail

/// Cov(f o T^n, g) for each n in [n_lo, n_hi] along x_0 = z0 and the
/// iterates produced by `src`, over j in [0, length):
///   (1/L) sum f(x_{n+j}) g(x_j) - (1/L sum f(x_{n+j})) (1/L sum g(x_j)).
/// Standard errors come from kBatches contiguous batches of j. The orbit
/// is streamed; only the last n_hi values of g are kept.
template <class Source>
std::vector<CovarianceEstimate> covariance_sequence(Complex z0, Source& src, const Observable& f, const Observable& g,
                                                    int n_lo, int n_hi, std::size_t length) {
  if (n_lo < 0 || n_hi < n_lo)
    throw InvalidArgument("covariance lags need 0 <= n_lo <= n_hi");
  if (length < 10'000)
    throw InvalidArgument("covariance length must be at least 10000");
  const auto lags = static_cast<std::size_t>(n_hi - n_lo + 1);
  const auto window = static_cast<std::size_t>(n_hi) + 1;
  struct Sums {
    double ab = 0.0, a = 0.0, b = 0.0;
  };
  std::vector<Sums> sums(lags * kBatches);
  std::vector<double> gring(window);
  std::vector<std::size_t> batch_end(kBatches);
  for (std::size_t b = 0; b < kBatches; ++b)
    batch_end[b] = (b + 1) * length / kBatches;

  const std::size_t total = length + static_cast<std::size_t>(n_hi);
  Complex x = z0;
  for (std::size_t t = 0; t < total; ++t) {
    if (t > 0) {
      const auto nx = src.next();
      if (!nx)
        throw NumericError("orbit escaped after " + std::to_string(t) + " steps during covariance estimate");
      x = *nx;
    }
    const double fx = f(x);
    gring[t % window] = g(x);
    for (std::size_t l = 0; l < lags; ++l) {
      const std::size_t n = static_cast<std::size_t>(n_lo) + l;
      if (t < n || t - n >= length)
        continue;
      const std::size_t j = t - n;
      const std::size_t b = static_cast<std::size_t>(std::upper_bound(batch_end.begin(), batch_end.end(), j) -
                                                     batch_end.begin());
      auto& s = sums[l * kBatches + b];
      const double gj = gring[j % window];
      s.ab += fx * gj;
      s.a += fx;
      s.b += gj;
    }
  }

  std::vector<CovarianceEstimate> out;
  for (std::size_t l = 0; l < lags; ++l) {
    Sums all;
    double s = 0.0, s2 = 0.0;
    std::size_t lo = 0;
    for (std::size_t b = 0; b < kBatches; ++b) {
      const auto& sb = sums[l * kBatches + b];
      all.ab += sb.ab;
      all.a += sb.a;
      all.b += sb.b;
      const double m = static_cast<double>(batch_end[b] - lo);
      const double cb = sb.ab / m - (sb.a / m) * (sb.b / m);
      s += cb;
      s2 += cb * cb;
      lo = batch_end[b];
    }
    const double m = static_cast<double>(length);
    const double k = static_cast<double>(kBatches);
    const double var = std::max(0.0, (s2 - s * s / k) / (k - 1.0));
    out.push_back({n_lo + static_cast<int>(l), all.ab / m - (all.a / m) * (all.b / m), std::sqrt(var / k)});
  }
  return out;
}

/// Same, over a stored orbit x_0, x_1, ...
inline std::vector<CovarianceEstimate> covariance_sequence(std::span<const Complex> orbit, const Observable& f,
                                                           const Observable& g, int n_lo, int n_hi,
                                                           std::size_t length) {
  if (orbit.empty() || orbit.size() < length + static_cast<std::size_t>(std::max(n_hi, 0)))
    throw InvalidArgument("orbit shorter than length + n");
  detail::SpanSource src(orbit);
  return covariance_sequence(orbit.front(), src, f, g, n_lo, n_hi, length);
}

/// Along the forward orbit of z0.
inline std::vector<CovarianceEstimate> covariance_sequence(const RationalMap& map, Complex z0, const Observable& f,
                                                           const Observable& g, int n_lo, int n_hi,
                                                           std::size_t length) {
  ForwardOrbit src(map, z0);
  return covariance_sequence(z0, src, f, g, n_lo, n_hi, length);
}

inline CovarianceEstimate covariance_estimate(const RationalMap& map, Complex z0, const Observable& f,
                                              const Observable& g, int n, std::size_t length) {
  return covariance_sequence(map, z0, f, g, n, n, length).front();
}

inline void write_covariance_csv(std::ostream& os, std::span<const CovarianceEstimate> seq) {
  os << "n,cov,stderr\n";
  for (const auto& c : seq)
    os << c.n << ',' << format_double(c.value) << ',' << format_double(c.stderr_) << '\n';
}

struct DecaySequence {
  std::vector<double> theta;
  std::vector<double> stderr_;  // empty, or one per entry
  int n_offset = 1;             // theta[i] belongs to n = n_offset + i
};

inline DecaySequence decay_sequence(std::span<const CovarianceEstimate> cov) {
  DecaySequence seq;
  if (cov.empty())
    return seq;
  seq.n_offset = cov.front().n;
  for (const auto& c : cov) {
    seq.theta.push_back(std::max(0.0, c.value));
    seq.stderr_.push_back(c.stderr_);
  }
  return seq;
}

enum class DecayModel { Polynomial, SuperPolynomialEvidence, Inconclusive };

struct DecayClassification {
  DecayModel model = DecayModel::Inconclusive;
  double parameter = 0.0;  // p_hat, or geometric rate
  double rss_polynomial = 0.0;
  double rss_geometric = 0.0;
  double chi2_polynomial = 0.0;  // reduced
  double chi2_geometric = 0.0;
  std::size_t usable = 0;
  std::string reason;
};

struct DecayFitOptions {
  double noise_floor = 1e-12;
  double default_relative_error = 0.01;  // when no stderr is given
  double margin = 0.10;
  double max_reduced_chi2 = 4.0;
  std::size_t min_usable = 8;
};

/// Weighted fits of log theta against log n and against n. The better
/// model wins if it beats the other by the margin and fits within noise.
inline DecayClassification decay_fit(const DecaySequence& seq, const DecayFitOptions& opt = {}) {
  DecayClassification out;
  if (!seq.stderr_.empty() && seq.stderr_.size() != seq.theta.size())
    throw InvalidArgument("stderr must be empty or match theta");
  if (seq.n_offset < 1)
    throw InvalidArgument("decay sequence must start at n >= 1");
  std::vector<double> ln, n, y, w;
  for (std::size_t i = 0; i < seq.theta.size(); ++i) {
    const double t = seq.theta[i];
    if (!std::isfinite(t) || t < 0.0)
      throw InvalidArgument("decay sequence entries must be finite and nonnegative");
    const double se = seq.stderr_.empty() ? 0.0 : seq.stderr_[i];
    if (!(t > std::max(opt.noise_floor, 2.0 * se)))
      continue;
    const double nn = static_cast<double>(seq.n_offset) + static_cast<double>(i);
    const double rel = seq.stderr_.empty() ? opt.default_relative_error : std::max(se / t, 1e-12);
    n.push_back(nn);
    ln.push_back(std::log(nn));
    y.push_back(std::log(t));
    w.push_back(1.0 / (rel * rel));
  }
  out.usable = y.size();
  if (y.size() < opt.min_usable) {
    out.reason = "only " + std::to_string(y.size()) + " entries above the noise floor";
    return out;
  }
  const LineFit poly = fit_line_weighted(ln, y, w);
  const LineFit geo = fit_line_weighted(n, y, w);
  const double dof = static_cast<double>(y.size() - 2);
  out.rss_polynomial = poly.rss;
  out.rss_geometric = geo.rss;
  out.chi2_polynomial = poly.rss / dof;
  out.chi2_geometric = geo.rss / dof;
  const bool poly_better = poly.rss <= geo.rss;
  const double best = std::min(poly.rss, geo.rss), other = std::max(poly.rss, geo.rss);
  if (!(best <= (1.0 - opt.margin) * other)) {
    out.reason = "residuals within the margin";
    return out;
  }
  if (!(best / dof <= opt.max_reduced_chi2)) {
    out.reason = "neither model fits within noise";
    return out;
  }
  if (poly_better) {
    if (!(-poly.slope > 0.0)) {
      out.reason = "polynomial fit is not decaying";
      return out;
    }
    out.model = DecayModel::Polynomial;
    out.parameter = -poly.slope;
  } else {
    const double rate = std::exp(geo.slope);
    if (!(rate > 0.0 && rate < 1.0)) {
      out.reason = "geometric fit is not decaying";
      return out;
    }
    out.model = DecayModel::SuperPolynomialEvidence;
    out.parameter = rate;
  }
  return out;
}

inline const char* to_string(DecayModel m) {
  switch (m) {
  case DecayModel::Polynomial:
    return "Polynomial";
  case DecayModel::SuperPolynomialEvidence:
    return "SuperPolynomialEvidence";
  case DecayModel::Inconclusive:
    return "Inconclusive";
  }
  return "?";
}

inline nlohmann::ordered_json classification_to_json(const DecayClassification& c) {
  nlohmann::ordered_json j;
  j["model"] = to_string(c.model);
  j["parameter"] = c.model == DecayModel::Inconclusive ? nlohmann::ordered_json() : nlohmann::ordered_json(c.parameter);
  j["residuals"] = {{"polynomial", c.rss_polynomial},
                    {"geometric", c.rss_geometric},
                    {"reduced_chi2_polynomial", c.chi2_polynomial},
                    {"reduced_chi2_geometric", c.chi2_geometric}};
  j["usable"] = c.usable;
  j["reason"] = c.reason;
  return j;
}

} // namespace jlab
