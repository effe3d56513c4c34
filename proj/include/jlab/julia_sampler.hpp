#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>

#include "jlab/complex.hpp"
#include "jlab/error.hpp"
#include "jlab/parallel.hpp"
#include "jlab/rational_map.hpp"
#include "jlab/regression.hpp"
#include "jlab/rng.hpp"

namespace jlab {

inline constexpr std::size_t kDefaultBurnIn = 60;
inline constexpr int kBoundedProbeSteps = 100;

/// Forward-orbit sanity probe for a point near J.
///
/// Follows up to `steps` iterates and fails if one leaves the escape disk.
/// Once the accumulated expansion exceeds 1e10 a point that started within
/// rounding of J may have drifted off it legitimately, so the probe stops
/// there and counts as passed.
inline bool bounded_probe(const RationalMap& map, Complex z, int steps = kBoundedProbeSteps,
                          double escape_radius = kEscapeRadius) {
  const double horizon = std::log(1e10);
  double log_expansion = 0.0;
  for (int j = 0; j < steps; ++j) {
    if (!is_finite(z) || std::abs(z) > escape_radius)
      return false;
    const double dm = map.derivative_modulus(z);
    const Complex next = map.step(z);
    if (!is_finite(next) || std::abs(next) > escape_radius)
      return false;
    if (dm > 0.0)
      log_expansion += std::log(dm);
    z = next;
    if (log_expansion > horizon)
      return true;
  }
  return true;
}

struct JuliaSample {
  std::vector<Complex> points;
  const RationalMap* map = nullptr;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  Complex start{};
};

/// `count` independent backward walks of length `burn_in` from `start`;
/// walk i takes branch below(first_stream + i, t) at step t and keeps its
/// endpoint. The start defaults to the most repelling fixed point.
inline JuliaSample inverse_iteration_sample(const RationalMap& map, std::size_t count,
                                            std::size_t burn_in = kDefaultBurnIn, std::uint64_t seed = 0,
                                            unsigned workers = 1, std::optional<Complex> start = std::nullopt,
                                            std::uint64_t first_stream = 0) {
  if (count < 1)
    throw InvalidArgument("sample count must be at least 1");
  const Complex z0 = start ? *start : most_repelling_fixed_point(map);
  if (!is_finite(z0))
    throw InvalidArgument("start point is not finite");
  {
    const auto pre = map.preimages(z0);
    const bool singleton = std::all_of(pre.begin(), pre.end(), [&](Complex p) {
      return std::abs(p - z0) <= 1e-12 * std::max(1.0, std::abs(z0));
    });
    if (singleton)
      throw InvalidArgument("exceptional starting point");
  }
  JuliaSample out{std::vector<Complex>(count), &map, burn_in, seed, z0};
  const CounterRng rng(seed);
  const auto d = static_cast<std::uint32_t>(map.degree());
  std::vector<char> ok(count, 1);
  parallel_for(count, workers, [&](std::size_t i) {
    Complex x = z0;
    for (std::size_t t = 0; t < burn_in; ++t)
      x = map.preimage(x, rng.below(first_stream + i, t, d));
    out.points[i] = x;
    ok[i] = bounded_probe(map, x);
  });
  const auto bad = std::find(ok.begin(), ok.end(), 0);
  if (bad != ok.end())
    throw InvariantViolation("sample point " + std::to_string(bad - ok.begin()) + " fails the bounded-orbit probe");
  return out;
}

struct ExpansionEstimate {
  double C_hat;
  double lambda_hat;
  double log_lambda_stderr;
  int k_min;
  int k_max;
};

/// Fits m_k = min over the sample of log|(T^k)'(z)| against k = 1..n;
/// lambda_hat = exp(slope), C_hat = exp(intercept).
inline ExpansionEstimate hyperbolicity_estimate(const RationalMap& map, std::span<const Complex> sample, int n) {
  if (n < 8)
    throw InvalidArgument("hyperbolicity estimate needs n >= 8");
  if (sample.empty())
    throw InvalidArgument("hyperbolicity estimate needs a nonempty sample");
  std::vector<double> m(static_cast<std::size_t>(n), INFINITY);
  for (const auto& z0 : sample) {
    Complex z = z0;
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double dm = map.derivative_modulus(z);
      if (!(dm > 0.0))
        throw NumericError("critical point in hyperbolicity sample");
      acc += std::log(dm);
      z = map.step(z);
      if (!is_finite(z) || std::abs(z) > kEscapeRadius)
        throw NumericError("sample orbit escaped during hyperbolicity estimate");
      auto& slot = m[static_cast<std::size_t>(k - 1)];
      slot = std::min(slot, acc);
    }
  }
  std::vector<double> k(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    k[static_cast<std::size_t>(i)] = i + 1;
  const LineFit fit = fit_line(k, m);
  const double lambda = std::exp(fit.slope);
  if (!(lambda > 1.01))
    throw NumericError("map not numerically hyperbolic on sample (lambda_hat = " + std::to_string(lambda) + ")");
  return {std::exp(fit.intercept), lambda, fit.slope_stderr, 1, n};
}

/// Greedy maximal r-separated subset in input order.
inline std::vector<Complex> maximal_separated_set(std::span<const Complex> points, double r) {
  if (!(r > 0.0))
    throw InvalidArgument("separation radius must be positive");
  std::vector<Complex> kept;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
  auto cell = [&](double v) { return static_cast<std::int64_t>(std::floor(v / r)); };
  auto key = [](std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx) << 32) ^ (static_cast<std::uint64_t>(cy) & 0xffffffffu);
  };
  for (const auto& p : points) {
    const std::int64_t cx = cell(p.real()), cy = cell(p.imag());
    bool close = false;
    for (std::int64_t dx = -1; dx <= 1 && !close; ++dx)
      for (std::int64_t dy = -1; dy <= 1 && !close; ++dy) {
        const auto it = grid.find(key(cx + dx, cy + dy));
        if (it == grid.end())
          continue;
        for (std::size_t idx : it->second)
          if (std::abs(kept[idx] - p) < r) {
            close = true;
            break;
          }
      }
    if (!close) {
      grid[key(cx, cy)].push_back(kept.size());
      kept.push_back(p);
    }
  }
  return kept;
}

/// Shortest decimal that round-trips.
inline std::string format_double(double v) { return fmt::format("{}", v); }

inline void write_sample_csv(std::ostream& os, std::span<const Complex> points) {
  os << "re,im\n";
  for (const auto& p : points)
    os << format_double(p.real()) << ',' << format_double(p.imag()) << '\n';
}

inline std::vector<Complex> read_sample_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "re,im")
    throw InvalidArgument("point file must start with the header re,im");
  std::vector<Complex> pts;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty())
      continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos)
        throw std::invalid_argument("missing comma");
      std::size_t used_re = 0, used_im = 0;
      const double re = std::stod(line.substr(0, comma), &used_re);
      const double im = std::stod(line.substr(comma + 1), &used_im);
      if (used_re != comma || used_im != line.size() - comma - 1)
        throw std::invalid_argument("trailing characters");
      pts.push_back(make_complex(re, im));
    } catch (const std::exception&) {
      throw InvalidArgument("point file line " + std::to_string(lineno) + ": expected re,im");
    }
  }
  return pts;
}

} // namespace jlab
