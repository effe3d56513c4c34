#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "jlab/error.hpp"

namespace jlab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double rss = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw InvalidArgument("line fit needs at least two paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw InvalidArgument("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.rss += r * r;
  }
  f.slope_stderr = n > 2 ? std::sqrt(f.rss / static_cast<double>(n - 2) / sxx) : 0.0;
  return f;
}

/// Weighted least squares with weights w_i = 1 / sigma_i^2.
inline LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || w.size() != n)
    throw InvalidArgument("weighted line fit needs at least two paired points");
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    mx += w[i] * x[i];
    my += w[i] * y[i];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw InvalidArgument("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.rss += w[i] * r * r;
  }
  f.slope_stderr = std::sqrt(1.0 / sxx);
  return f;
}

/// Min and max of two-point slopes (y[i+w-1] - y[i]) / (x[i+w-1] - x[i]).
/// These stand in for liminf/limsup of a scaling exponent.
inline std::pair<double, double> windowed_slope_range(std::span<const double> x, std::span<const double> y,
                                                      std::size_t window = 3) {
  if (window < 2 || x.size() < window)
    throw InvalidArgument("not enough points for the slope window");
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i + window <= x.size(); ++i) {
    const double s = (y[i + window - 1] - y[i]) / (x[i + window - 1] - x[i]);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

} // namespace jlab
