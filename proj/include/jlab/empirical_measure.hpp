#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "jlab/complex.hpp"
#include "jlab/error.hpp"
#include "jlab/orbit_source.hpp"
#include "jlab/rational_map.hpp"
#include "jlab/regression.hpp"

namespace jlab {

/// Dyadic radii r_k = r0 * 2^-k for k = 0..k_max.
class RadiusSchedule {
public:
  RadiusSchedule(double r0, int k_max) : r0_(r0), k_max_(k_max) {
    if (!(r0 > 0.0) || !std::isfinite(r0))
      throw InvalidArgument("schedule r0 must be positive");
    if (k_max < 0)
      throw InvalidArgument("schedule k_max must be non-negative");
  }

  double r0() const { return r0_; }
  int k_max() const { return k_max_; }
  std::size_t size() const { return static_cast<std::size_t>(k_max_) + 1; }
  double radius(int k) const { return std::ldexp(r0_, -k); }
  double r_min() const { return radius(k_max_); }

  std::vector<double> radii() const {
    std::vector<double> r(size());
    for (int k = 0; k <= k_max_; ++k)
      r[static_cast<std::size_t>(k)] = radius(k);
    return r;
  }

private:
  double r0_;
  int k_max_;
};

inline const RadiusSchedule kDefaultSchedule{0.5, 14};

/// Minimum count in a ball before it enters any regression.
inline constexpr std::size_t kMinBallCount = 30;

/// Equal-weight point cloud with an exact fixed-radius counting index.
///
/// Points are bucketed into vertical columns of width `cell` and sorted by
/// ordinate inside each column. A ball query visits the columns it meets,
/// counts whole ordinate bands that lie safely inside the ball, and tests
/// the remaining points one by one with the same predicate as brute force.
class EmpiricalMeasure {
public:
  static constexpr std::size_t kMaxColumns = std::size_t{1} << 22;

  EmpiricalMeasure(std::vector<Complex> points, double cell) {
    if (points.empty())
      throw InvalidArgument("empirical measure needs at least one point");
    if (!(cell > 0.0))
      throw InvalidArgument("index cell size must be positive");
    double xmin = INFINITY, xmax = -INFINITY;
    for (const auto& p : points) {
      if (!is_finite(p))
        throw InvalidArgument("empirical measure point is not finite");
      xmin = std::min(xmin, p.real());
      xmax = std::max(xmax, p.real());
    }
    x0_ = xmin;
    cell_ = std::max(cell, (xmax - xmin) / static_cast<double>(kMaxColumns - 1));
    columns_ = static_cast<std::size_t>(std::floor((xmax - x0_) / cell_)) + 1;

    std::vector<std::uint32_t> col(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      col[i] = column_of(points[i].real());
    std::vector<std::uint32_t> order(points.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (col[a] != col[b])
        return col[a] < col[b];
      if (points[a].imag() != points[b].imag())
        return points[a].imag() < points[b].imag();
      return a < b;
    });
    xs_.resize(points.size());
    ys_.resize(points.size());
    col_begin_.assign(columns_ + 1, 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
      xs_[i] = points[order[i]].real();
      ys_[i] = points[order[i]].imag();
      ++col_begin_[col[order[i]] + 1];
    }
    std::partial_sum(col_begin_.begin(), col_begin_.end(), col_begin_.begin());
    points_ = std::move(points);
    atomic_ = std::all_of(points_.begin(), points_.end(), [&](Complex p) { return p == points_.front(); });
  }

  std::size_t size() const { return points_.size(); }
  std::span<const Complex> points() const { return points_; }
  double cell() const { return cell_; }

  /// Every sample point coincides: a point mass.
  bool is_atomic() const { return atomic_; }

  /// #{p : |p - z| < r}, or <= r when `closed`.
  std::size_t count(Complex z, double r, bool closed = false) const {
    if (r < 0.0 || (r == 0.0 && !closed))
      return 0;
    const double zr = z.real(), zi = z.imag();
    const double r2 = r * r;
    const double guard_out = 1e-6 * r + 1e-12 * (1.0 + std::abs(zr) + std::abs(zi) + std::abs(x0_));
    const double guard_in = 1e-6 * r;
    const double guard_x = 1e-12 * (1.0 + std::abs(x0_) + std::abs(zr) + cell_);
    auto inside = [&](std::size_t i) {
      const double dx = xs_[i] - zr, dy = ys_[i] - zi;
      const double d2 = dx * dx + dy * dy;
      return closed ? d2 <= r2 : d2 < r2;
    };

    const double lo_col = std::floor((zr - r - x0_) / cell_) - 1.0;
    const double hi_col = std::floor((zr + r - x0_) / cell_) + 1.0;
    if (hi_col < 0.0 || lo_col > static_cast<double>(columns_ - 1))
      return 0;
    const auto c_lo = static_cast<std::size_t>(std::max(0.0, lo_col));
    const auto c_hi = static_cast<std::size_t>(std::min(static_cast<double>(columns_ - 1), hi_col));

    std::size_t total = 0;
    const double* ys = ys_.data();
    for (std::size_t c = c_lo; c <= c_hi; ++c) {
      const std::size_t b = col_begin_[c], e = col_begin_[c + 1];
      if (b == e)
        continue;
      const double xl = x0_ + static_cast<double>(c) * cell_, xh = xl + cell_;
      const double dx_min = std::max(0.0, std::max(xl - zr, zr - xh) - guard_x);
      if (dx_min > r)
        continue;
      const double h_out = std::sqrt(std::max(0.0, r2 - dx_min * dx_min)) + guard_out;
      const std::size_t lo = static_cast<std::size_t>(std::lower_bound(ys + b, ys + e, zi - h_out) - ys);
      const std::size_t hi = static_cast<std::size_t>(std::upper_bound(ys + b, ys + e, zi + h_out) - ys);
      const double dx_max = std::max(std::abs(xl - zr), std::abs(xh - zr)) + guard_x;
      const double s = dx_max < r ? std::sqrt(r2 - dx_max * dx_max) : 0.0;
      if (s >= 1e-3 * r) {
        const double h_in = s - guard_in;
        const std::size_t ilo = static_cast<std::size_t>(std::upper_bound(ys + lo, ys + hi, zi - h_in) - ys);
        const std::size_t ihi = static_cast<std::size_t>(std::lower_bound(ys + ilo, ys + hi, zi + h_in) - ys);
        total += ihi - ilo;
        for (std::size_t i = lo; i < ilo; ++i)
          total += inside(i);
        for (std::size_t i = ihi; i < hi; ++i)
          total += inside(i);
      } else {
        for (std::size_t i = lo; i < hi; ++i)
          total += inside(i);
      }
    }
    return total;
  }

  /// Reference count by a full scan; same predicate as count().
  std::size_t brute_force_count(Complex z, double r, bool closed = false) const {
    std::size_t n = 0;
    const double r2 = r * r;
    for (const auto& p : points_) {
      const double dx = p.real() - z.real(), dy = p.imag() - z.imag();
      const double d2 = dx * dx + dy * dy;
      n += closed ? d2 <= r2 : d2 < r2;
    }
    return n;
  }

  double measure(Complex z, double r) const { return static_cast<double>(count(z, r)) / static_cast<double>(size()); }

private:
  std::uint32_t column_of(double x) const {
    const double c = std::floor((x - x0_) / cell_);
    return static_cast<std::uint32_t>(std::clamp(c, 0.0, static_cast<double>(columns_ - 1)));
  }

  std::vector<Complex> points_;
  std::vector<double> xs_, ys_;
  std::vector<std::size_t> col_begin_;
  double x0_ = 0.0, cell_ = 1.0;
  std::size_t columns_ = 1;
  bool atomic_ = false;
};

/// mu(N_r(z)) with open balls.
inline double ball_measure(const EmpiricalMeasure& mu, Complex z, double r) { return mu.measure(z, r); }

/// Empirical measure of the orbit {T^j z0 : 0 <= j < n}.
inline EmpiricalMeasure birkhoff_measure(const RationalMap& map, Complex z0, std::size_t n,
                                         double cell = kDefaultSchedule.r_min()) {
  if (n < 1000)
    throw InvalidArgument("Birkhoff measure needs at least 1000 orbit points");
  std::vector<Complex> pts;
  pts.reserve(n);
  pts.push_back(z0);
  ForwardOrbit orb(map, z0);
  while (pts.size() < n) {
    const auto z = orb.next();
    if (!z)
      throw NumericError("orbit left Julia neighborhood after " + std::to_string(pts.size()) + " steps");
    pts.push_back(*z);
  }
  return EmpiricalMeasure(std::move(pts), cell);
}

/// Scaling exponent of mu(N_r(z)) in r over the usable part of a schedule.
struct DimensionEstimate {
  double slope = 0.0;
  double d_lower = 0.0;
  double d_upper = 0.0;
  double slope_stderr = 0.0;
  int k_first = 0;
  int k_last = 0;
};

/// Usable radii have at least kMinBallCount points and do not cover the whole sample.
inline DimensionEstimate local_dimension(const EmpiricalMeasure& mu, Complex z, const RadiusSchedule& sched) {
  std::vector<double> x, y;
  int k_first = -1, k_last = -1;
  for (int k = 0; k <= sched.k_max(); ++k) {
    const double r = sched.radius(k);
    const std::size_t c = mu.count(z, r);
    if (c < kMinBallCount || c >= mu.size())
      continue;
    if (k_first < 0)
      k_first = k;
    k_last = k;
    x.push_back(std::log(r));
    y.push_back(std::log(static_cast<double>(c) / static_cast<double>(mu.size())));
  }
  if (x.size() < 4)
    throw NumericError("insufficient resolution: " + std::to_string(x.size()) + " usable radii");
  const LineFit fit = fit_line(x, y);
  const auto [lo, hi] = windowed_slope_range(x, y, 3);
  return {fit.slope, lo, hi, fit.slope_stderr, k_first, k_last};
}

enum class RegularityStatus { Pass, Violation, InsufficientData };

struct RegularityEntry {
  std::size_t probe;
  int n;
  std::size_t outer;  // count in N_{2^-n}
  std::size_t inner;  // count in N_{2^-(n+1)}
  RegularityStatus status;
};

struct RegularityByScale {
  int n;
  std::size_t checked = 0;
  std::size_t violations = 0;
  double violation_fraction() const {
    return checked ? static_cast<double>(violations) / static_cast<double>(checked) : 0.0;
  }
};

struct RegularityReport {
  std::vector<RegularityEntry> entries;
  std::vector<RegularityByScale> by_scale;
  /// Probes with no mass between consecutive radii at every checked scale.
  std::vector<std::size_t> degenerate_probes;
};

/// Tests mu(N_{2^-n}) <= n^2 mu(N_{2^-(n+1)}) for n in [n_lo, n_hi].
inline RegularityReport check_weak_diametric_regularity(const EmpiricalMeasure& mu, std::span<const Complex> probes,
                                                        int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi < n_lo)
    throw InvalidArgument("regularity check needs 1 <= n_lo <= n_hi");
  RegularityReport rep;
  for (int n = n_lo; n <= n_hi; ++n)
    rep.by_scale.push_back({n});
  for (std::size_t p = 0; p < probes.size(); ++p) {
    bool any_checked = false, all_flat = true;
    for (int n = n_lo; n <= n_hi; ++n) {
      const std::size_t outer = mu.count(probes[p], std::ldexp(1.0, -n));
      const std::size_t inner = mu.count(probes[p], std::ldexp(1.0, -(n + 1)));
      RegularityStatus st = RegularityStatus::InsufficientData;
      if (inner >= kMinBallCount) {
        const auto bound = static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * inner;
        st = outer <= bound ? RegularityStatus::Pass : RegularityStatus::Violation;
        auto& s = rep.by_scale[static_cast<std::size_t>(n - n_lo)];
        ++s.checked;
        s.violations += st == RegularityStatus::Violation;
        any_checked = true;
        all_flat = all_flat && outer == inner;
      }
      rep.entries.push_back({p, n, outer, inner, st});
    }
    if (any_checked && all_flat)
      rep.degenerate_probes.push_back(p);
  }
  return rep;
}

struct RegularRadius {
  double rho;
  double halfwidth;           // r / 4^(depth+1)
  std::size_t annulus_count;  // points with rho - halfwidth < |p - z| < rho + halfwidth
  std::size_t ball_count;     // points in N_{2r}(z)
};

/// Points with inner < |p - z| < outer.
inline std::size_t annulus_count(const EmpiricalMeasure& mu, Complex z, double inner, double outer) {
  const std::size_t a = mu.count(z, outer);
  const std::size_t b = mu.count(z, inner, true);
  return a > b ? a - b : 0;
}

/// Radius in (r, 2r) whose thin annulus carries little mass, by repeated
/// quadrisection of [1, 2): each level keeps the first quarter holding at
/// most half of the current interval's mass.
inline RegularRadius find_regular_radius(const EmpiricalMeasure& mu, Complex z, double r, int depth) {
  if (depth < 1)
    throw InvalidArgument("depth must be at least 1");
  if (!(r > 0.0))
    throw InvalidArgument("radius must be positive");
  auto mass = [&](double a, double b) { return mu.count(z, r * b) - mu.count(z, r * a); };
  double a = 1.0, b = 2.0;
  std::size_t m = mass(a, b);
  for (int level = 0; level < depth; ++level) {
    const double q = (b - a) / 4.0;
    bool found = false;
    for (int i = 0; i < 4; ++i) {
      const double qa = a + q * i, qb = a + q * (i + 1);
      const std::size_t mq = mass(qa, qb);
      if (2 * mq <= m) {
        a = qa;
        b = qb;
        m = mq;
        found = true;
        break;
      }
    }
    if (!found)
      throw InvariantViolation("no quarter holds at most half the mass");
  }
  RegularRadius out;
  out.rho = r * (a + b) / 2.0;
  out.halfwidth = r * std::ldexp(1.0, -2 * (depth + 1));
  out.annulus_count = annulus_count(mu, z, out.rho - out.halfwidth, out.rho + out.halfwidth);
  out.ball_count = mu.count(z, 2.0 * r);
  return out;
}

} // namespace jlab
