#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include "jlab/complex.hpp"
#include "jlab/error.hpp"
#include "jlab/recurrence.hpp"

namespace jlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// A point p/q of R/Z in lowest terms, 0 <= p < q. Angles are in turns.
class RationalAngle {
public:
  RationalAngle(BigInt p, BigInt q) {
    if (q <= 0)
      throw InvalidArgument("angle denominator must be positive");
    p %= q;
    if (p < 0)
      p += q;
    const BigInt g = gcd(p, q);
    p_ = p / g;
    q_ = q / g;
  }
  explicit RationalAngle(const BigRational& x) : RationalAngle(numerator(x), denominator(x)) {}

  const BigInt& p() const { return p_; }
  const BigInt& q() const { return q_; }
  BigRational value() const { return BigRational(p_, q_); }
  double to_double() const { return value().convert_to<double>(); }

  /// e^{2 pi i theta}, rounded.
  Complex to_complex() const { return std::polar(1.0, 2.0 * std::numbers::pi * to_double()); }

  friend bool operator==(const RationalAngle&, const RationalAngle&) = default;

private:
  BigInt p_, q_;
};

/// The exact dyadic rational equal to a finite double.
inline BigRational exact_rational(double x) {
  if (!std::isfinite(x))
    throw InvalidArgument("cannot convert a non-finite value to a rational");
  int e = 0;
  const double m = std::frexp(x, &e);
  const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  BigRational r(mant);
  const int shift = e - 53;
  if (shift >= 0)
    r *= BigRational(BigInt(1) << shift);
  else
    r /= BigRational(BigInt(1) << -shift);
  return r;
}

inline RationalAngle oracle_step(const RationalAngle& theta, int d) {
  if (d < 2)
    throw InvalidArgument("degree must be at least 2");
  return RationalAngle(theta.p() * d, theta.q());
}

/// Circle distance min(|a - b|, 1 - |a - b|) mod 1, exact.
inline BigRational circle_distance(const RationalAngle& a, const RationalAngle& b) {
  BigRational delta = a.value() - b.value();
  if (delta < 0)
    delta += 1;
  return delta <= BigRational(1, 2) ? delta : 1 - delta;
}

/// Least n >= 1 with circle distance(d^n theta, theta) < halfwidth.
inline ReturnTime oracle_return_time(const RationalAngle& theta, int d, const BigRational& halfwidth,
                                     std::uint64_t n_max) {
  if (d < 2)
    throw InvalidArgument("degree must be at least 2");
  if (n_max < 1)
    throw InvalidArgument("n_max must be at least 1");
  if (halfwidth <= 0)
    throw InvalidArgument("arc halfwidth must be positive");
  // Every iterate has a numerator over the same q: compare min(m, q - m) / q < hw.
  const BigInt& q = theta.q();
  const BigInt lhs_scale = denominator(halfwidth);
  const BigInt rhs = numerator(halfwidth) * q;
  BigInt a = theta.p();
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    a = (a * d) % q;
    BigInt m = a - theta.p();
    if (m < 0)
      m += q;
    const BigInt dist = m <= q - m ? m : q - m;
    if (dist * lhs_scale < rhs)
      return ReturnTime::finite(n);
  }
  return ReturnTime::not_found(n_max);
}

/// (preperiod, period) of theta under multiplication by d; always terminates
/// because iterates share the denominator q.
inline std::pair<std::uint64_t, std::uint64_t> oracle_cycle(const RationalAngle& theta, int d) {
  if (d < 2)
    throw InvalidArgument("degree must be at least 2");
  const BigInt& q = theta.q();
  auto f = [&](const BigInt& x) -> BigInt { return (x * d) % q; };
  // Brent's algorithm.
  std::uint64_t power = 1, lam = 1;
  BigInt tortoise = theta.p(), hare = f(theta.p());
  while (tortoise != hare) {
    if (power == lam) {
      tortoise = hare;
      power *= 2;
      lam = 0;
    }
    hare = f(hare);
    ++lam;
  }
  BigInt t = theta.p(), h = theta.p();
  for (std::uint64_t i = 0; i < lam; ++i)
    h = f(h);
  std::uint64_t mu = 0;
  while (t != h) {
    t = f(t);
    h = f(h);
    ++mu;
  }
  return {mu, lam};
}

struct Arc {
  RationalAngle center;
  BigRational halfwidth;

  Arc(RationalAngle c, BigRational h) : center(std::move(c)), halfwidth(std::move(h)) {
    if (!(halfwidth > 0 && halfwidth < BigRational(1, 2)))
      throw InvalidArgument("arc halfwidth must lie in (0, 1/2)");
  }
};

/// Haar measure of an arc.
inline BigRational oracle_arc_measure(const Arc& arc) { return 2 * arc.halfwidth; }

/// Arc halfwidth, in turns, of the circle points within chord distance r.
inline double chord_to_halfwidth(double r) {
  if (!(r > 0.0 && r <= 2.0))
    throw InvalidArgument("chord must lie in (0, 2]");
  return std::asin(r / 2.0) / std::numbers::pi;
}

/// Haar measure of N_r(z) for z on the circle: (2/pi) arcsin(r/2).
inline double chord_ball_measure(double r) { return 2.0 * chord_to_halfwidth(r); }

} // namespace jlab
