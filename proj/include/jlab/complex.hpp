#pragma once

#include <cmath>
#include <complex>
#include <optional>

#include "jlab/error.hpp"

namespace jlab {

using Complex = std::complex<double>;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Builds a complex number, rejecting NaN and infinite components.
inline Complex make_complex(double re, double im) {
  if (!std::isfinite(re) || !std::isfinite(im))
    throw InvalidArgument("complex components must be finite");
  return {re, im};
}

/// A point of the Riemann sphere: a finite complex number or infinity.
class SpherePoint {
public:
  SpherePoint(Complex z) : z_(z) {
    if (!jlab::is_finite(z))
      throw InvalidArgument("finite sphere point has non-finite components");
  }

  static SpherePoint infinity() { return SpherePoint(); }

  bool is_infinity() const { return !z_.has_value(); }
  bool is_finite() const { return z_.has_value(); }

  Complex value() const {
    if (!z_)
      throw InvalidArgument("point at infinity has no finite value");
    return *z_;
  }

  friend bool operator==(const SpherePoint&, const SpherePoint&) = default;

private:
  SpherePoint() = default;
  std::optional<Complex> z_;
};

} // namespace jlab
