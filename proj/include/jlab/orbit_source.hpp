#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "jlab/complex.hpp"
#include "jlab/rational_map.hpp"
#include "jlab/rng.hpp"

namespace jlab {

/// Forward iterates T(z), T^2(z), ... of a start point.
///
/// For maps whose Julia set is the unit circle and starts on it, every
/// iterate is renormalized to modulus 1. The result is a pseudo-orbit with
/// per-step error of one ulp, shadowed by a true orbit on the circle.
/// Elsewhere, iteration stops at the escape radius or at a pole.
class ForwardOrbit {
public:
  ForwardOrbit(const RationalMap& map, Complex start, double escape_radius = kEscapeRadius)
      : map_(&map), z_(start), escape_(escape_radius),
        project_(map.has_unit_circle_julia() && std::abs(std::abs(start) - 1.0) <= 1e-9) {}

  ForwardOrbit(RationalMap&&, Complex, double = kEscapeRadius) = delete;

  std::optional<Complex> next() {
    if (escaped_)
      return std::nullopt;
    Complex w = map_->step(z_);
    if (!is_finite(w) || std::abs(w) > escape_) {
      escaped_ = true;
      return std::nullopt;
    }
    if (project_)
      w /= std::abs(w);
    z_ = w;
    return w;
  }

  bool escaped() const { return escaped_; }
  bool projected() const { return project_; }

private:
  const RationalMap* map_;
  Complex z_;
  double escape_;
  bool project_;
  bool escaped_ = false;
};

/// A true orbit segment x_0, ..., x_L obtained backwards.
///
/// Starting from x_{L+B} = anchor, x_j is the preimage of x_{j+1} on the
/// branch drawn from (seed, stream, j). Inverse branches contract, so the
/// sequence satisfies T(x_j) = x_{j+1} to rounding even though forward
/// iteration from x_0 would drift off the Julia set. The center x_0 is a
/// sample of the backward-walk (Lyubich) measure.
///
/// Only checkpoints every `stride` steps are kept; forward reads replay
/// one segment at a time with bit-identical arithmetic.
class ShadowedOrbit {
public:
  ShadowedOrbit(const RationalMap& map, Complex anchor, std::size_t length, std::size_t burn_in, std::uint64_t seed,
                std::uint64_t stream, std::size_t stride = 4096)
      : map_(&map), rng_(seed), stream_(stream), length_(length), stride_(stride) {
    const auto d = static_cast<std::uint32_t>(map.degree());
    Complex x = anchor;
    checkpoints_.assign(length / stride + 1, Complex{});
    for (std::size_t j = length + burn_in; j-- > 0;) {
      x = map.preimage(x, rng_.below(stream, j, d));
      if (j == length)
        tail_ = x;
      if (j <= length && j % stride == 0)
        checkpoints_[j / stride] = x;
    }
    if (length + burn_in == 0)
      tail_ = x;
    center_ = checkpoints_[0];
  }

  ShadowedOrbit(RationalMap&&, Complex, std::size_t, std::size_t, std::uint64_t, std::uint64_t,
                std::size_t = 4096) = delete;

  Complex center() const { return center_; }
  std::size_t length() const { return length_; }

  /// x_1, x_2, ..., x_L, then nullopt.
  std::optional<Complex> next() {
    if (pos_ >= length_)
      return std::nullopt;
    ++pos_;
    if (buffer_.empty() || pos_ > seg_end_)
      load_segment(pos_);
    return buffer_[pos_ - seg_begin_];
  }

private:
  void load_segment(std::size_t first) {
    const auto d = static_cast<std::uint32_t>(map_->degree());
    seg_begin_ = first;
    const std::size_t m = (first - 1) / stride_;
    seg_end_ = std::min((m + 1) * stride_, length_);
    buffer_.assign(seg_end_ - seg_begin_ + 1, Complex{});
    Complex x = seg_end_ == length_ ? tail_ : checkpoints_[seg_end_ / stride_];
    buffer_.back() = x;
    for (std::size_t j = seg_end_; j-- > seg_begin_;) {
      x = map_->preimage(x, rng_.below(stream_, j, d));
      buffer_[j - seg_begin_] = x;
    }
  }

  const RationalMap* map_;
  CounterRng rng_;
  std::uint64_t stream_;
  std::size_t length_, stride_;
  std::vector<Complex> checkpoints_;
  Complex tail_{}, center_{};
  std::vector<Complex> buffer_;
  std::size_t pos_ = 0, seg_begin_ = 0, seg_end_ = 0;
};

} // namespace jlab
