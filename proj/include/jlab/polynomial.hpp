#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "jlab/complex.hpp"

namespace jlab {

/// Dense complex polynomial, coefficients stored lowest degree first.
///
/// Trailing (leading-degree) zero coefficients are stripped on construction,
/// so the stored leading coefficient is nonzero unless the polynomial is zero.
class Polynomial {
public:
  Polynomial() = default;

  explicit Polynomial(std::vector<Complex> coefficients) : c_(std::move(coefficients)) {
    for (const auto& a : c_)
      if (!is_finite(a))
        throw InvalidArgument("polynomial coefficient is not finite");
    trim();
  }

  Polynomial(std::initializer_list<Complex> coefficients)
      : Polynomial(std::vector<Complex>(coefficients)) {}

  static Polynomial monomial(std::size_t degree, Complex a = 1.0) {
    std::vector<Complex> c(degree + 1, 0.0);
    c[degree] = a;
    return Polynomial(std::move(c));
  }

  bool is_zero() const { return c_.empty(); }

  /// Degree; the zero polynomial reports 0.
  std::size_t degree() const { return c_.empty() ? 0 : c_.size() - 1; }

  const std::vector<Complex>& coefficients() const { return c_; }

  Complex coefficient(std::size_t i) const { return i < c_.size() ? c_[i] : Complex{}; }
  Complex leading() const { return c_.empty() ? Complex{} : c_.back(); }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& a : c_)
      m = std::max(m, std::abs(a));
    return m;
  }

  Complex operator()(Complex z) const {
    Complex acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it)
      acc = acc * z + *it;
    return acc;
  }

  /// Value and first derivative by a single Horner pass.
  std::pair<Complex, Complex> eval_with_derivative(Complex z) const {
    Complex p = 0.0, dp = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      dp = dp * z + p;
      p = p * z + *it;
    }
    return {p, dp};
  }

  /// Sum of |a_i| |z|^i, the natural scale for judging a residual at z.
  double magnitude_bound(Complex z) const {
    double acc = 0.0, az = std::abs(z);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it)
      acc = acc * az + std::abs(*it);
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1)
      return {};
    std::vector<Complex> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i)
      d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
  }

  /// True when only one coefficient besides the constant term is nonzero.
  bool is_binomial() const {
    if (c_.size() < 2)
      return false;
    return std::all_of(c_.begin() + 1, c_.end() - 1, [](Complex a) { return a == Complex{}; });
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Complex> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i)
      c[i] += b.c_[i];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(Complex s, const Polynomial& a) {
    std::vector<Complex> c = a.c_;
    for (auto& x : c)
      x *= s;
    return Polynomial(std::move(c));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Complex(-1.0) * b; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero())
      return {};
    std::vector<Complex> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j)
        c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
  void trim() {
    while (!c_.empty() && c_.back() == Complex{})
      c_.pop_back();
  }

  std::vector<Complex> c_;
};

/// Homogenized value H(X, Y) = sum a_i X^i Y^(d-i) of a polynomial viewed
/// as a form of degree d >= deg, with both partial derivatives.
struct FormValue {
  Complex value, d_dx, d_dy;
};

inline FormValue evaluate_form(const Polynomial& p, std::size_t d, Complex x, Complex y) {
  const auto& a = p.coefficients();
  FormValue out{0.0, 0.0, 0.0};
  if (a.empty())
    return out;
  // Powers x^0..x^d and y^0..y^d; degrees here are small.
  std::vector<Complex> xp(d + 1), yp(d + 1);
  xp[0] = yp[0] = 1.0;
  for (std::size_t i = 1; i <= d; ++i) {
    xp[i] = xp[i - 1] * x;
    yp[i] = yp[i - 1] * y;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.value += a[i] * xp[i] * yp[d - i];
    if (i > 0)
      out.d_dx += a[i] * static_cast<double>(i) * xp[i - 1] * yp[d - i];
    if (i < d)
      out.d_dy += a[i] * static_cast<double>(d - i) * xp[i] * yp[d - i - 1];
  }
  return out;
}

} // namespace jlab
