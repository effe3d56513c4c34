#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jlab/complex.hpp"
#include "jlab/error.hpp"
#include "jlab/polynomial.hpp"
#include "jlab/roots.hpp"

namespace jlab {

namespace detail {

/// Determinant by Gaussian elimination with partial pivoting.
inline Complex determinant(std::vector<std::vector<Complex>> a) {
  const std::size_t n = a.size();
  Complex det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col]))
        piv = r;
    if (a[piv][col] == Complex{})
      return 0.0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const Complex f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c)
        a[r][c] -= f * a[col][c];
    }
  }
  return det;
}

} // namespace detail

/// Resultant of p and q via the Sylvester matrix.
inline Complex resultant(const Polynomial& p, const Polynomial& q) {
  const std::size_t m = p.degree(), n = q.degree();
  const std::size_t size = m + n;
  if (size == 0)
    return 1.0;
  std::vector<std::vector<Complex>> s(size, std::vector<Complex>(size, 0.0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i <= m; ++i)
      s[r][r + i] = p.coefficient(m - i);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t i = 0; i <= n; ++i)
      s[n + r][r + i] = q.coefficient(n - i);
  return detail::determinant(std::move(s));
}

struct PeriodicPoint {
  Complex point;
  double multiplier_modulus;
};

/// Iterates with cumulative log|T'| along the way. `truncated` is set when
/// the orbit met a pole or left the escape disk before n steps.
struct OrbitTrace {
  Complex start;
  std::vector<Complex> points;
  std::vector<double> derivative_log_sums;
  bool truncated = false;
};

/// T = P/Q on the Riemann sphere with P, Q coprime and max degree >= 2.
class RationalMap {
public:
  static constexpr double kCoprimeTol = 1e-9;

  RationalMap(Polynomial numerator, Polynomial denominator)
      : p_(std::move(numerator)), q_(std::move(denominator)) {
    if (q_.is_zero())
      throw InvalidArgument("denominator is the zero polynomial");
    if (p_.is_zero())
      throw InvalidArgument("numerator is the zero polynomial");
    degree_ = static_cast<int>(std::max(p_.degree(), q_.degree()));
    if (degree_ < 2)
      throw InvalidArgument("rational map degree must be at least 2, got " + std::to_string(degree_));
    if (q_.degree() > 0) {
      const Polynomial pn = Complex(1.0 / p_.max_abs_coefficient()) * p_;
      const Polynomial qn = Complex(1.0 / q_.max_abs_coefficient()) * q_;
      const double res = std::abs(resultant(pn, qn));
      if (!(res > kCoprimeTol))
        throw InvalidArgument("numerator and denominator share a root (|resultant| = " + std::to_string(res) + ")");
    }
    dp_ = p_.derivative();
    dq_ = q_.derivative();
    inv_q0_ = q_.degree() == 0 ? 1.0 / q_.coefficient(0) : Complex{};
  }

  static RationalMap polynomial(Polynomial p) { return RationalMap(std::move(p), Polynomial{1.0}); }

  /// z^d.
  static RationalMap power(int d) { return polynomial(Polynomial::monomial(static_cast<std::size_t>(d))); }

  /// z^2 + c.
  static RationalMap quadratic(Complex c) { return polynomial(Polynomial{c, 0.0, 1.0}); }

  const Polynomial& numerator() const { return p_; }
  const Polynomial& denominator() const { return q_; }
  int degree() const { return degree_; }
  bool is_polynomial() const { return q_.degree() == 0; }

  /// a z^d / b with |a/b| = 1: the Julia set is exactly the unit circle.
  bool has_unit_circle_julia() const {
    if (!is_polynomial() || p_.degree() < 2)
      return false;
    const auto& c = p_.coefficients();
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
      if (c[i] != Complex{})
        return false;
    return std::abs(std::abs(p_.leading() * inv_q0_) - 1.0) < 1e-15;
  }

  /// T at a finite point; returns a non-finite value at poles and on overflow.
  Complex step(Complex z) const {
    if (is_polynomial())
      return p_(z) * inv_q0_;
    return p_(z) / q_(z);
  }

  SpherePoint operator()(const SpherePoint& s) const {
    if (s.is_infinity()) {
      if (p_.degree() > q_.degree())
        return SpherePoint::infinity();
      if (p_.degree() == q_.degree())
        return SpherePoint(p_.leading() / q_.leading());
      return SpherePoint(Complex{});
    }
    const Complex z = s.value();
    const Complex pz = p_(z), qz = q_(z);
    if (qz == Complex{}) {
      if (pz == Complex{})
        throw InvariantViolation("0/0 while evaluating a coprime rational map");
      return SpherePoint::infinity();
    }
    Complex v = pz / qz;
    if (is_finite(v))
      return SpherePoint(v);
    // Overflow in the z chart: evaluate through w = 1/z.
    const Complex w = 1.0 / z;
    Complex pr = 0.0, qr = 0.0;
    for (std::size_t i = 0; i <= p_.degree(); ++i)
      pr = pr * w + p_.coefficient(i);
    for (std::size_t i = 0; i <= q_.degree(); ++i)
      qr = qr * w + q_.coefficient(i);
    if (qr == Complex{})
      return SpherePoint::infinity();
    v = pr / qr;
    const long shift = static_cast<long>(p_.degree()) - static_cast<long>(q_.degree());
    for (long i = 0; i < std::labs(shift); ++i)
      v = shift > 0 ? v * z : v / z;
    return is_finite(v) ? SpherePoint(v) : SpherePoint::infinity();
  }

  /// T'(z); throws at a pole.
  Complex derivative(Complex z) const {
    if (is_polynomial())
      return dp_(z) * inv_q0_;
    const Complex qz = q_(z);
    if (qz == Complex{})
      throw InvalidArgument("derivative undefined at pole");
    return (dp_(z) * qz - p_(z) * dq_(z)) / (qz * qz);
  }

  double derivative_modulus(Complex z) const { return std::abs(derivative(z)); }

  /// Roots of P(z) - w Q(z), with multiplicity.
  ///
  /// When deg P = deg Q and w = lead(P)/lead(Q) one preimage sits at
  /// infinity and only the finite ones are returned.
  std::vector<Complex> preimages(Complex w) const {
    const Polynomial r = p_ - w * q_;
    if (r.is_zero())
      throw InvariantViolation("P - wQ vanished identically");
    auto roots = polynomial_roots(r);
    for (const auto& z : roots) {
      const double residual = std::abs(r(z));
      if (!(residual <= kPreimageResidual * std::max(1.0, r.magnitude_bound(z))))
        throw NumericError("preimage residual " + std::to_string(residual) + " exceeds tolerance");
    }
    return roots;
  }

  /// One preimage of w selected by `branch` in [0, d); equals preimages(w)[branch].
  /// Allocation-free for z^d-type and degree-2 maps.
  Complex preimage(Complex w, std::uint32_t branch) const {
    if (degree_ == 2 && p_.degree() <= 2 && q_.degree() <= 2) {
      const Complex a = p_.coefficient(2) - w * q_.coefficient(2);
      const Complex b = p_.coefficient(1) - w * q_.coefficient(1);
      const Complex c = p_.coefficient(0) - w * q_.coefficient(0);
      if (a != Complex{}) {
        if (c == Complex{})
          return branch == 0 ? Complex{} : -b / a;
        const auto [r1, r2] = quadratic_roots(a, b, c);
        return branch == 0 ? r1 : r2;
      }
    } else if (is_pure_power()) {
      if (w == Complex{})
        return 0.0;
      const Complex target = w * q_.coefficient(0) / p_.leading();
      const double m = static_cast<double>(degree_);
      return std::polar(std::pow(std::abs(target), 1.0 / m),
                        (std::arg(target) + 2.0 * std::numbers::pi * static_cast<double>(branch % degree_)) / m);
    }
    const auto all = preimages(w);
    return all.at(branch % all.size());
  }

private:
  static constexpr double kPreimageResidual = 1e-10;

  bool is_pure_power() const {
    return is_polynomial() && p_.is_binomial() && p_.coefficient(0) == Complex{};
  }

  Polynomial p_, q_, dp_, dq_;
  Complex inv_q0_;
  int degree_ = 0;
};

inline SpherePoint evaluate(const RationalMap& map, const SpherePoint& z) { return map(z); }

inline double derivative_modulus(const RationalMap& map, Complex z) { return map.derivative_modulus(z); }

inline constexpr double kEscapeRadius = 1e6;

/// n forward steps from z0 with cumulative log|T'(T^j z0)|.
inline OrbitTrace orbit(const RationalMap& map, Complex z0, std::size_t n, double escape_radius = kEscapeRadius) {
  OrbitTrace t{z0, {z0}, {0.0}, false};
  t.points.reserve(n + 1);
  t.derivative_log_sums.reserve(n + 1);
  Complex z = z0;
  double log_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex next = map.step(z);
    if (!is_finite(next) || std::abs(next) > escape_radius) {
      t.truncated = true;
      break;
    }
    log_sum += std::log(map.derivative_modulus(z));
    z = next;
    t.points.push_back(z);
    t.derivative_log_sums.push_back(log_sum);
  }
  return t;
}

inline std::vector<Complex> preimages(const RationalMap& map, Complex w) { return map.preimages(w); }

/// |(T^p)'(z)| by the chain rule along the orbit.
inline double multiplier_modulus(const RationalMap& map, Complex z, int p) {
  double m = 1.0;
  for (int j = 0; j < p; ++j) {
    m *= map.derivative_modulus(z);
    z = map.step(z);
  }
  return m;
}

inline Complex iterate(const RationalMap& map, Complex z, int n) {
  for (int j = 0; j < n; ++j)
    z = map.step(z);
  return z;
}

inline bool is_repelling(const RationalMap& map, Complex z, int p) {
  if (p < 1)
    throw InvalidArgument("period must be positive");
  const Complex back = iterate(map, z, p);
  if (!(std::abs(back - z) <= 1e-9 * std::max(1.0, std::abs(z))))
    throw InvalidArgument("point is not periodic with the given period");
  return multiplier_modulus(map, z, p) > 1.0;
}

inline constexpr std::uint64_t kPeriodicDegreeBudget = 1u << 14;

namespace detail {

/// F(z) = X_n - z Y_n and F'(z) for the homogeneous iterate (X_n : Y_n) of
/// (z : 1), jointly rescaled each step. Only F'/F is meaningful.
inline std::pair<Complex, Complex> fixed_point_equation(const RationalMap& map, int n, Complex z) {
  const auto d = static_cast<std::size_t>(map.degree());
  Complex x = z, y = 1.0, dx = 1.0, dy = 0.0;
  for (int j = 0; j < n; ++j) {
    const FormValue pf = evaluate_form(map.numerator(), d, x, y);
    const FormValue qf = evaluate_form(map.denominator(), d, x, y);
    Complex nx = pf.value, ny = qf.value;
    Complex ndx = pf.d_dx * dx + pf.d_dy * dy;
    Complex ndy = qf.d_dx * dx + qf.d_dy * dy;
    const double s = std::max(std::abs(nx), std::abs(ny));
    if (!(s > 0.0) || !std::isfinite(s))
      return {Complex(std::numeric_limits<double>::quiet_NaN()), 0.0};
    const double inv = 1.0 / s;
    x = nx * inv;
    y = ny * inv;
    dx = ndx * inv;
    dy = ndy * inv;
  }
  return {x - z * y, dx - y - z * dy};
}

inline std::uint64_t checked_power(std::uint64_t base, int n, std::uint64_t budget) {
  std::uint64_t v = 1;
  for (int i = 0; i < n; ++i) {
    if (v > budget / base)
      return budget + 1;
    v *= base;
  }
  return v;
}

} // namespace detail

/// Finite solutions of T^n(z) = z with |(T^n)'(z)|, counted with multiplicity.
inline std::vector<PeriodicPoint> periodic_points(const RationalMap& map, int n,
                                                  std::uint64_t budget = kPeriodicDegreeBudget) {
  if (n < 1)
    throw InvalidArgument("period must be at least 1");
  const auto d = static_cast<std::uint64_t>(map.degree());
  const std::uint64_t dn = detail::checked_power(d, n, budget);
  if (dn > budget)
    throw InvalidArgument("degree budget exceeded: " + std::to_string(d) + "^" + std::to_string(n) + " > " +
                          std::to_string(budget));

  // Solutions on the sphere number d^n + 1; one of them is infinity when T^n fixes it.
  SpherePoint inf = SpherePoint::infinity();
  for (int j = 0; j < n; ++j)
    inf = map(inf);
  std::uint64_t count = dn + 1;
  if (inf.is_infinity()) {
    if (map.numerator().degree() == map.denominator().degree() + 1) {
      const Complex mult = map.denominator().leading() / map.numerator().leading();
      if (std::abs(std::pow(mult, n) - 1.0) < 1e-12)
        throw NumericError("parabolic cycle at infinity is not supported");
    }
    --count;
  }

  std::vector<Complex> roots;
  if (n == 1) {
    const Polynomial eq = map.numerator() - Polynomial{0.0, 1.0} * map.denominator();
    roots = polynomial_roots(eq);
  } else {
    double radius = 0.0;
    for (const auto& fp : periodic_points(map, 1, budget))
      radius = std::max(radius, std::abs(fp.point));
    AberthOptions opt;
    opt.radius = std::clamp(radius, 0.5, 1e3);
    auto eval = [&](Complex z) { return detail::fixed_point_equation(map, n, z); };
    roots = aberth_roots(static_cast<std::size_t>(count), eval, opt);
    for (auto& r : roots) {
      for (int polish = 0; polish < 2; ++polish) {
        const auto [f, df] = eval(r);
        if (f == Complex{} || df == Complex{} || !is_finite(f / df))
          break;
        const Complex next = r - f / df;
        const auto [fn, dfn] = eval(next);
        if (!(std::abs(fn / dfn) < std::abs(f / df)))
          break;
        r = next;
      }
    }
  }

  std::vector<PeriodicPoint> out;
  out.reserve(roots.size());
  for (const auto& z : roots) {
    const Complex back = iterate(map, z, n);
    if (!(std::abs(back - z) <= 1e-8 * std::max(1.0, std::abs(z))))
      throw NumericError("periodic point residual too large at period " + std::to_string(n));
    out.push_back({z, multiplier_modulus(map, z, n)});
  }
  return out;
}

/// Most strongly repelling fixed point; a convenient start for backward walks.
inline Complex most_repelling_fixed_point(const RationalMap& map) {
  const auto fps = periodic_points(map, 1);
  const auto it = std::max_element(fps.begin(), fps.end(), [](const PeriodicPoint& a, const PeriodicPoint& b) {
    return a.multiplier_modulus < b.multiplier_modulus;
  });
  if (it == fps.end() || !(it->multiplier_modulus > 1.0))
    throw NumericError("map has no finite repelling fixed point");
  return it->point;
}

// Map specification: {"numerator": [[re,im],...], "denominator": [[re,im],...]}.

inline Polynomial polynomial_from_json(const nlohmann::json& j, const char* field) {
  if (!j.is_array() || j.empty())
    throw InvalidArgument(std::string(field) + ": expected a non-empty array of [re, im] pairs");
  std::vector<Complex> c;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      throw InvalidArgument(std::string(field) + ": each coefficient must be [re, im]");
    c.push_back(make_complex(pair[0].get<double>(), pair[1].get<double>()));
  }
  return Polynomial(std::move(c));
}

inline RationalMap map_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw InvalidArgument("map specification must be a JSON object");
  for (const auto& item : j.items())
    if (item.key() != "numerator" && item.key() != "denominator")
      throw InvalidArgument("map specification: unknown key '" + item.key() + "'");
  if (!j.contains("numerator") || !j.contains("denominator"))
    throw InvalidArgument("map specification needs 'numerator' and 'denominator'");
  return RationalMap(polynomial_from_json(j["numerator"], "numerator"),
                     polynomial_from_json(j["denominator"], "denominator"));
}

inline nlohmann::json polynomial_to_json(const Polynomial& p) {
  auto out = nlohmann::json::array();
  for (const auto& c : p.coefficients())
    out.push_back({c.real(), c.imag()});
  if (out.empty())
    out.push_back({0.0, 0.0});
  return out;
}

inline nlohmann::ordered_json map_to_json(const RationalMap& map) {
  nlohmann::ordered_json j;
  j["numerator"] = polynomial_to_json(map.numerator());
  j["denominator"] = polynomial_to_json(map.denominator());
  return j;
}

} // namespace jlab
