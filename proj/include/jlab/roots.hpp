#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "jlab/complex.hpp"
#include "jlab/polynomial.hpp"
#include "jlab/rng.hpp"

namespace jlab {

struct AberthOptions {
  double update_tol = 1e-12;
  std::size_t max_iterations = 1000;
  int max_restarts = 3;
  std::uint64_t seed = 0xAB3E27;
  Complex center = 0.0;
  double radius = 1.0;
};

/// Simultaneous (Aberth-Ehrlich) iteration for all n roots of a function
/// that behaves like a degree-n polynomial.
///
/// `eval(z)` returns (p(z), p'(z)) up to a common nonzero factor; only the
/// ratio p'/p is used, which lets callers evaluate in rescaled coordinates.
/// Converged roots are frozen. If the sweep budget runs out the start
/// circle is perturbed from a seeded stream and the iteration restarted.
template <class Eval>
std::vector<Complex> aberth_roots(std::size_t n, Eval&& eval, const AberthOptions& opt = {}) {
  std::vector<Complex> z(n);
  if (n == 0)
    return z;
  const CounterRng rng(opt.seed);
  std::size_t unconverged = n;
  for (int attempt = 0; attempt <= opt.max_restarts; ++attempt) {
    double radius = opt.radius;
    double phase = 0.4;
    if (attempt > 0) {
      radius *= 0.8 + 0.5 * rng.uniform(attempt, 0);
      phase = 2.0 * std::numbers::pi * rng.uniform(attempt, 1);
    }
    for (std::size_t k = 0; k < n; ++k)
      z[k] = opt.center + std::polar(radius, phase + 2.0 * std::numbers::pi * static_cast<double>(k) / n);

    std::vector<char> done(n, 0);
    std::uint64_t jitter = 0;
    auto nudge = [&](std::size_t k) {
      const double u = rng.uniform(1000 + attempt, jitter++);
      z[k] += std::polar(1e-3 * std::max(1.0, std::abs(z[k])), 2.0 * std::numbers::pi * u);
    };

    unconverged = n;
    for (std::size_t it = 0; it < opt.max_iterations && unconverged > 0; ++it) {
      for (std::size_t k = 0; k < n; ++k) {
        if (done[k])
          continue;
        const auto [p, dp] = eval(z[k]);
        if (p == Complex{}) {
          done[k] = 1;
          --unconverged;
          continue;
        }
        if (!is_finite(p) || !is_finite(dp)) {
          nudge(k);
          continue;
        }
        Complex repulsion = 0.0;
        bool clash = false;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == k)
            continue;
          const Complex diff = z[k] - z[j];
          if (diff == Complex{}) {
            clash = true;
            break;
          }
          repulsion += 1.0 / diff;
        }
        const Complex denom = dp / p - repulsion;
        if (clash || denom == Complex{} || !is_finite(denom)) {
          nudge(k);
          continue;
        }
        const Complex step = 1.0 / denom;
        z[k] -= step;
        if (std::abs(step) <= opt.update_tol * std::max(1.0, std::abs(z[k]))) {
          done[k] = 1;
          --unconverged;
        }
      }
    }
    if (unconverged == 0)
      return z;
  }
  throw NumericError("root finder did not converge: " + std::to_string(unconverged) + " of " + std::to_string(n) +
                     " roots still moving after " + std::to_string(opt.max_restarts) + " restarts");
}

/// Both roots of a z^2 + b z + c, cancellation-free.
inline std::pair<Complex, Complex> quadratic_roots(Complex a, Complex b, Complex c) {
  Complex disc = std::sqrt(b * b - 4.0 * a * c);
  if ((std::conj(b) * disc).real() < 0.0)
    disc = -disc;
  const Complex q = -0.5 * (b + disc);
  if (q == Complex{})
    return {0.0, 0.0};
  return {q / a, c / q};
}

/// All roots of p with multiplicity, residual-polished.
inline std::vector<Complex> polynomial_roots(const Polynomial& p) {
  if (p.is_zero())
    throw InvalidArgument("the zero polynomial has no isolated roots");
  const auto& c = p.coefficients();
  const std::size_t n = p.degree();
  std::vector<Complex> roots;
  roots.reserve(n);

  std::size_t zeros = 0;
  while (zeros < n && c[zeros] == Complex{})
    ++zeros;
  roots.assign(zeros, 0.0);
  const std::size_t m = n - zeros;
  if (m == 0)
    return roots;
  const Polynomial q(std::vector<Complex>(c.begin() + static_cast<std::ptrdiff_t>(zeros), c.end()));

  if (m == 1) {
    roots.push_back(-q.coefficient(0) / q.coefficient(1));
  } else if (m == 2) {
    auto [r1, r2] = quadratic_roots(q.coefficient(2), q.coefficient(1), q.coefficient(0));
    roots.push_back(r1);
    roots.push_back(r2);
  } else if (q.is_binomial()) {
    const Complex w = -q.coefficient(0) / q.leading();
    const double mod = std::pow(std::abs(w), 1.0 / static_cast<double>(m));
    const double arg = std::arg(w);
    for (std::size_t k = 0; k < m; ++k)
      roots.push_back(std::polar(mod, (arg + 2.0 * std::numbers::pi * static_cast<double>(k)) / m));
  } else {
    AberthOptions opt;
    opt.radius = std::pow(std::abs(q.coefficient(0) / q.leading()), 1.0 / static_cast<double>(m));
    auto found = aberth_roots(m, [&](Complex z) { return q.eval_with_derivative(z); }, opt);
    for (auto& r : found) {
      for (int polish = 0; polish < 2; ++polish) {
        const auto [v, dv] = q.eval_with_derivative(r);
        if (v == Complex{} || dv == Complex{})
          break;
        const Complex next = r - v / dv;
        if (!is_finite(next) || std::abs(q(next)) >= std::abs(v))
          break;
        r = next;
      }
      roots.push_back(r);
    }
  }
  return roots;
}

} // namespace jlab
