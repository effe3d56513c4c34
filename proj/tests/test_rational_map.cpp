#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "jlab/rational_map.hpp"

using namespace jlab;

namespace {

const Complex kOmega = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);

bool contains(const std::vector<Complex>& v, Complex z, double tol) {
  return std::any_of(v.begin(), v.end(), [&](Complex p) { return std::abs(p - z) < tol; });
}

// (z^2 + 1) / (2z)
RationalMap newton_like() { return RationalMap(Polynomial{1.0, 0.0, 1.0}, Polynomial{0.0, 2.0}); }

} // namespace

TEST(RationalMap, EvaluateExamples) {
  const auto sq = RationalMap::power(2);
  EXPECT_EQ(evaluate(sq, SpherePoint(2.0)).value(), Complex(4.0));
  EXPECT_TRUE(evaluate(sq, SpherePoint::infinity()).is_infinity());
  EXPECT_NEAR(std::abs(evaluate(newton_like(), SpherePoint(1.0)).value() - 1.0), 0.0, 1e-15);
  EXPECT_TRUE(evaluate(newton_like(), SpherePoint(0.0)).is_infinity());
  EXPECT_TRUE(evaluate(newton_like(), SpherePoint::infinity()).is_infinity());
}

TEST(RationalMap, DerivativeExamples) {
  EXPECT_DOUBLE_EQ(derivative_modulus(RationalMap::power(2), 1.0), 2.0);
  const auto cube = RationalMap::power(3);
  for (double t : {0.1, 0.37, 0.9})
    EXPECT_NEAR(derivative_modulus(cube, std::polar(1.0, 2.0 * std::numbers::pi * t)), 3.0, 1e-14);
  EXPECT_EQ(derivative_modulus(RationalMap::quadratic(0.3), 0.0), 0.0);
  try {
    derivative_modulus(newton_like(), 0.0);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("derivative undefined at pole"), std::string::npos);
  }
}

TEST(RationalMap, DerivativeMatchesFiniteDifferences) {
  const RationalMap maps[] = {RationalMap::quadratic({-0.12, 0.74}), newton_like(),
                              RationalMap(Polynomial{0.5, 0.0, 0.0, 1.0}, Polynomial{1.0, 0.0, 0.3})};
  const CounterRng rng(3);
  for (const auto& m : maps)
    for (std::uint64_t i = 0; i < 200; ++i) {
      const Complex z{2.0 * rng.uniform(0, i) - 1.0, 2.0 * rng.uniform(1, i) - 1.0};
      if (std::abs(m.denominator()(z)) < 1e-2)
        continue;
      const Complex h = std::polar(1e-6, 2.0 * std::numbers::pi * rng.uniform(2, i));
      const double fd = std::abs(m.step(z + h) - m.step(z - h)) / (2.0 * std::abs(h));
      const double an = m.derivative_modulus(z);
      EXPECT_NEAR(fd, an, 1e-5 * std::max(1.0, an));
    }
}

TEST(RationalMap, OrbitExamples) {
  const auto on_circle = orbit(RationalMap::power(2), 1.0, 5);
  ASSERT_EQ(on_circle.points.size(), 6u);
  for (const auto& z : on_circle.points)
    EXPECT_EQ(z, Complex(1.0));
  EXPECT_NEAR(on_circle.derivative_log_sums.back(), 5.0 * std::log(2.0), 1e-12);

  const auto period2 = orbit(RationalMap::power(2), kOmega, 4);
  EXPECT_NEAR(std::abs(period2.points[1] - std::conj(kOmega)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(period2.points[2] - kOmega), 0.0, 1e-14);

  const auto escaping = orbit(RationalMap::power(2), 2.0, 50);
  EXPECT_TRUE(escaping.truncated);
  EXPECT_LT(escaping.points.size(), 51u);
}

TEST(RationalMap, PreimageExamples) {
  const auto sq = RationalMap::power(2);
  const auto four = preimages(sq, 4.0);
  ASSERT_EQ(four.size(), 2u);
  EXPECT_TRUE(contains(four, 2.0, 1e-12));
  EXPECT_TRUE(contains(four, -2.0, 1e-12));
  const auto zero = preimages(sq, 0.0);
  ASSERT_EQ(zero.size(), 2u);
  EXPECT_LT(std::abs(zero[0]) + std::abs(zero[1]), 1e-12);

  const Complex c{-0.4, 0.6}, w{0.3, -1.1};
  const auto q = preimages(RationalMap::quadratic(c), w);
  EXPECT_TRUE(contains(q, std::sqrt(w - c), 1e-12));
  EXPECT_TRUE(contains(q, -std::sqrt(w - c), 1e-12));
}

TEST(RationalMap, PreimagesRoundTrip) {
  const RationalMap maps[] = {RationalMap::quadratic({-0.12, 0.74}), newton_like(),
                              RationalMap(Polynomial{0.5, 0.0, 0.0, 1.0}, Polynomial{1.0, 0.0, 0.3}),
                              RationalMap::power(5)};
  const CounterRng rng(11);
  for (const auto& m : maps)
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const Complex w{4.0 * rng.uniform(0, i) - 2.0, 4.0 * rng.uniform(1, i) - 2.0};
      const auto pre = m.preimages(w);
      EXPECT_GE(pre.size(), static_cast<std::size_t>(m.degree() - 1));
      for (std::size_t b = 0; b < pre.size(); ++b) {
        ASSERT_LT(std::abs(m.step(pre[b]) - w), 1e-8) << "w=" << w;
        // The single-branch selector lands on one of the listed preimages.
        EXPECT_TRUE(contains(pre, m.preimage(w, static_cast<std::uint32_t>(b)), 1e-8));
      }
    }
}

TEST(RationalMap, PeriodicPointExamples) {
  const auto fixed = periodic_points(RationalMap::power(2), 1);
  ASSERT_EQ(fixed.size(), 2u);
  EXPECT_TRUE(contains({fixed[0].point, fixed[1].point}, 0.0, 1e-12));
  EXPECT_TRUE(contains({fixed[0].point, fixed[1].point}, 1.0, 1e-12));

  const auto two = periodic_points(RationalMap::power(2), 2);
  ASSERT_EQ(two.size(), 4u);
  std::vector<Complex> pts;
  for (const auto& p : two)
    pts.push_back(p.point);
  for (const Complex want : {Complex(0.0), Complex(1.0), kOmega, std::conj(kOmega)})
    EXPECT_TRUE(contains(pts, want, 1e-10));
}

TEST(RationalMap, PeriodicPointCountsAndLocation) {
  for (int d : {2, 3})
    for (int n = 1; n <= (d == 2 ? 10 : 6); ++n) {
      const auto pts = periodic_points(RationalMap::power(d), n);
      EXPECT_EQ(pts.size(), static_cast<std::size_t>(std::pow(d, n)));
      std::size_t on_circle = 0;
      for (const auto& p : pts)
        if (std::abs(std::abs(p.point) - 1.0) < 1e-8) {
          ++on_circle;
          EXPECT_TRUE(is_repelling(RationalMap::power(d), p.point, n));
        }
      // Everything except the superattracting point 0.
      EXPECT_EQ(on_circle, pts.size() - 1);
    }
}

TEST(RationalMap, PeriodicPointsOfRationalMap) {
  // Fixed points of a degree-2 rational map: d + 1 = 3 on the sphere, none at infinity.
  const auto m = RationalMap(Polynomial{0.0, 0.0, 1.0}, Polynomial{1.0, 0.0, 0.5});
  const auto fixed = periodic_points(m, 1);
  EXPECT_EQ(fixed.size(), 3u);
  for (int n = 2; n <= 5; ++n) {
    const auto pts = periodic_points(m, n);
    EXPECT_EQ(pts.size(), static_cast<std::size_t>(std::pow(2, n)) + 1);
    for (const auto& p : pts)
      EXPECT_LT(std::abs(iterate(m, p.point, n) - p.point), 1e-8 * std::max(1.0, std::abs(p.point)));
  }
}

TEST(RationalMap, Repelling) {
  EXPECT_TRUE(is_repelling(RationalMap::power(2), 1.0, 1));
  EXPECT_FALSE(is_repelling(RationalMap::power(2), 0.0, 1));
  EXPECT_TRUE(is_repelling(RationalMap::power(2), kOmega, 2));
  EXPECT_THROW(is_repelling(RationalMap::power(2), 0.5, 1), InvalidArgument);
}

TEST(RationalMap, ConstructionRejectsDegenerateInput) {
  // (z^2 - 1) / (z - 1) shares the root 1.
  EXPECT_THROW(RationalMap(Polynomial{-1.0, 0.0, 1.0}, Polynomial{-1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(RationalMap(Polynomial{0.0, 1.0}, Polynomial{1.0}), InvalidArgument);
  EXPECT_THROW(RationalMap(Polynomial{1.0, 0.0, 1.0}, Polynomial{}), InvalidArgument);
  EXPECT_THROW(make_complex(NAN, 0.0), InvalidArgument);
}

TEST(RationalMap, PeriodicBudget) {
  EXPECT_THROW(periodic_points(RationalMap::power(2), 30), InvalidArgument);
}

TEST(RationalMap, JsonRoundTrip) {
  const auto m = newton_like();
  const auto back = map_from_json(nlohmann::json::parse(map_to_json(m).dump()));
  EXPECT_EQ(back.numerator().coefficients(), m.numerator().coefficients());
  EXPECT_EQ(back.denominator().coefficients(), m.denominator().coefficients());
  EXPECT_THROW(map_from_json(nlohmann::json::parse(R"({"numerator": [[0,0],[0,0],[1,0]], "denom": [[1,0]]})")),
               InvalidArgument);
}
