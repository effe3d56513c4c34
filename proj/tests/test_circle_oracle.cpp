#include <gtest/gtest.h>

#include <numbers>

#include "jlab/circle_oracle.hpp"

using namespace jlab;

TEST(CircleOracle, Steps) {
  EXPECT_EQ(oracle_step(RationalAngle(1, 3), 2), RationalAngle(2, 3));
  const RationalAngle a(2, 7);
  const auto b = oracle_step(a, 2);
  const auto c = oracle_step(b, 2);
  EXPECT_EQ(b, RationalAngle(4, 7));
  EXPECT_EQ(c, RationalAngle(1, 7));
  EXPECT_EQ(oracle_step(c, 2), a);
  EXPECT_EQ(RationalAngle(-1, 4), RationalAngle(3, 4));
  EXPECT_EQ(RationalAngle(6, 8).q(), 4);
}

TEST(CircleOracle, ReturnTimeExamples) {
  const BigRational hw(1, 100);
  EXPECT_EQ(oracle_return_time(RationalAngle(1, 3), 2, hw, 100), ReturnTime::finite(2));
  EXPECT_EQ(oracle_return_time(RationalAngle(0, 1), 2, hw, 100), ReturnTime::finite(1));
  EXPECT_EQ(oracle_return_time(RationalAngle(1, 7), 2, hw, 100), ReturnTime::finite(3));
  // 1/2 maps to the fixed point 0 and never comes back.
  EXPECT_FALSE(oracle_return_time(RationalAngle(1, 2), 2, hw, 1000).found());
}

TEST(CircleOracle, ArcMeasure) {
  EXPECT_EQ(oracle_arc_measure(Arc(RationalAngle(0, 1), BigRational(1, 4))), BigRational(1, 2));
  const BigRational eps(1, 1000000);
  EXPECT_EQ(oracle_arc_measure(Arc(RationalAngle(1, 3), BigRational(1, 2) - eps)), 1 - 2 * eps);
  EXPECT_NEAR(chord_ball_measure(0.2), 0.06377, 5e-6);
  EXPECT_THROW(Arc(RationalAngle(0, 1), BigRational(1, 2)), InvalidArgument);
  EXPECT_THROW(Arc(RationalAngle(0, 1), BigRational(0)), InvalidArgument);
}

TEST(CircleOracle, CycleDetection) {
  using P = std::pair<std::uint64_t, std::uint64_t>;
  EXPECT_EQ(oracle_cycle(RationalAngle(1, 3), 2), (P{0, 2}));
  EXPECT_EQ(oracle_cycle(RationalAngle(1, 7), 2), (P{0, 3}));
  EXPECT_EQ(oracle_cycle(RationalAngle(1, 6), 2), (P{1, 2}));
  EXPECT_EQ(oracle_cycle(RationalAngle(1, 12), 2), (P{2, 2}));
  EXPECT_EQ(oracle_cycle(RationalAngle(1, BigInt(1) << 20), 2), (P{20, 1}));
  // Multiplicative order of 2 mod 1023 is 10; mod 2^10 * 1023 adds a preperiod of 10.
  EXPECT_EQ(oracle_cycle(RationalAngle(1, BigInt(1023) << 10), 2), (P{10, 10}));
  EXPECT_EQ(oracle_cycle(RationalAngle(1, 13), 3), (P{0, 3}));
}

TEST(CircleOracle, ExactRational) {
  EXPECT_EQ(exact_rational(0.5), BigRational(1, 2));
  EXPECT_EQ(exact_rational(-3.0), BigRational(-3));
  EXPECT_EQ(exact_rational(0.1), BigRational(BigInt("3602879701896397"), BigInt("36028797018963968")));
  for (double x : {0.1, 1e-300, 123456.789, -2.5e-7})
    EXPECT_EQ(exact_rational(x).convert_to<double>(), x);
  EXPECT_THROW(exact_rational(INFINITY), InvalidArgument);
}

TEST(CircleOracle, AgreesWithFloatingPointWithinHorizon) {
  // The rounded circle orbit shadows the exact one for about 30 doublings.
  const auto sq = RationalMap::power(2);
  const CounterRng rng(21);
  const auto radii = kDefaultSchedule.radii();
  std::size_t compared = 0, mismatches = 0;
  for (std::uint64_t i = 0; i < 300; ++i) {
    const double t = rng.uniform(0, i);
    const RationalAngle theta(exact_rational(t));
    const Complex z = theta.to_complex();
    for (double r : radii) {
      const auto exact = oracle_return_time(theta, 2, exact_rational(chord_to_halfwidth(r)), 30);
      if (!exact.found())
        continue;
      ++compared;
      mismatches += return_time(sq, z, z, r, 30) != exact;
    }
  }
  EXPECT_GT(compared, 500u);
  EXPECT_LE(mismatches, compared / 50);
}
