#include <gtest/gtest.h>

#include <numbers>

#include "jlab/empirical_measure.hpp"
#include "jlab/julia_sampler.hpp"

using namespace jlab;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

// Haar measure of the circle points within chord distance r of a circle point.
double haar_ball(double r) { return 2.0 * std::asin(r / 2.0) / std::numbers::pi; }

std::vector<Complex> uniform_circle(std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<Complex> pts(n);
  for (std::size_t i = 0; i < n; ++i)
    pts[i] = std::polar(1.0, kTwoPi * rng.uniform(0, i));
  return pts;
}

std::vector<Complex> uniform_disk(std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<Complex> pts(n);
  for (std::size_t i = 0; i < n; ++i)
    pts[i] = std::polar(std::sqrt(rng.uniform(0, i)), kTwoPi * rng.uniform(1, i));
  return pts;
}

double binomial_stderr(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

} // namespace

TEST(EmpiricalMeasure, GridMatchesBruteForce) {
  auto pts = uniform_disk(20000, 1);
  for (int i = 0; i < 200; ++i)
    pts.push_back(pts[static_cast<std::size_t>(i)]);  // duplicates
  const EmpiricalMeasure mu(pts, 0.01);
  const CounterRng rng(2);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Complex z{3.0 * rng.uniform(0, i) - 1.5, 3.0 * rng.uniform(1, i) - 1.5};
    const double r = 0.5 * rng.uniform(2, i);
    ASSERT_EQ(mu.count(z, r), mu.brute_force_count(z, r));
    ASSERT_EQ(mu.count(z, r, true), mu.brute_force_count(z, r, true));
    const double near = std::abs(pts[i] - z);
    ASSERT_EQ(mu.count(z, near), mu.brute_force_count(z, near));
    ASSERT_EQ(mu.count(z, near, true), mu.brute_force_count(z, near, true));
  }
}

TEST(EmpiricalMeasure, OpenAndClosedBallsOnLattice) {
  // 3-4-5 triangles at dyadic scale: distances are exact in binary.
  const double h = 0.015625;
  std::vector<Complex> pts;
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j)
      pts.emplace_back(i * h, j * h);
  const EmpiricalMeasure mu(pts, 0.01);
  const double r = 5 * h;
  // Lattice points at distance exactly 5h: (+-5,0), (0,+-5), (+-3,+-4), (+-4,+-3).
  EXPECT_EQ(mu.count(0.0, r, true) - mu.count(0.0, r), 12u);
  EXPECT_EQ(mu.count(0.0, r), mu.brute_force_count(0.0, r));
  EXPECT_EQ(mu.count(Complex(h, -2 * h), r, true), mu.brute_force_count(Complex(h, -2 * h), r, true));
  EXPECT_EQ(mu.count(0.0, 0.0, true), 1u);
}

TEST(EmpiricalMeasure, MonotoneInRadius) {
  const EmpiricalMeasure mu(uniform_circle(50000, 3), kDefaultSchedule.r_min());
  const auto radii = kDefaultSchedule.radii();
  for (const Complex z : {Complex(1.0), Complex(0.0, 1.0), Complex(0.3, 0.1)})
    for (std::size_t i = 1; i < radii.size(); ++i)
      EXPECT_LE(ball_measure(mu, z, radii[i]), ball_measure(mu, z, radii[i - 1]));
}

TEST(EmpiricalMeasure, Extremes) {
  const EmpiricalMeasure mu(uniform_circle(1000, 3), 0.01);
  EXPECT_EQ(ball_measure(mu, 1.0, 0.0), 0.0);
  EXPECT_EQ(ball_measure(mu, 0.0, 1.5), 1.0);
  EXPECT_THROW(EmpiricalMeasure({}, 0.01), InvalidArgument);
}

TEST(EmpiricalMeasure, HaarBallMatchesArcLength) {
  const std::size_t n = 1000000;
  const EmpiricalMeasure mu(uniform_circle(n, 4), kDefaultSchedule.r_min());
  const double want = haar_ball(0.2);
  EXPECT_NEAR(want, 0.06377, 5e-6);
  EXPECT_NEAR(ball_measure(mu, 1.0, 0.2), want, 3.0 * binomial_stderr(want, n));
}

TEST(EmpiricalMeasure, SquaringSampleBallMatchesArcLength) {
  const std::size_t n = 200000;
  const auto s = inverse_iteration_sample(RationalMap::power(2), n, kDefaultBurnIn, 10);
  const EmpiricalMeasure mu(s.points, kDefaultSchedule.r_min());
  const double want = haar_ball(0.2);
  EXPECT_NEAR(ball_measure(mu, std::polar(1.0, 0.7), 0.2), want, 3.0 * binomial_stderr(want, n));
}

TEST(LocalDimension, CircleIsOneDimensional) {
  const EmpiricalMeasure mu(uniform_circle(1000000, 5), kDefaultSchedule.r_min());
  for (double t : {0.0, 0.21, 0.64}) {
    const auto d = local_dimension(mu, std::polar(1.0, kTwoPi * t), kDefaultSchedule);
    EXPECT_NEAR(d.slope, 1.0, 0.1);
    EXPECT_LE(d.d_lower, d.d_upper);
  }
}

TEST(LocalDimension, DiskIsTwoDimensional) {
  const EmpiricalMeasure mu(uniform_disk(1000000, 6), kDefaultSchedule.r_min());
  for (const Complex z : {Complex(0.0), Complex(0.3, 0.2)})
    EXPECT_NEAR(local_dimension(mu, z, kDefaultSchedule).slope, 2.0, 0.1);
}

TEST(LocalDimension, AtomicSampleHasNoResolution) {
  const EmpiricalMeasure mu(std::vector<Complex>(5000, Complex(0.5)), 0.01);
  EXPECT_TRUE(mu.is_atomic());
  try {
    local_dimension(mu, 0.5, kDefaultSchedule);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient resolution"), std::string::npos);
  }
}

TEST(BirkhoffMeasure, FixedPointIsAtomic) {
  EXPECT_TRUE(birkhoff_measure(RationalMap::power(2), 1.0, 1000).is_atomic());
  EXPECT_THROW(birkhoff_measure(RationalMap::power(2), 1.0, 999), InvalidArgument);
  try {
    birkhoff_measure(RationalMap::power(2), 2.0, 1000);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("orbit left Julia neighborhood"), std::string::npos);
  }
}

TEST(BirkhoffMeasure, TypicalOrbitEquidistributes) {
  // Batch means give a standard error that allows for correlation along the orbit.
  const std::size_t n = 1000000, batches = 20, len = n / batches;
  const auto mu = birkhoff_measure(RationalMap::power(2), std::polar(1.0, 0.123456789), n);
  const Complex probe = std::polar(1.0, 2.0);
  const double r = 0.2;
  std::vector<double> frac(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    std::size_t hits = 0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i)
      hits += std::abs(mu.points()[i] - probe) < r;
    frac[b] = static_cast<double>(hits) / static_cast<double>(len);
  }
  double mean = 0.0, var = 0.0;
  for (double f : frac)
    mean += f / batches;
  for (double f : frac)
    var += (f - mean) * (f - mean) / (batches - 1);
  EXPECT_DOUBLE_EQ(mean, ball_measure(mu, probe, r));
  EXPECT_NEAR(mean, haar_ball(r), 3.0 * std::sqrt(var / batches));
}

TEST(WeakRegularity, HaarHasNoViolations) {
  const EmpiricalMeasure mu(uniform_circle(1000000, 7), kDefaultSchedule.r_min());
  const auto probes = uniform_circle(50, 8);
  const auto rep = check_weak_diametric_regularity(mu, probes, 4, 12);
  std::size_t checked = 0;
  for (const auto& s : rep.by_scale) {
    EXPECT_EQ(s.violations, 0u) << "n=" << s.n;
    checked += s.checked;
  }
  EXPECT_GT(checked, 400u);
  EXPECT_TRUE(rep.degenerate_probes.empty());
}

TEST(WeakRegularity, CountsMatchBruteForce) {
  const EmpiricalMeasure mu(uniform_circle(20000, 9), 0.01);
  const auto probes = uniform_circle(5, 10);
  for (const auto& e : check_weak_diametric_regularity(mu, probes, 2, 8).entries) {
    EXPECT_EQ(e.outer, mu.brute_force_count(probes[e.probe], std::ldexp(1.0, -e.n)));
    EXPECT_EQ(e.inner, mu.brute_force_count(probes[e.probe], std::ldexp(1.0, -(e.n + 1))));
    if (e.inner < kMinBallCount)
      EXPECT_EQ(e.status, RegularityStatus::InsufficientData);
    else
      EXPECT_EQ(e.status, e.outer <= static_cast<std::size_t>(e.n * e.n) * e.inner ? RegularityStatus::Pass
                                                                                   : RegularityStatus::Violation);
  }
}

TEST(WeakRegularity, AtomIsFlaggedDegenerate) {
  // Haar mass away from 1 plus an atom at 1: the atom's balls never change.
  std::vector<Complex> pts;
  for (const auto& z : uniform_circle(100000, 11))
    if (std::abs(z - 1.0) > 0.1)
      pts.push_back(z);
  pts.insert(pts.end(), 10000, Complex(1.0));
  const EmpiricalMeasure mu(pts, 0.01);
  const std::vector<Complex> probes{Complex(1.0), std::polar(1.0, 2.5)};
  const auto rep = check_weak_diametric_regularity(mu, probes, 4, 12);
  EXPECT_EQ(rep.degenerate_probes, std::vector<std::size_t>{0});
  for (const auto& e : rep.entries)
    EXPECT_NE(e.status, RegularityStatus::Violation);
}

TEST(WeakRegularity, ConcentratedMassViolates) {
  // A dense cluster just inside the outer ball but outside the inner one.
  std::vector<Complex> pts(31, Complex(0.0));
  pts.insert(pts.end(), 100000, Complex(0.2));
  const EmpiricalMeasure mu(pts, 0.01);
  const std::vector<Complex> probes{Complex(0.0)};
  const auto rep = check_weak_diametric_regularity(mu, probes, 2, 2);  // radii 1/4 and 1/8
  ASSERT_EQ(rep.entries.size(), 1u);
  EXPECT_EQ(rep.entries[0].status, RegularityStatus::Violation);
}

TEST(RegularRadius, ThinAnnulusOnHaar) {
  const EmpiricalMeasure mu(uniform_circle(1000000, 12), kDefaultSchedule.r_min());
  const double r = 0.1;
  for (int depth : {1, 3, 5}) {
    const auto rr = find_regular_radius(mu, 1.0, r, depth);
    EXPECT_GT(rr.rho, r);
    EXPECT_LT(rr.rho, 2.0 * r);
    EXPECT_DOUBLE_EQ(rr.halfwidth, r / std::pow(4.0, depth + 1));
    EXPECT_LE(static_cast<double>(rr.annulus_count), std::ldexp(static_cast<double>(rr.ball_count), -depth));
    EXPECT_EQ(rr.annulus_count, mu.brute_force_count(1.0, rr.rho + rr.halfwidth) -
                                    mu.brute_force_count(1.0, rr.rho - rr.halfwidth, true));
  }
}

TEST(RegularRadius, EmptyNeighbourhood) {
  const EmpiricalMeasure mu(uniform_circle(1000, 13), 0.01);
  const auto rr = find_regular_radius(mu, Complex(5.0), 0.1, 4);
  EXPECT_GT(rr.rho, 0.1);
  EXPECT_LT(rr.rho, 0.2);
  EXPECT_EQ(rr.annulus_count, 0u);
  EXPECT_EQ(rr.ball_count, 0u);
}

TEST(RegularRadius, AvoidsRingOfAtoms) {
  const double r = 0.1;
  std::vector<Complex> pts;
  for (int i = 0; i < 1000; ++i)
    pts.push_back(std::polar(1.5 * r, kTwoPi * i / 1000.0));
  const EmpiricalMeasure mu(pts, 0.01);
  for (int depth : {1, 2, 4}) {
    const auto rr = find_regular_radius(mu, 0.0, r, depth);
    EXPECT_GE(std::abs(rr.rho - 1.5 * r), rr.halfwidth);
    EXPECT_EQ(rr.annulus_count, 0u);
  }
}
