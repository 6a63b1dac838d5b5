#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "infinimix/composed.hpp"
#include "infinimix/errors.hpp"
#include "infinimix/partition.hpp"
#include "infinimix/quadrature.hpp"

using namespace infinimix;

TEST(Quadrature, PolynomialsAreExact) {
  const auto r = integrate([](double x) { return 3 * x * x - 2 * x + 1; }, -1.0, 2.0);
  EXPECT_NEAR(r.value, 9.0 - 3.0 + 3.0, 1e-12);
}

TEST(Quadrature, Oscillatory) {
  const auto r = integrate([](double x) { return std::sin(40 * x); }, 0.0, std::numbers::pi / 2);
  EXPECT_NEAR(r.value, (1 - std::cos(20 * std::numbers::pi)) / 40, 1e-10);
}

TEST(Quadrature, StepWithBreaks) {
  const double br[] = {0.3};
  const auto r = integrate([](double x) { return x < 0.3 ? 1.0 : -2.0; }, 0.0, 1.0, br);
  EXPECT_NEAR(r.value, 0.3 - 1.4, 1e-13);
}

TEST(Quadrature, BudgetExceededIsAnError) {
  QuadratureOptions opts;
  opts.budget = 100;
  opts.absTol = 1e-14;
  try {
    integrate([](double x) { return std::sin(1 / (x + 1e-6)); }, 0.0, 1.0, {}, opts);
    FAIL() << "expected QuadratureBudget";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::QuadratureBudget);
  }
}

TEST(Quadrature, CutPoints) {
  const double br[] = {0.5, 0.5, 2.5, -3.0};
  const auto c = cutPoints(0.0, 3.0, br, 1.0);
  ASSERT_GE(c.size(), 5u);
  EXPECT_EQ(c.front(), 0.0);
  EXPECT_EQ(c.back(), 3.0);
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
  EXPECT_EQ(std::adjacent_find(c.begin(), c.end()), c.end());
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LE(c[i] - c[i - 1], 1.0 + 1e-15);
}

TEST(Intervals, UnionAlgebra) {
  IntervalUnion a{{0, 2, true}, {1, 3, true}, {5, 6, true}};
  a = normalizeUnion(a);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_DOUBLE_EQ(measureOf(a), 4.0);
  IntervalUnion b{{2.5, 5.5, true}};
  EXPECT_DOUBLE_EQ(measureOf(intersectUnions(a, b)), 1.0);
  EXPECT_DOUBLE_EQ(symmetricDifferenceMeasure(a, b), 4.0 + 3.0 - 2.0);
}

TEST(Pullback, RandomWalkPreservesMeasure) {
  auto T = makeRandomWalkMap(-1, 2);
  for (long n : {1L, 2L, 5L}) {
    const auto pre = pullback(*T, {{-3.25, 4.5, true}}, n);
    EXPECT_NEAR(measureOf(pre), 7.75, 1e-9) << n;
  }
}

TEST(Pullback, MembershipMatchesForwardMap) {
  std::mt19937_64 rng(17);
  for (const auto& T : {makeBoole(), makeRandomWalkMap(-1, 2)}) {
    const IntervalUnion v{{-4, 4, true}};
    const auto pre = pullback(*T, v, 2);
    std::uniform_real_distribution<double> u(-30, 30);
    for (int i = 0; i < 5000; ++i) {
      const double x = u(rng);
      const double y = iterate(*T, x, 2);
      bool inPre = false;
      for (const auto& iv : pre) inPre = inPre || iv.contains(x);
      EXPECT_EQ(inPre, y >= -4 && y < 4) << T->id() << " x=" << x;
    }
    EXPECT_NEAR(measureOf(pre), 8.0, 1e-9) << T->id();
  }
}

TEST(MonotonePieces, RandomWalkHasPowerOfThreePieces) {
  auto T = makeRandomWalkMap(-1, 2);
  for (long n = 0; n <= 6; ++n) {
    double covered = 0;
    const auto count = forEachMonotonePiece(*T, 0.0, 1.0, n, [&](const MonotonePiece& p) {
      covered += p.xhi - p.xlo;
      EXPECT_NEAR(p.toY(*T, 0.5 * (p.xlo + p.xhi)), iterate(*T, 0.5 * (p.xlo + p.xhi), n), 1e-9);
    });
    // The first step is a single branch on the unit cell.
    EXPECT_EQ(count, static_cast<std::size_t>(std::pow(3, std::max(n - 1, 0L))));
    EXPECT_NEAR(covered, 1.0, 1e-12);
  }
}

TEST(MonotonePieces, BooleTwoPiecesPerLevel) {
  auto T = makeBoole();
  const auto count = forEachMonotonePiece(*T, 0.5, 2.0, 1, [](const MonotonePiece& p) { EXPECT_TRUE(p.increasing); });
  EXPECT_EQ(count, 1u);
}

// Measure of [0, 1/2) intersected with the preimage under 3x mod 1 of [0, 1/2),
// counted in units of 1 / (2 * 3^n): the preimage is the union of [2m, 2m+1).
double halfcellOracle(long n) {
  long p = 1;
  for (long i = 0; i < n; ++i) p *= 3;
  long count = 0;
  for (long m = 0; 2 * m < p; ++m) count += std::min(2 * m + 1, p) - 2 * m;
  return static_cast<double>(count) / (2.0 * static_cast<double>(p));
}

TEST(Composed, HalfcellMatchesIntervalOracle) {
  auto T = makeRandomWalkMap(-1, 2);
  const auto F = makeHalfCell(1);
  const auto g = scale(makeIndicatorDensity(0, 0.5, false), 2.0);
  for (long n = 0; n <= 8; ++n) {
    const auto r = integrateComposed(*T, F, n, g);
    EXPECT_NEAR(r.value, 2 * halfcellOracle(n), r.errorBound + 1e-15) << n;
  }
}

TEST(Composed, ConstantObservableGivesMass) {
  const auto g = makeGaussBump(0.3, 0.7);
  for (const auto& T : {makeBoole(), makeRandomWalkMap(-1, 2)}) {
    for (long n : {0L, 3L, 6L}) {
      const auto r = integrateComposed(*T, makeOne(), n, g);
      EXPECT_NEAR(r.value, g.integral, 1e-9) << T->id() << " n=" << n;
    }
  }
}

TEST(Composed, CosineAgainstSampling) {
  auto T = makeRandomWalkMap(-1, 2);
  const auto F = makeCosine(1);
  const auto g = makeTriangular(0.0, 0.5, 1.5);
  // Midpoint rule on a fine grid for n = 2 (the integrand is smooth on 1/9 cells).
  double ref = 0;
  const int N = 9 * 20000;
  for (int i = 0; i < N; ++i) {
    const double x = 1.5 * (i + 0.5) / N;
    ref += F(iterate(*T, x, 2)) * g(x) * 1.5 / N;
  }
  const auto r = integrateComposed(*T, F, 2, g);
  EXPECT_NEAR(r.value, ref, 1e-6);
}
