#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "infinimix/errors.hpp"
#include "infinimix/observables.hpp"
#include "infinimix/quadrature.hpp"

using namespace infinimix;

TEST(Sign, Values) {
  const auto F = makeSign();
  EXPECT_EQ(F(3.2), 1.0);
  EXPECT_EQ(F(-0.1), -1.0);
  EXPECT_EQ(F(0.0), 0.0);
  EXPECT_TRUE(F.tags.oddSymmetric);
  EXPECT_EQ(F.boundNorm, 1.0);
}

TEST(Periodic, Values) {
  EXPECT_NEAR(makeCosine(1)(2.25), 0.0, 1e-15);
  EXPECT_EQ(makeHalfCell(1)(7.3), 1.0);
  EXPECT_EQ(makeHalfCell(2)(3.5), 0.0);
  const auto F = makePeriodic(2, [](double x) { return x < 1 ? 1.0 : 0.0; }, 1.0, {1.0}, true);
  EXPECT_EQ(F(3.5), 0.0);
  EXPECT_EQ(F(-1.5), 1.0);
  ASSERT_TRUE(F.tags.periodic);
  EXPECT_EQ(*F.tags.periodic, 2);
}

TEST(GlobalProperties, BoundAndTags) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1000, 1000);
  const std::vector<GlobalObservable> all{makeSign(), makeOne(), makeCosine(1), makeCosine(3), makeHalfCell(1),
                                          makeCellPattern({Rational(1), Rational(-2), Rational(1, 2)}),
                                          makeDyadicFlip(), makeCells(-2, {Rational(3), Rational(-1)})};
  for (const auto& F : all) {
    for (int i = 0; i < 100000; ++i) {
      const double x = u(rng);
      const double v = F(x);
      ASSERT_LE(std::abs(v), F.boundNorm) << F.id;
      if (F.tags.periodic) ASSERT_NEAR(F(x + *F.tags.periodic), v, 1e-12) << F.id;
      if (F.tags.oddSymmetric) ASSERT_NEAR(F(-x), -v, 1e-12) << F.id;
    }
  }
}

TEST(GlobalProperties, Linearity) {
  const auto F = makeCosine(1);
  const auto G = makeSign();
  const auto H = add(scale(F, 2.5), scale(G, -0.75));
  for (int i = 0; i < 1000; ++i) {
    const double x = -50 + 0.1 * i;
    EXPECT_NEAR(H(x), 2.5 * F(x) - 0.75 * G(x), 1e-12);
  }
  EXPECT_GE(H.boundNorm, 3.25 - 1e-12);
}

TEST(Indicator, RawUnitCell) {
  const auto g = makeIndicatorDensity(0, 1, false);
  EXPECT_NEAR(g.integral, 1.0, 1e-12);
  ASSERT_TRUE(g.latticeForm);
  EXPECT_EQ(g.latticeForm->mass(0), Rational(1));
  EXPECT_EQ(g.latticeForm->total(), Rational(1));
}

TEST(Indicator, Normalized) {
  const auto g = makeIndicatorDensity(-1, 1, true);
  EXPECT_NEAR(g.integral, 1.0, 1e-12);
  EXPECT_EQ(g(-1.0), 0.5);
  EXPECT_EQ(g(0.99), 0.5);
  EXPECT_EQ(g(1.0), 0.0);
}

TEST(Indicator, NonIntegerEndsHaveNoLatticeForm) {
  EXPECT_FALSE(makeIndicatorDensity(0, 0.5, false).latticeForm);
}

TEST(Indicator, AlgebraCancels) {
  const auto d = add(makeIndicatorDensity(0, 2, false), scale(makeIndicatorDensity(1, 3, false), -1));
  EXPECT_NEAR(d.integral, 0.0, 1e-12);
  ASSERT_TRUE(d.latticeForm);
  EXPECT_EQ(d.latticeForm->mass(0), Rational(1));
  EXPECT_EQ(d.latticeForm->mass(1), Rational(0));
  EXPECT_EQ(d.latticeForm->mass(2), Rational(-1));
  EXPECT_THROW(normalized(d), Error);
}

TEST(LocalProperties, IntegralMatchesQuadratureAndLattice) {
  const std::vector<LocalObservable> all{makeIndicatorDensity(-2, 3, false), makeIndicatorDensity(0.25, 1.75, true),
                                         makeTriangular(0, 0.5, 1.5), makeGaussBump(1.0, 0.3),
                                         makeLatticeDensity(LatticeMeasure::fromMasses(-1, {Rational(2), Rational(-1, 3)}))};
  for (const auto& g : all) {
    const auto q = integrate([&](double x) { return g(x); }, g.support.lo, g.support.hi, g.breakpoints);
    EXPECT_NEAR(q.value, g.integral, 1e-10) << g.id;
    EXPECT_EQ(g(g.support.hi + 0.5), 0.0);
    EXPECT_EQ(g(g.support.lo - 0.5), 0.0);
    if (g.latticeForm) EXPECT_NEAR(g.latticeForm->total().get_d(), g.integral, 1e-15) << g.id;
  }
}

TEST(LocalProperties, GaussSupportIsEightWidths) {
  const auto g = makeGaussBump(2.0, 0.5);
  EXPECT_NEAR(g.support.lo, -2.0, 1e-12);
  EXPECT_NEAR(g.support.hi, 6.0, 1e-12);
  EXPECT_NEAR(g.integral, 1.0, 1e-12);
}

TEST(Projection, Examples) {
  const auto c = projectToLattice(makeCosine(1));
  const auto s = projectToLattice(makeSign());
  const auto h = projectToLattice(makeHalfCell(1));
  for (long j = -20; j <= 20; ++j) {
    EXPECT_NEAR(c.cellValue(j), 0.0, 1e-10);
    EXPECT_EQ(s.cellValue(j), j >= 0 ? 1.0 : -1.0);
    EXPECT_NEAR(h.cellValue(j), 0.5, 1e-10);
  }
}

TEST(Projection, IdempotentOnLatticeStep) {
  const auto F = makeCellPattern({Rational(1), Rational(-1, 3)});
  const auto P = projectToLattice(F);
  const auto PP = projectToLattice(P);
  for (long j = -10; j < 10; ++j) {
    EXPECT_EQ(P.cellValue(j), F.cellValue(j));
    EXPECT_EQ(PP.cellValue(j), P.cellValue(j));
  }
}

TEST(Projection, ContractionProperty) {
  const auto F = add(makeCosine(3), scale(makeSign(), 0.5));
  const auto P = projectToLattice(F);
  for (long j = -30; j < 30; ++j) EXPECT_LE(std::abs(P.cellValue(j)), F.boundNorm + 1e-12);
}

TEST(Projection, ConcurrentReadersSeeOneValue) {
  const auto P = projectToLattice(makeCosine(7));
  std::vector<std::vector<double>> seen(8);
  std::vector<std::thread> pool;
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] {
      for (long j = -200; j < 200; ++j) seen[t].push_back(P.cellValue((j * (t + 1)) % 200));
    });
  }
  for (auto& th : pool) th.join();
  for (int t = 0; t < 8; ++t) {
    for (long j = -200; j < 200; ++j) {
      EXPECT_EQ(seen[t][j + 200], P.cellValue((j * (t + 1)) % 200));
    }
  }
}

TEST(Cesaro, Examples) {
  const std::vector<long> grid{0, -10, 10, -100, 100};
  const auto one = cesaroMean(makeOne(), grid, 7);
  EXPECT_NEAR(one.value, 1.0, 1e-12);
  EXPECT_NEAR(one.uniformityDefect, 0.0, 1e-12);
  const auto cos = cesaroMean(makeCosine(1), grid, 20);
  EXPECT_NEAR(cos.value, 0.0, 1e-10);
  EXPECT_NEAR(cos.uniformityDefect, 0.0, 1e-10);
  EXPECT_GE(cesaroMean(makeSign(), grid, 100).uniformityDefect, 0.9);
}

TEST(Cesaro, PatternMean) {
  const auto r = cesaroMean(makeCellPattern({Rational(1), Rational(-1), Rational(2), Rational(0)}), {0, 7, -13}, 400);
  EXPECT_NEAR(r.value, 0.5, 1e-12);
  EXPECT_NEAR(r.uniformityDefect, 0.0, 1e-12);
}

TEST(Sampler, DrawsFromAbsoluteDensity) {
  const auto g = add(makeIndicatorDensity(0, 1, false), scale(makeIndicatorDensity(1, 3, false), -0.5));
  AbsDensitySampler s(g);
  std::mt19937_64 rng(3);
  int neg = 0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const auto [x, sign] = s.draw(rng);
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 3.0);
    ASSERT_EQ(sign, x < 1 ? 1.0 : -1.0);
    neg += sign < 0;
  }
  // |g| has mass 1 on [0, 1) and 1 on [1, 3).
  EXPECT_NEAR(static_cast<double>(neg) / N, 0.5, 0.005);
}
