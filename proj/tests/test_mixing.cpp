#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "infinimix/errors.hpp"
#include "infinimix/mixing.hpp"

using namespace infinimix;

namespace {

std::vector<long> range(long a, long b, long step = 1) {
  std::vector<long> out;
  for (long n = a; n <= b; n += step) out.push_back(n);
  return out;
}

CorrelateOptions with(CorrelationMethod m, long samples = 200000) {
  CorrelateOptions o;
  o.method = m;
  o.mc.samples = samples;
  return o;
}

// mu([0, 1/2) and (3x mod 1)^-n [0, 1/2)) in units of 1 / (2 * 3^n).
Rational halfcellOracle(long n) {
  Integer p = 1;
  for (long i = 0; i < n; ++i) p *= 3;
  Integer count = 0;
  for (Integer m = 0; 2 * m < p; ++m) count += (2 * m + 1 <= p ? Integer(1) : Integer(p - 2 * m));
  return Rational(count, 2 * p);
}

}  // namespace

TEST(Correlate, BooleSignOddSymmetry) {
  const auto s = correlate(makeBoole(), makeSign(), makeIndicatorDensity(-1, 1, true), range(0, 10),
                           with(CorrelationMethod::Quadrature));
  for (std::size_t i = 0; i < s.nValues.size(); ++i) {
    EXPECT_LE(std::abs(s.estimates[i]), std::max(1e-8, s.errorBounds[i])) << s.nValues[i];
  }
}

TEST(Correlate, ConstantObservableGivesMass) {
  const auto g = makeLatticeDensity(LatticeMeasure::fromMasses(-2, {Rational(1, 3), Rational(5, 7)}));
  const auto s = correlate(makeRandomWalkMap(-1, 2), makeOne(), g, range(0, 30));
  EXPECT_EQ(s.method, CorrelationMethod::ExactLattice);
  for (const auto& e : s.exact) EXPECT_EQ(*e, g.latticeForm->total());
  const auto b = correlate(makeBoole(), makeOne(), makeGaussBump(0.5, 1), {0, 2, 5});
  for (double v : b.estimates) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(Correlate, HalfcellMatchesIntervalOracle) {
  const auto g = scale(makeIndicatorDensity(0, 0.5, false), 2.0);
  const auto s = correlate(makeRandomWalkMap(-1, 2), makeHalfCell(1), g, range(0, 12));
  EXPECT_EQ(s.method, CorrelationMethod::Quadrature);
  for (std::size_t i = 0; i < s.nValues.size(); ++i) {
    const double truth = Rational(2 * halfcellOracle(s.nValues[i])).get_d();
    EXPECT_NEAR(s.estimates[i], truth, s.errorBounds[i] + 1e-15) << s.nValues[i];
  }
  EXPECT_NEAR(s.estimates.back(), 0.5, 1e-5);
}

TEST(Correlate, MethodMismatch) {
  try {
    correlate(makeBoole(), makeSign(), makeIndicatorDensity(0, 1, false), {1}, with(CorrelationMethod::ExactLattice));
    FAIL() << "expected MethodMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MethodMismatch);
  }
  EXPECT_THROW(correlate(makeRandomWalkMap(-1, 2), makeSign(), makeGaussBump(0, 1), {1},
                         with(CorrelationMethod::ExactLattice)),
               Error);
}

TEST(Correlate, ResolveMethod) {
  auto rw = makeRandomWalkMap(-1, 2);
  CorrelateOptions o;
  EXPECT_EQ(resolveMethod(*rw, makeIndicatorDensity(0, 1, false), 100, o), CorrelationMethod::ExactLattice);
  EXPECT_EQ(resolveMethod(*rw, makeGaussBump(0, 1), 10, o), CorrelationMethod::Quadrature);
  EXPECT_EQ(resolveMethod(*makeBoole(), makeGaussBump(0, 1), 40, o), CorrelationMethod::MonteCarlo);
}

TEST(Correlate, MonteCarloIsReproducibleAcrossThreadCounts) {
  auto o1 = with(CorrelationMethod::MonteCarlo, 100000);
  o1.mc.threads = 1;
  auto o4 = o1;
  o4.mc.threads = 4;
  const auto g = makeIndicatorDensity(0, 2, true);
  const auto a = correlate(makeBoole(), makeSign(), g, {0, 3, 7}, o1);
  const auto b = correlate(makeBoole(), makeSign(), g, {0, 3, 7}, o4);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_EQ(a.errorBounds, b.errorBounds);
  ASSERT_TRUE(a.seed);
  EXPECT_EQ(*a.seed, o1.mc.seed);
}

TEST(Correlate, CsvColumns) {
  const auto s = correlate(makeRandomWalkMap(-1, 2), makeSign(), makeIndicatorDensity(0, 1, false), {0, 1});
  const auto csv = s.toCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,estimate,error_bound,method");
  EXPECT_EQ(s.toJson().at("series").size(), 2u);
}

// Two routes: <E(F|cells), P^n g> against simulated orbits.
TEST(Properties, TwoRouteAgreement) {
  auto T = makeRandomWalkMap(-1, 2);
  std::mt19937_64 rng(101);
  const std::vector<GlobalObservable> fs{makeSign(), makeHalfCell(1), makeCosine(1),
                                         makeCells(-1, {Rational(2), Rational(-1), Rational(1, 2)})};
  int agree = 0;
  int total = 0;
  for (const auto& F : fs) {
    const auto g = makeLatticeDensity(LatticeMeasure::fromMasses(static_cast<long>(rng() % 5) - 2,
                                                                 {Rational(1), Rational(static_cast<long>(rng() % 3))}));
    const std::vector<long> ns{0, 1, 7, 20, 60};
    const auto ex = correlate(T, F, g, ns, with(CorrelationMethod::ExactLattice));
    auto mo = with(CorrelationMethod::MonteCarlo, 200000);
    mo.mc.seed = rng();
    const auto mc = correlate(T, F, g, ns, mo);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      agree += std::abs(ex.estimates[i] - mc.estimates[i]) <= mc.errorBounds[i] + ex.errorBounds[i];
      ++total;
    }
  }
  // 3 standard errors: expect at most an occasional miss.
  EXPECT_GE(agree, total - 1);
}

TEST(Properties, Glm1Bound) {
  auto T = makeRandomWalkMap(-1, 2);
  TransferEngine e(T, TransferMode::ExactLattice);
  const auto g = makeLatticeDensity(LatticeMeasure::fromMasses(-1, {Rational(1), Rational(-3), Rational(2)}));
  const auto ns = range(0, 150, 5);
  const auto lin = linNorm(e, g, ns);
  for (const auto& F : {makeSign(), makeCellPattern({Rational(1), Rational(-1, 2)}), makeDyadicFlip()}) {
    const auto s = correlate(T, F, g, ns);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      ASSERT_TRUE(s.exact[i]);
      EXPECT_LE(abs(*s.exact[i]), Rational(F.boundNorm) * *lin.points[i].exact) << F.id << " n=" << ns[i];
    }
  }
}

TEST(Properties, RhoShiftCovariance) {
  auto T = makeRandomWalkMap(-1, 2);
  const auto F = makeCellPattern({Rational(1), Rational(0), Rational(0)});
  const std::vector<LocalObservable> gs{makeIndicatorDensity(0, 1, false), makeIndicatorDensity(3, 5, true)};
  const auto ns = range(0, 300, 10);
  const auto base = estimateRho(T, F, gs, ns);
  for (double c : {-2.0, 0.5, 3.0}) {
    const auto shifted = estimateRho(T, add(F, makeConstant(c)), gs, ns);
    EXPECT_NEAR(shifted.rhoHat, base.rhoHat + c, 1e-9) << c;
  }
}

TEST(Properties, LlmSymmetryForSymmetricWalk) {
  auto T = makeRandomWalkMap(-1, 2);
  for (long j = 1; j <= 4; ++j) {
    const auto fPlus = asGlobal(makeIndicatorDensity(static_cast<double>(j), static_cast<double>(j + 1), false));
    const auto fMinus = asGlobal(makeIndicatorDensity(static_cast<double>(-j), static_cast<double>(-j + 1), false));
    const auto g = makeIndicatorDensity(0, 1, false);
    const auto a = correlate(T, fPlus, g, range(0, 60, 3));
    const auto b = correlate(T, fMinus, g, range(0, 60, 3));
    for (std::size_t i = 0; i < a.exact.size(); ++i) EXPECT_EQ(*a.exact[i], *b.exact[i]);
  }
}

TEST(Glm, ConstantPasses) {
  const std::vector<LocalObservable> gs{makeIndicatorDensity(0, 1, false), makeGaussBump(3, 1)};
  const auto r = glmVerdict(makeRandomWalkMap(-1, 2), makeOne(), gs, 1.0, range(0, 12), 1e-6);
  EXPECT_EQ(r.glm2, Verdict::Pass);
  for (const auto& d : r.densities) EXPECT_NEAR(d.tail.max, 0.0, 1e-9);
}

TEST(Glm, CosineDeviationsVanish) {
  const std::vector<LocalObservable> gs{makeIndicatorDensity(0, 1, false), makeTriangular(0, 0.75, 1.5)};
  const auto r = glmVerdict(makeRandomWalkMap(-1, 2), makeCosine(1), gs, 0.0, range(0, 12), 1e-3);
  EXPECT_EQ(r.glm2, Verdict::Pass);
  // The unit cell sees whole periods of cos(2 pi 3^n x).
  for (double v : r.densities[0].series.estimates) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(Glm, MeanZeroBranch) {
  auto T = makeRandomWalkMap(-1, 2);
  const auto dipole = makeLatticeDensity(LatticeMeasure::fromMasses(0, {Rational(1), Rational(-1)}));
  const auto r = glmVerdict(T, makeSign(), {dipole}, 0.0, range(0, 900, 30), 0.2);
  EXPECT_EQ(r.glm2, Verdict::Pass);
  const auto lin = linNorm(TransferEngine(T, TransferMode::ExactLattice), dipole, range(0, 900, 30));
  for (std::size_t i = 0; i < lin.points.size(); ++i) {
    EXPECT_LE(std::abs(r.densities[0].series.estimates[i]), lin.points[i].norm + 1e-15);
  }
}

TEST(Glm, DictionaryIsNamed) {
  const auto dict = glm3Dictionary();
  EXPECT_EQ(dict.size(), 15u);
  const auto r = glmVerdict(makeRandomWalkMap(-1, 2), makeOne(), dict, 1.0, {0, 5}, 1e-6, {}, kGlm3DictionaryName);
  EXPECT_EQ(r.toJson().at("dictionary"), kGlm3DictionaryName);
  EXPECT_NEAR(r.glm3Index, 0.0, 1e-9);
}

TEST(Llm, ExactLocalProbabilities) {
  auto T = makeRandomWalkMap(-1, 2);
  const auto cell = makeIndicatorDensity(0, 1, false);
  const auto r = llmVerdict(T, cell, cell, {2}, 0.5);
  ASSERT_TRUE(r.series.exact[0]);
  EXPECT_EQ(*r.series.exact[0], Rational(1, 3));
}

TEST(Llm, LocalLimitConstant) {
  auto T = makeRandomWalkMap(-1, 2);
  const auto cell = makeIndicatorDensity(0, 1, false);
  const auto r = llmVerdict(T, cell, cell, {1000}, 0.02);
  const double scaled = r.series.estimates[0] * std::sqrt(1000.0);
  EXPECT_NEAR(scaled, 1 / std::sqrt(4 * std::numbers::pi / 3), 0.01);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(Llm, FarSupportsAreExactlyZero) {
  const auto r = llmVerdict(makeRandomWalkMap(-1, 2), makeIndicatorDensity(0, 1, false),
                            makeIndicatorDensity(40, 41, false), {1}, 1e-12);
  EXPECT_EQ(*r.series.exact[0], Rational(0));
}

TEST(Ggm, ConstantGrid) {
  ExhaustiveFamily fam;
  fam.scaleLadder = {4, 8, 16, 32};
  const auto g = ggmGrid(makeRandomWalkMap(-1, 2), makeOne(), makeOne(), fam, {0, 2, 4});
  EXPECT_NEAR(g.target, 1.0, 1e-12);
  for (const auto& row : g.cells) {
    for (const auto& c : row) EXPECT_NEAR(*c.value, 1.0, 1e-9);
  }
}

TEST(Ggm, CosineFirstColumnVanishes) {
  ExhaustiveFamily fam;
  fam.scaleLadder = {1, 5, 20, 80};
  const auto g = ggmGrid(makeRandomWalkMap(-1, 2), makeCosine(1), makeOne(), fam, {0, 1});
  for (const auto& row : g.cells) EXPECT_NEAR(*row[0].value, 0.0, 1e-12);
}

TEST(Ggm, HalfcellCornerShrinks) {
  ExhaustiveFamily fam;
  fam.kind = FamilyKind::CellAligned;
  fam.probeGrid = {0, 7, -3};
  fam.scaleLadder = {1, 2, 4, 8};
  const auto g = ggmGrid(makeRandomWalkMap(-1, 2), makeHalfCell(1), makeHalfCell(1), fam, {0, 2, 4, 8}, 0.25);
  ASSERT_EQ(g.antiDiagonal.size(), 4u);
  EXPECT_NEAR(g.antiDiagonal[0], 0.25, 1e-9);
  for (std::size_t i = 1; i < g.antiDiagonal.size(); ++i) EXPECT_LT(g.antiDiagonal[i], g.antiDiagonal[i - 1]);
  // Deviation at depth n is 1 / (4 3^n) for even n; the corner starts at n = 4.
  EXPECT_NEAR(g.cornerDeviation, 1.0 / 324, 1e-9);
  EXPECT_LT(g.antiDiagonal.back(), 1e-4);
  for (const auto& row : g.cells) {
    for (const auto& c : row) EXPECT_LE(std::abs(*c.value), 1.0 + 1e-12);
  }
}

TEST(Coalescence, IdenticalDensities) {
  const auto g = makeIndicatorDensity(0, 1, false);
  const auto s = coalescenceTest(makeRandomWalkMap(-1, 2), makeSign(), g, g, range(0, 20));
  for (const auto& p : s.points) {
    EXPECT_EQ(p.delta, 0.0);
    EXPECT_EQ(*p.exactBound, Rational(0));
  }
}

TEST(Coalescence, ConstantObservable) {
  const auto s = coalescenceTest(makeBoole(), makeOne(), makeGaussBump(0, 1), makeIndicatorDensity(2, 3, false),
                                 {0, 2, 4}, with(CorrelationMethod::Quadrature));
  for (const auto& p : s.points) EXPECT_NEAR(p.delta, 0.0, 1e-9);
}

TEST(Coalescence, DominatedExactly) {
  const auto s = coalescenceTest(makeRandomWalkMap(-1, 2), makeSign(), makeIndicatorDensity(0, 1, false),
                                 makeIndicatorDensity(5, 6, false), range(0, 400));
  EXPECT_TRUE(s.exact);
  EXPECT_TRUE(s.boundNonIncreasing);
  for (const auto& p : s.points) {
    ASSERT_TRUE(p.exactDelta && p.exactBound);
    EXPECT_LE(*p.exactDelta, *p.exactBound);
    EXPECT_TRUE(p.dominated);
  }
  EXPECT_EQ(*s.points[0].exactBound, Rational(2));
}

TEST(Coalescence, ZeroMeanRejected) {
  const auto d = makeLatticeDensity(LatticeMeasure::fromMasses(0, {Rational(1), Rational(-1)}));
  try {
    coalescenceTest(makeRandomWalkMap(-1, 2), makeSign(), d, makeIndicatorDensity(0, 1, false), {0});
    FAIL() << "expected ZeroMean";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroMean);
  }
}

TEST(Rho, HalfcellOnRandomWalk) {
  const std::vector<LocalObservable> gs{makeIndicatorDensity(0, 1, false), makeIndicatorDensity(0.25, 2, true)};
  const auto r = estimateRho(makeRandomWalkMap(-1, 2), makeHalfCell(1), gs, range(0, 12));
  EXPECT_NEAR(r.rhoHat, 0.5, 1e-3);
  EXPECT_LE(r.coalescenceDefect, 1e-3);
  double mean = 0;
  for (const auto& t : r.perDensityTails) mean += t.tailMean;
  EXPECT_DOUBLE_EQ(r.rhoHat, mean / gs.size());
}

TEST(Rho, BooleSignIsZero) {
  const std::vector<LocalObservable> gs{makeIndicatorDensity(-1, 1, true), makeGaussBump(0, 2)};
  const auto r = estimateRho(makeBoole(), makeSign(), gs, range(0, 8), 1.0 / 3, with(CorrelationMethod::Quadrature));
  EXPECT_NEAR(r.rhoHat, 0.0, 1e-8);
}

TEST(Rho, ConstantLatticeStep) {
  const std::vector<LocalObservable> gs{makeIndicatorDensity(0, 1, false), makeIndicatorDensity(-4, -2, false)};
  const auto r = estimateRho(makeRandomWalkMap(-1, 2), makeCellPattern({Rational(7, 4)}), gs, range(0, 40));
  EXPECT_NEAR(r.rhoHat, 1.75, 1e-12);
  EXPECT_NEAR(r.coalescenceDefect, 0.0, 1e-12);
}

TEST(Rho, ZeroMeanRejected) {
  const auto d = makeLatticeDensity(LatticeMeasure::fromMasses(0, {Rational(1), Rational(-1)}));
  EXPECT_THROW(estimateRho(makeRandomWalkMap(-1, 2), makeSign(), {d}, {0, 1}), Error);
}

TEST(Tail, LastThird) {
  const std::vector<double> v{5, 5, 5, 1, 2, 3};
  const std::vector<double> e(6, 0.0);
  const auto t = tailStats(v, e, 2.0);
  EXPECT_DOUBLE_EQ(t.rawMean, 2.5);
  EXPECT_DOUBLE_EQ(t.max, 1.0);
  EXPECT_DOUBLE_EQ(t.mean, 0.5);
}

TEST(Verdicts, ThreeValued) {
  EXPECT_EQ(judgeDeviation(0.01, 0.0, 0.02), Verdict::Pass);
  EXPECT_EQ(judgeDeviation(0.05, 0.0, 0.02), Verdict::Fail);
  EXPECT_EQ(judgeDeviation(0.0, 0.011, 0.02), Verdict::Inconclusive);
}
