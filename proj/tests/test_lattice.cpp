#include <gtest/gtest.h>

#include <map>
#include <random>

#include "infinimix/lattice.hpp"

using namespace infinimix;

namespace {

using Masses = std::map<long, Rational>;

// Plain convolution on a map of cells.
Masses convolve(const Masses& g, const JumpLaw& law, long n) {
  Masses cur = g;
  for (long s = 0; s < n; ++s) {
    Masses next;
    for (const auto& [c, m] : cur) {
      for (std::size_t i = 0; i < law.probabilities.size(); ++i) {
        next[c + law.minJump + static_cast<long>(i)] += m * law.probabilities[i];
      }
    }
    cur = std::move(next);
  }
  return cur;
}

void expectSame(const LatticeMeasure& m, const Masses& oracle) {
  for (const auto& [c, v] : oracle) EXPECT_EQ(m.mass(c), v) << "cell " << c;
  for (long c = m.offset(); c < m.end(); ++c) {
    const auto it = oracle.find(c);
    EXPECT_EQ(m.mass(c), it == oracle.end() ? Rational(0) : it->second) << "cell " << c;
  }
}

Masses randomMasses(std::mt19937_64& rng, bool positive) {
  std::uniform_int_distribution<long> off(-5, 5);
  std::uniform_int_distribution<int> len(1, 6);
  std::uniform_int_distribution<int> num(positive ? 0 : -7, 7);
  std::uniform_int_distribution<int> den(1, 9);
  Masses m;
  const long o = off(rng);
  const int l = len(rng);
  for (int i = 0; i < l; ++i) m[o + i] = Rational(num(rng), den(rng));
  for (auto& [c, v] : m) v.canonicalize();
  return m;
}

LatticeMeasure toMeasure(const Masses& m) {
  std::vector<Rational> v(static_cast<std::size_t>(m.rbegin()->first - m.begin()->first + 1));
  for (const auto& [c, x] : m) v[static_cast<std::size_t>(c - m.begin()->first)] = x;
  return LatticeMeasure::fromMasses(m.begin()->first, v);
}

}  // namespace

TEST(Lattice, OneStepFromCellZero) {
  const auto law = JumpLaw::uniform(-1, 2);
  const auto m = LatticeMeasure::cell(0).pushed(law);
  EXPECT_EQ(m.mass(-1), Rational(1, 3));
  EXPECT_EQ(m.mass(0), Rational(1, 3));
  EXPECT_EQ(m.mass(1), Rational(1, 3));
  EXPECT_EQ(m.mass(2), Rational(0));
}

TEST(Lattice, TwoStepsFromCellZero) {
  const auto law = JumpLaw::uniform(-1, 2);
  const auto m = LatticeMeasure::cell(0).pushed(law).pushed(law);
  const Rational expected[] = {Rational(1, 9), Rational(2, 9), Rational(1, 3), Rational(2, 9), Rational(1, 9)};
  for (long j = -2; j <= 2; ++j) EXPECT_EQ(m.mass(j), expected[j + 2]);
  EXPECT_EQ(m.total(), Rational(1));
}

TEST(Lattice, DipoleOneStep) {
  const auto law = JumpLaw::uniform(-1, 2);
  const auto g = LatticeMeasure::fromMasses(0, {Rational(1), Rational(-1)});
  const auto m = g.pushed(law);
  EXPECT_EQ(m.mass(-1), Rational(1, 3));
  EXPECT_EQ(m.mass(0), Rational(0));
  EXPECT_EQ(m.mass(1), Rational(0));
  EXPECT_EQ(m.mass(2), Rational(-1, 3));
  EXPECT_EQ(m.l1(), Rational(2, 3));
  EXPECT_EQ(g.l1(), Rational(2));
}

TEST(Lattice, MatchesConvolutionOracleProperty) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const bool positive = trial % 2 == 0;
    auto masses = randomMasses(rng, positive);
    if (std::all_of(masses.begin(), masses.end(), [](const auto& kv) { return kv.second == 0; })) continue;
    const long k1 = static_cast<long>(rng() % 5) - 3;
    const long k2 = k1 + 2 + static_cast<long>(rng() % 3);
    const auto law = JumpLaw::uniform(k1, k2);
    const long n = static_cast<long>(rng() % 8);
    auto m = toMeasure(masses);
    const Rational total = m.total();
    Rational l1 = m.l1();
    for (long s = 0; s < n; ++s) {
      m = m.pushed(law);
      EXPECT_EQ(m.total(), total);
      EXPECT_LE(m.l1(), l1);
      l1 = m.l1();
      if (positive) EXPECT_TRUE(m.nonNegative());
    }
    expectSame(m, convolve(masses, law, n));
  }
}

TEST(Lattice, NonUniformLaw) {
  JumpLaw law{-2, {Rational(1, 2), Rational(0), Rational(1, 6), Rational(1, 3)}};
  EXPECT_EQ(law.total(), Rational(1));
  const Masses g{{0, Rational(1)}, {3, Rational(-2, 5)}};
  auto m = toMeasure(g);
  for (int s = 0; s < 6; ++s) m = m.pushed(law);
  expectSame(m, convolve(g, law, 6));
}

TEST(Lattice, SymmetricLawGivesSymmetricMasses) {
  const auto law = JumpLaw::uniform(-1, 2);
  ASSERT_TRUE(law.symmetric());
  auto m = LatticeMeasure::cell(0);
  for (int n = 1; n <= 60; ++n) {
    m = m.pushed(law);
    for (long j = 0; j <= n; ++j) ASSERT_EQ(m.mass(j), m.mass(-j)) << "n=" << n << " j=" << j;
  }
  EXPECT_FALSE(JumpLaw::uniform(0, 2).symmetric());
}

TEST(Lattice, VarianceOfUniformLaw) {
  EXPECT_NEAR(JumpLaw::uniform(-1, 2).variance(), 2.0 / 3, 1e-15);
  EXPECT_NEAR(JumpLaw::uniform(0, 2).variance(), 0.25, 1e-15);
}

TEST(Lattice, EqualityIgnoresRepresentation) {
  const LatticeMeasure a(0, {Integer(1), Integer(0)}, Integer(2));
  const LatticeMeasure b(-1, {Integer(0), Integer(2)}, Integer(4));
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == LatticeMeasure::cell(0));
}

TEST(Lattice, AlgebraCancellation) {
  const auto a = LatticeMeasure::fromMasses(0, {Rational(1), Rational(1)});
  const auto b = LatticeMeasure::fromMasses(1, {Rational(1), Rational(1)});
  const auto d = (a - b).trimmed();
  EXPECT_EQ(d.mass(0), Rational(1));
  EXPECT_EQ(d.mass(1), Rational(0));
  EXPECT_EQ(d.mass(2), Rational(-1));
  EXPECT_EQ(d.total(), Rational(0));
}

TEST(Lattice, JsonRoundTrip) {
  auto m = LatticeMeasure::fromMasses(-3, {Rational(1, 7), Rational(-2, 3), Rational(5)});
  for (int i = 0; i < 40; ++i) m = m.pushed(JumpLaw::uniform(-1, 2));
  const auto j = m.toJson();
  EXPECT_TRUE(j.contains("offset"));
  EXPECT_TRUE(j.at("numerators").is_array());
  EXPECT_TRUE(j.at("denominator").is_string());
  EXPECT_TRUE(LatticeMeasure::fromJson(j) == m);
}

TEST(Lattice, PairSumsCellValues) {
  const auto m = LatticeMeasure::fromMasses(-1, {Rational(1, 3), Rational(1, 3), Rational(1, 3)});
  EXPECT_EQ(m.pair([](long c) { return Rational(c >= 0 ? 1 : -1); }), Rational(1, 3));
  EXPECT_NEAR(m.pairDouble([](long c) { return c * 0.5; }), 0.0, 1e-16);
}

TEST(FloatLattice, ErrorBoundBracketsExactDistance) {
  const auto law = JumpLaw::uniform(-1, 2);
  auto exact = LatticeMeasure::fromMasses(0, {Rational(1), Rational(-1)});
  for (int i = 0; i < 100; ++i) exact = exact.pushed(law);
  auto approx = FloatLatticeMeasure::from(exact);
  for (int i = 0; i < 300; ++i) {
    exact = exact.pushed(law);
    approx = approx.pushed(law);
  }
  Rational dist = 0;
  for (long c = std::min(exact.offset(), approx.offset); c < std::max(exact.end(), approx.end()); ++c) {
    dist += abs(exact.mass(c) - Rational(approx.mass(c)));
  }
  EXPECT_LE(dist.get_d(), approx.errorBound);
  EXPECT_LT(approx.errorBound, 1e-10);
  EXPECT_NEAR(approx.l1(), exact.l1().get_d(), approx.errorBound + approx.l1RoundingBound());
}
