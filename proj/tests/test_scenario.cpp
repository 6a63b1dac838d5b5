#include <gtest/gtest.h>

#include <filesystem>

#include "infinimix/errors.hpp"
#include "infinimix/registry.hpp"
#include "infinimix/scenario.hpp"

using namespace infinimix;

namespace {

const char* kMinimal = R"([run]
experiment = corr
n = 0..40

[map]
id = rw:-1:2

[observables]
F = sign
g = indicator:0:1
)";

std::string errorOf(const std::string& text) {
  try {
    parseScenario(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Scenario, MinimalCorrelation) {
  const auto cfg = parseScenario(kMinimal, {}, "minimal");
  EXPECT_EQ(cfg.name, "minimal");
  EXPECT_EQ(cfg.experiment, Experiment::Corr);
  EXPECT_EQ(cfg.nList.size(), 41u);
  EXPECT_EQ(cfg.nList.back(), 40);
  EXPECT_EQ(cfg.method, CorrelationMethod::Auto);
  EXPECT_DOUBLE_EQ(cfg.tolerance, 1e-2);
  EXPECT_EQ(cfg.seed, 20240611u);
  EXPECT_EQ(cfg.observables.at("F"), "sign");
}

TEST(Scenario, ExactMethodHalfcell) {
  std::string text = kMinimal;
  text.replace(text.find("F = sign"), 8, "F = halfcell:1");
  text.insert(text.find("n = "), "method = exact\n");
  const auto cfg = parseScenario(text);
  EXPECT_EQ(cfg.nList.size(), 41u);
  EXPECT_EQ(cfg.method, CorrelationMethod::ExactLattice);
}

TEST(Scenario, NormalFormIsStable) {
  const auto a = parseScenario(kMinimal, {}, "x");
  const auto b = parseScenario(std::string("# comment\n") + kMinimal, {}, "x");
  EXPECT_EQ(a.normalForm(), b.normalForm());
  EXPECT_NE(a.normalForm().find("tolerance"), std::string::npos);
}

TEST(Scenario, InvalidWalkRange) {
  std::string text = kMinimal;
  text.replace(text.find("rw:-1:2"), 7, "rw:0:1");
  try {
    parseScenario(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos) << e.what();
  }
}

TEST(Scenario, MisspelledKeySuggestsNearest) {
  const auto msg = errorOf(std::string(kMinimal) + "[run]\n");
  EXPECT_FALSE(msg.empty());
  std::string text = kMinimal;
  text.insert(text.find("n = "), "tolrance = 0.1\n");
  const auto m2 = errorOf(text);
  EXPECT_NE(m2.find("did you mean 'tolerance'"), std::string::npos) << m2;
  EXPECT_NE(m2.find("line 3, column 1"), std::string::npos) << m2;
}

TEST(Scenario, UnknownSection) {
  const auto msg = errorOf(std::string(kMinimal) + "[famly]\nkind = symmetric\n");
  EXPECT_NE(msg.find("did you mean [family]"), std::string::npos) << msg;
}

TEST(Scenario, UnresolvedObservable) {
  std::string text = kMinimal;
  text.replace(text.find("F = sign"), 8, "F = sgn");
  try {
    parseScenario(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnresolvedId);
    EXPECT_NE(std::string(e.what()).find("sign"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("line 9, column 5"), std::string::npos) << e.what();
  }
}

TEST(Scenario, MissingRole) {
  std::string text = kMinimal;
  text.erase(text.find("g = "));
  EXPECT_FALSE(errorOf(text).empty());
}

TEST(Scenario, BadValues) {
  std::string text = kMinimal;
  text.replace(text.find("0..40"), 5, "5..1");
  EXPECT_FALSE(errorOf(text).empty());
  text = kMinimal;
  text.insert(text.find("n = "), "method = exactish\n");
  EXPECT_FALSE(errorOf(text).empty());
}

TEST(Scenario, BundledScenariosParse) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(SCENARIO_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(loadScenario(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 11);
}

TEST(Registry, NList) {
  EXPECT_EQ(parseNList("0..4"), (std::vector<long>{0, 1, 2, 3, 4}));
  EXPECT_EQ(parseNList("0..10:5"), (std::vector<long>{0, 5, 10}));
  EXPECT_EQ(parseNList("1,3,9"), (std::vector<long>{1, 3, 9}));
  EXPECT_THROW(parseNList("3,1"), Error);
  EXPECT_THROW(parseNList("-1..3"), Error);
}

TEST(Registry, Numbers) {
  EXPECT_EQ(parseRational("3/4"), Rational(3, 4));
  EXPECT_EQ(parseRational("0.25"), Rational(1, 4));
  EXPECT_EQ(parseRational("-1.5"), Rational(-3, 2));
  EXPECT_THROW(parseReal("1.0x"), Error);
  EXPECT_THROW(parseInteger("2.5"), Error);
}

TEST(Registry, Expressions) {
  const auto F = resolveGlobal("2*sign - one");
  EXPECT_DOUBLE_EQ(F(0.5), 1.0);
  EXPECT_DOUBLE_EQ(F(-0.5), -3.0);
  const auto g = resolveLocal("indicator:0:1 - indicator:1:2");
  EXPECT_NEAR(g.integral, 0.0, 1e-15);
  ASSERT_TRUE(g.latticeForm);
  EXPECT_EQ(g.latticeForm->l1(), Rational(2));
  EXPECT_THROW(resolveGlobal("sign+one"), Error);
  EXPECT_THROW(resolveLocal("gauss:0"), Error);
}

TEST(Registry, Maps) {
  EXPECT_EQ(resolveMap("boole")->id(), "boole");
  EXPECT_TRUE(resolveMap("rw:-2:3")->latticeJumpLaw());
  EXPECT_THROW(resolveMap("bool"), Error);
  const auto near = nearestMatches("bool", {"boole", "rw", "custom"});
  ASSERT_FALSE(near.empty());
  EXPECT_EQ(near[0], "boole");
}
