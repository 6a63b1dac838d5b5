#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "infinimix/ladder_cache.hpp"
#include "infinimix/runner.hpp"
#include "infinimix/transfer.hpp"

using namespace infinimix;
namespace fs = std::filesystem;

namespace {

fs::path freshDir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("infinimix-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const LatticeMeasure kDipole = LatticeMeasure::fromMasses(0, {Rational(1), Rational(-1)});

RunOptions cached(const fs::path& dir) {
  RunOptions o;
  o.threads = 1;
  o.cacheDir = dir;
  return o;
}

}  // namespace

TEST(LadderCache, ResumesFromStoredRung) {
  const auto dir = freshDir("resume");
  auto map = makeRandomWalkMap(-1, 2);
  LatticeMeasure at1000;
  {
    LadderCache cache(dir);
    TransferEngine e(map, TransferMode::ExactLattice);
    e.setLadderStore(&cache);
    auto l = e.ladder(kDipole, "dipole", 1000);
    at1000 = l.exactMeasure();
    EXPECT_EQ(l.n(), 1000);
    EXPECT_EQ(cache.writes(), 21);  // rungs 0, 50, ..., 1000
  }
  LadderCache cache(dir);
  TransferEngine e(map, TransferMode::ExactLattice);
  e.setLadderStore(&cache);
  auto l500 = e.ladder(kDipole, "dipole", 500);
  EXPECT_EQ(l500.n(), 500);
  EXPECT_EQ(l500.steps(), 0);
  EXPECT_EQ(cache.hits(), 1);
  EXPECT_EQ(l500.exactMeasure(), TransferEngine(map, TransferMode::ExactLattice).applyLattice(kDipole, 500));

  auto l1200 = e.ladder(kDipole, "dipole", 1000);
  EXPECT_EQ(l1200.exactMeasure(), at1000);
  l1200.advanceTo(1200);
  EXPECT_EQ(l1200.steps(), 200);
}

TEST(LadderCache, SmallRequestsMissTheCheckpoints) {
  const auto dir = freshDir("small");
  LadderCache cache(dir);
  TransferEngine e(makeRandomWalkMap(-1, 2), TransferMode::ExactLattice);
  e.setLadderStore(&cache);
  auto l = e.ladder(kDipole, "dipole", 2);
  EXPECT_EQ(l.exactMeasure(),
            LatticeMeasure::fromMasses(-2, {Rational(1, 9), Rational(1, 9), Rational(1, 9), Rational(-1, 9),
                                            Rational(-1, 9), Rational(-1, 9)}));
  EXPECT_EQ(cache.hits(), 0);
}

TEST(LadderCache, CorruptFileIsRebuilt) {
  const auto dir = freshDir("corrupt");
  auto map = makeRandomWalkMap(-1, 2);
  {
    LadderCache cache(dir);
    TransferEngine e(map, TransferMode::ExactLattice);
    e.setLadderStore(&cache);
    e.ladder(kDipole, "dipole", 100);
  }
  LadderCache probe(dir);
  const auto file = probe.fileFor("rw:-1:2|dipole", 100);  // keys carry the map id
  ASSERT_TRUE(fs::exists(file));
  {
    std::fstream f(file, std::ios::in | std::ios::out);
    f.seekp(40);
    f.put('7');
  }
  LadderCache cache(dir);
  TransferEngine e(map, TransferMode::ExactLattice);
  e.setLadderStore(&cache);
  auto l = e.ladder(kDipole, "dipole", 100);
  EXPECT_EQ(cache.corrupt(), 1);
  EXPECT_EQ(l.exactMeasure(), TransferEngine(map, TransferMode::ExactLattice).applyLattice(kDipole, 100));
  EXPECT_TRUE(fs::exists(file));
}

TEST(LadderCache, Fnv) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Runner, CacheIsTransparent) {
  const auto cfg = loadScenario(fs::path(SCENARIO_DIR) / "ac-03.ini");
  const auto dir = freshDir("transparent");
  RunOptions off;
  off.useCache = false;
  const auto a = runScenario(cfg, off);
  const auto b = runScenario(cfg, cached(dir));
  const auto c = runScenario(cfg, cached(dir));
  EXPECT_EQ(a.results.dump(), b.results.dump());
  EXPECT_EQ(a.results.dump(), c.results.dump());
  EXPECT_EQ(a.csv, c.csv);
  EXPECT_GT(c.cacheHits, 0);
  EXPECT_EQ(a.status, 0);
}

TEST(Runner, RepeatRunsAreIdentical) {
  const auto cfg = loadScenario(fs::path(SCENARIO_DIR) / "ac-02.ini");
  RunOptions o;
  o.useCache = false;
  const auto a = runScenario(cfg, o);
  o.threads = 3;
  const auto b = runScenario(cfg, o);
  EXPECT_EQ(a.results.dump(), b.results.dump());
  EXPECT_EQ(a.config, cfg.normalForm());
}

TEST(Runner, RwLinDipole) {
  const auto cfg = loadScenario(fs::path(SCENARIO_DIR) / "rw-lin.ini");
  const auto a = runScenario(cfg, cached(freshDir("rwlin")));
  ASSERT_EQ(a.status, 0) << a.results.dump();
  const auto& series = a.results.at("series");
  EXPECT_EQ(series.at(1).at("exact").get<std::string>(), "2/3");
  for (std::size_t i = 1; i < series.size(); ++i) {
    EXPECT_LE(series.at(i).at("estimate").get<double>(), series.at(i - 1).at("estimate").get<double>() + 1e-12);
  }
}

TEST(Runner, BooleSignPasses) {
  const auto a = runScenario(loadScenario(fs::path(SCENARIO_DIR) / "boole-sign.ini"));
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.verdict, "pass");
}

TEST(Runner, StatusCodes) {
  EXPECT_EQ(statusOf(Verdict::Pass), 0);
  EXPECT_EQ(statusOf(Verdict::Fail), 2);
  EXPECT_EQ(statusOf(Verdict::Inconclusive), 3);

  auto cfg = parseScenario("[run]\nexperiment = lin\nn = 0..4\ntolerance = 1e-9\n[map]\nid = rw:-1:2\n"
                           "[observables]\ng = masses:0:1,-1\n");
  EXPECT_EQ(runScenario(cfg).status, 2);

  cfg = parseScenario("[run]\nexperiment = lin\nn = 0..4\n[map]\nid = rw:-1:2\n[observables]\ng = indicator:0:1\n");
  const auto err = runScenario(cfg);
  EXPECT_EQ(err.status, 1);
  ASSERT_TRUE(err.error);
  EXPECT_NE(err.error->find("NotMeanZero"), std::string::npos) << *err.error;
}

TEST(Runner, ArtifactRoundTrip) {
  const auto cfg = loadScenario(fs::path(SCENARIO_DIR) / "rw-lin.ini");
  const auto a = runScenario(cfg);
  const auto dir = freshDir("artifact");
  const auto path = writeArtifact(a, dir);
  EXPECT_TRUE(fs::exists(dir / "rw-lin.series.csv"));
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  const auto back = RunArtifact::fromJson(j);
  EXPECT_EQ(back.results, a.results);
  EXPECT_EQ(back.status, a.status);
  const auto report = renderReport(j);
  EXPECT_NE(report.find("rw-lin"), std::string::npos);
  EXPECT_NE(report.find("2/3"), std::string::npos) << report;
}
