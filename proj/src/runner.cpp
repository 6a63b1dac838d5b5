#include "infinimix/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "infinimix/errors.hpp"
#include "infinimix/ladder_cache.hpp"
#include "infinimix/registry.hpp"

#ifndef INFINIMIX_VERSION
#define INFINIMIX_VERSION "0.0.0"
#endif

namespace infinimix {
namespace {

std::string utcNow() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string csvNumber(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Verdict fromBool(bool ok) { return ok ? Verdict::Pass : Verdict::Fail; }

struct Outcome {
  Verdict verdict = Verdict::Inconclusive;
  std::string label;  // overrides to_string(verdict) (e.g. "converged")
  nlohmann::json details = nlohmann::json::object();
  nlohmann::json series = nlohmann::json::array();
  std::string csv;
};

nlohmann::json seriesJson(const CorrelationSeries& s) { return s.toJson()["series"]; }

class Context {
 public:
  Context(const ScenarioConfig& cfg, LadderStore* store, unsigned threads) : cfg_(cfg) {
    if (!cfg.mapId.empty()) map_ = resolveMap(cfg.mapId, cfg.baseDir);
    opts_.method = cfg.method;
    opts_.mc.seed = cfg.seed;
    opts_.mc.samples = cfg.samples;
    opts_.mc.threads = threads;
    opts_.floatSwitchover = cfg.floatSwitchover;
    opts_.ladderStore = store;
    if (auto b = cfg.extraReal("quadrature_budget")) opts_.quadrature.budget = static_cast<long>(*b);
  }

  const ScenarioConfig& cfg() const { return cfg_; }
  const MapPtr& map() const { return map_; }
  const CorrelateOptions& opts() const { return opts_; }
  GlobalObservable global(const std::string& role) const { return resolveGlobal(cfg_.observables.at(role)); }
  LocalObservable local(const std::string& role) const { return resolveLocal(cfg_.observables.at(role)); }
  std::vector<LocalObservable> locals(const std::string& role) const {
    std::vector<LocalObservable> out;
    for (const auto& id : cfg_.observableList(role)) {
      if (id == "dictionary") {
        for (auto& g : glm3Dictionary()) out.push_back(std::move(g));
      } else {
        out.push_back(resolveLocal(id));
      }
    }
    return out;
  }
  ExhaustiveFamily family() const { return cfg_.family->build(); }

 private:
  const ScenarioConfig& cfg_;
  MapPtr map_;
  CorrelateOptions opts_;
};

double cesaroTarget(const GlobalObservable& f) {
  return cesaroMean(f, {0, -10, 10, -100, 100, -1000, 1000}, 1000).value;
}

Outcome runCorr(const Context& c) {
  Outcome o;
  const auto s = correlate(c.map(), c.global("F"), c.local("g"), c.cfg().nList, c.opts());
  o.series = seriesJson(s);
  o.csv = s.toCsv();
  o.details["resolved_method"] = to_string(s.method);
  if (auto target = c.cfg().extraReal("target")) {
    const auto t = tailStats(s.estimates, s.errorBounds, *target, c.cfg().tailFraction);
    o.details["target"] = *target;
    o.details["tail_mean"] = t.rawMean;
    o.details["tail_max_deviation"] = t.max;
    o.details["tail_error"] = t.errorMax;
    o.verdict = judgeDeviation(t.max, t.errorMax, c.cfg().tolerance);
  } else {
    o.verdict = Verdict::Pass;
  }
  return o;
}

Outcome runGlm(const Context& c) {
  Outcome o;
  const auto f = c.global("F");
  double avgF;
  if (auto a = c.cfg().extraReal("avg_f")) {
    avgF = *a;
  } else if (c.cfg().family) {
    avgF = estimateAvg(f, c.family()).estimate;
  } else {
    avgF = cesaroTarget(f);
  }
  const bool dict = c.cfg().observableList("gset") == std::vector<std::string>{"dictionary"};
  const auto rep = glmVerdict(c.map(), f, c.locals("gset"), avgF, c.cfg().nList, c.cfg().tolerance, c.opts(),
                              dict ? kGlm3DictionaryName : "custom");
  o.details = rep.toJson();
  o.verdict = rep.glm2;
  if (!rep.densities.empty()) {
    o.series = seriesJson(rep.densities.front().series);
    o.csv = rep.densities.front().series.toCsv();
  }
  return o;
}

Outcome runLlm(const Context& c) {
  Outcome o;
  const auto rep = llmVerdict(c.map(), c.local("f"), c.local("g"), c.cfg().nList, c.cfg().tolerance, c.opts());
  o.details = rep.toJson();
  o.series = seriesJson(rep.series);
  o.csv = rep.series.toCsv();
  o.verdict = rep.verdict;
  if (c.cfg().extraString("local_clt") == "true") {
    const auto& law = c.map()->latticeJumpLaw();
    if (!law) fail(ErrorCode::MethodMismatch, "local CLT check needs a random-walk map");
    const double sigma2 = law->variance();
    const double constant = 1.0 / std::sqrt(2 * std::numbers::pi * sigma2);
    const double n = static_cast<double>(rep.series.nValues.back());
    const double scaled = rep.series.estimates.back() * std::sqrt(n);
    const double err = rep.series.errorBounds.back() * std::sqrt(n);
    o.details["local_clt"] = {{"n", rep.series.nValues.back()},
                              {"scaled", scaled},
                              {"constant", constant},
                              {"deviation", std::abs(scaled - constant)}};
    o.verdict = judgeDeviation(std::abs(scaled - constant), err, c.cfg().tolerance);
  }
  return o;
}

Outcome runGgm(const Context& c) {
  Outcome o;
  const auto grid = ggmGrid(c.map(), c.global("F"), c.global("G"), c.family(), c.cfg().nList,
                            c.cfg().extraReal("target"), c.opts());
  o.details = grid.toJson();
  double err = 0;
  bool any = false;
  for (std::size_t i = grid.scales.size() / 2; i < grid.scales.size(); ++i) {
    for (std::size_t j = grid.nValues.size() / 2; j < grid.nValues.size(); ++j) {
      if (grid.cells[i][j].value) any = true;
      err = std::max(err, grid.cells[i][j].errorBound);
    }
  }
  o.verdict = any ? judgeDeviation(grid.cornerDeviation, err, c.cfg().tolerance) : Verdict::Inconclusive;
  std::ostringstream csv;
  csv << "M,n,value,deviation,error_bound\n";
  for (std::size_t i = 0; i < grid.scales.size(); ++i) {
    for (std::size_t j = 0; j < grid.nValues.size(); ++j) {
      const auto& cell = grid.cells[i][j];
      csv << csvNumber(grid.scales[i]) << "," << grid.nValues[j] << ","
          << (cell.value ? csvNumber(*cell.value) : std::string("missing")) << "," << csvNumber(cell.deviation) << ","
          << csvNumber(cell.errorBound) << "\n";
    }
  }
  o.csv = csv.str();
  return o;
}

Outcome runCoalescence(const Context& c) {
  Outcome o;
  const auto s = coalescenceTest(c.map(), c.global("F"), c.local("g"), c.local("h"), c.cfg().nList, c.opts());
  o.details = {{"exact", s.exact}, {"bound_nonincreasing", s.boundNonIncreasing}};
  std::ostringstream csv;
  csv << "n,estimate,error_bound,method\n";
  bool dominated = true;
  for (const auto& p : s.points) {
    dominated = dominated && p.dominated;
    nlohmann::json e{{"n", p.n}, {"estimate", p.delta}, {"error", 0.0}, {"dominated", p.dominated}};
    e["bound"] = p.bound ? nlohmann::json(*p.bound) : nlohmann::json(nullptr);
    if (p.exactDelta) e["exact_delta"] = p.exactDelta->get_str();
    if (p.exactBound) e["exact_bound"] = p.exactBound->get_str();
    o.series.push_back(std::move(e));
    csv << p.n << "," << csvNumber(p.delta) << ",0," << (s.exact ? "exact" : to_string(c.cfg().method)) << "\n";
  }
  o.csv = csv.str();
  const auto& last = s.points.back();
  const double finalValue = last.bound ? *last.bound : last.delta;
  o.details["all_dominated"] = dominated;
  o.details["final"] = finalValue;
  o.verdict = fromBool(dominated && s.boundNonIncreasing && finalValue <= c.cfg().tolerance);
  return o;
}

Outcome runRho(const Context& c) {
  Outcome o;
  const auto f = c.global("F");
  const auto est = estimateRho(c.map(), f, c.locals("gset"), c.cfg().nList, c.cfg().tailFraction, c.opts());
  o.details = est.toJson();
  o.details.erase("correlations");
  if (!est.series.empty()) {
    o.series = seriesJson(est.series.front());
    o.csv = est.series.front().toCsv();
  }
  double err = 0;
  for (const auto& s : est.series) {
    for (double e : s.errorBounds) err = std::max(err, e);
  }
  bool ok = est.coalescenceDefect <= c.cfg().tolerance + 2 * err;
  const auto target = c.cfg().extraString("target");
  if (!target.empty()) {
    const double expected = target == "cesaro" ? cesaroTarget(f) : parseReal(target);
    o.details["expected"] = expected;
    o.details["rho_deviation"] = std::abs(est.rhoHat - expected);
    ok = ok && std::abs(est.rhoHat - expected) <= c.cfg().tolerance + err;
  }
  o.verdict = err > 0.5 * c.cfg().tolerance ? Verdict::Inconclusive : fromBool(ok);
  return o;
}

Outcome runAvg(const Context& c) {
  Outcome o;
  const auto f = c.global("F");
  const auto fam = c.family();
  const auto rep = estimateAvg(f, fam, c.cfg().tolerance);
  o.details = rep.toJson();
  std::ostringstream csv;
  csv << "M,defect\n";
  for (const auto& p : rep.defectSeries) csv << csvNumber(p.M) << "," << csvNumber(p.defect) << "\n";
  o.csv = csv.str();
  if (c.map() && !c.cfg().nList.empty() && rep.verdict == IvVerdict::Converged) {
    o.details["invariance"] = avgInvarianceCheck(f, fam, *c.map(), c.cfg().nList, c.cfg().tolerance);
  }
  const std::string label = to_string(rep.verdict);
  const auto expect = c.cfg().extraString("expect");
  if (!expect.empty()) {
    o.details["expect"] = expect;
    o.verdict = fromBool(expect == label);
    return o;
  }
  o.label = label;
  o.verdict = rep.verdict == IvVerdict::Converged    ? Verdict::Pass
              : rep.verdict == IvVerdict::NotUniform ? Verdict::Fail
                                                     : Verdict::Inconclusive;
  return o;
}

Outcome runAvol(const Context& c) {
  Outcome o;
  const double collar = c.cfg().extraReal("collar").value_or(10.0);
  std::ostringstream csv;
  csv << "n,M,ratio,measure_defect\n";
  bool ok = true;
  for (long n : c.cfg().nList) {
    const auto pts = avolCheck(*c.map(), c.family(), n);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      const bool below = p.ratio <= collar / p.M;
      const bool decreasing = i == 0 || p.ratio < pts[i - 1].ratio || (p.ratio == 0 && pts[i - 1].ratio == 0);
      ok = ok && below && decreasing;
      o.series.push_back({{"n", n}, {"M", p.M}, {"ratio", p.ratio}, {"measure_defect", p.measureDefect},
                          {"within_collar", below}, {"decreasing", decreasing}});
      csv << n << "," << csvNumber(p.M) << "," << csvNumber(p.ratio) << "," << csvNumber(p.measureDefect) << "\n";
    }
  }
  o.details["collar"] = collar;
  o.csv = csv.str();
  o.verdict = fromBool(ok);
  return o;
}

Outcome runLin(const Context& c) {
  Outcome o;
  auto engine = TransferEngine::automatic(c.map());
  engine.setFloatSwitchover(c.cfg().floatSwitchover);
  engine.setLadderStore(c.opts().ladderStore);
  const auto s = linNorm(engine, c.local("g"), c.cfg().nList);
  std::ostringstream csv;
  csv << "n,estimate,error_bound,method\n";
  const std::string method = s.exactArithmetic ? "exact" : "preimage";
  for (const auto& p : s.points) {
    nlohmann::json e{{"n", p.n}, {"estimate", p.norm}, {"error", p.errorBound + p.truncationBound}};
    if (p.exact) e["exact"] = p.exact->get_str();
    o.series.push_back(std::move(e));
    csv << p.n << "," << csvNumber(p.norm) << "," << csvNumber(p.errorBound + p.truncationBound) << "," << method
        << "\n";
  }
  o.csv = csv.str();
  const auto& last = s.points.back();
  o.details = {{"nonincreasing", s.nonIncreasing}, {"exact_arithmetic", s.exactArithmetic}, {"final", last.norm}};
  o.verdict = fromBool(s.nonIncreasing && last.norm <= c.cfg().tolerance + last.errorBound);
  return o;
}

Outcome runP1(const Context& c) {
  Outcome o;
  const long points = static_cast<long>(c.cfg().extraReal("points").value_or(1e4));
  double lo = -50;
  double hi = 50;
  if (const auto r = c.cfg().extraString("range"); !r.empty()) {
    const auto comma = r.find(',');
    lo = parseReal(r.substr(0, comma));
    hi = parseReal(r.substr(comma + 1));
  }
  // Additive recurrence with the golden ratio: a low-discrepancy grid.
  const double alpha = std::numbers::phi - 1;
  double worst = 0;
  double worstAt = lo;
  long skipped = 0;
  for (long i = 0; i < points; ++i) {
    const double u = std::fmod(0.5 + alpha * static_cast<double>(i), 1.0);
    const double y = lo + (hi - lo) * u;
    try {
      double sum = 0;
      for (const auto& p : c.map()->preimages(y)) sum += p.weight;
      if (std::abs(sum - 1) > worst) {
        worst = std::abs(sum - 1);
        worstAt = y;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BoundaryPoint) throw;
      ++skipped;
    }
  }
  o.details = {{"points", points}, {"skipped", skipped}, {"max_deviation", worst}, {"worst_point", worstAt},
               {"range", {lo, hi}}};
  o.csv = "points,max_deviation\n" + std::to_string(points) + "," + csvNumber(worst) + "\n";
  o.verdict = fromBool(worst <= c.cfg().tolerance);
  return o;
}

struct DualityCase {
  std::string f;
  std::string g;
  std::vector<long> n;
};

std::vector<DualityCase> randomTriples(long count, std::uint64_t seed, long nMax) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](long a, long b) { return std::uniform_int_distribution<long>(a, b)(rng); };
  std::vector<DualityCase> out;
  for (long i = 0; i < count; ++i) {
    std::string f;
    std::string vals;
    const long len = uniform(1, 5);
    for (long j = 0; j < len; ++j) vals += (j ? "," : "") + std::to_string(uniform(-3, 3));
    if (uniform(0, 1) == 0) {
      f = "cellpattern:" + vals;
    } else {
      f = "cells:" + std::to_string(uniform(-4, 4)) + ":" + vals;
    }
    std::string masses;
    const long glen = uniform(1, 4);
    const bool signedG = uniform(0, 3) == 0;
    for (long j = 0; j < glen; ++j) {
      masses += (j ? "," : "") + std::to_string(signedG ? uniform(-2, 3) : uniform(1, 3));
    }
    if (masses.find_first_not_of("0,-") == std::string::npos) masses = "1";
    out.push_back({f, "masses:" + std::to_string(uniform(-3, 3)) + ":" + masses, {uniform(0, nMax)}});
  }
  return out;
}

Outcome runDuality(const Context& c) {
  Outcome o;
  std::vector<DualityCase> cases;
  if (auto triples = c.cfg().extraReal("triples")) {
    cases = randomTriples(static_cast<long>(*triples), c.cfg().seed, c.cfg().nList.back());
  } else {
    for (const auto& f : c.cfg().observableList("fset")) {
      for (const auto& g : c.cfg().observableList("gset")) cases.push_back({f, g, c.cfg().nList});
    }
  }
  if (cases.empty()) fail(ErrorCode::InvalidArgument, "duality needs fset and gset, or triples");
  auto exactOpts = c.opts();
  exactOpts.method = CorrelationMethod::ExactLattice;
  auto mcOpts = c.opts();
  mcOpts.method = CorrelationMethod::MonteCarlo;
  long agree = 0;
  long total = 0;
  std::ostringstream csv;
  csv << "case,F,g,n,exact,montecarlo,three_se\n";
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& dc = cases[k];
    const auto f = resolveGlobal(dc.f);
    const auto g = resolveLocal(dc.g);
    // Each case gets its own stream so adding cases does not shift the others.
    mcOpts.mc.seed = c.cfg().seed + k;
    const auto ex = correlate(c.map(), f, g, dc.n, exactOpts);
    const auto mc = correlate(c.map(), f, g, dc.n, mcOpts);
    for (std::size_t i = 0; i < dc.n.size(); ++i) {
      const double diff = std::abs(ex.estimates[i] - mc.estimates[i]);
      const bool ok = diff <= mc.errorBounds[i] + ex.errorBounds[i];
      agree += ok;
      ++total;
      nlohmann::json e{{"F", dc.f},
                       {"g", dc.g},
                       {"n", dc.n[i]},
                       {"exact", ex.estimates[i]},
                       {"montecarlo", mc.estimates[i]},
                       {"three_se", mc.errorBounds[i]},
                       {"seed", mcOpts.mc.seed},
                       {"agree", ok}};
      if (ex.exact[i]) e["exact_rational"] = ex.exact[i]->get_str();
      o.series.push_back(std::move(e));
      csv << k << ",\"" << dc.f << "\",\"" << dc.g << "\"," << dc.n[i] << "," << csvNumber(ex.estimates[i]) << ","
          << csvNumber(mc.estimates[i]) << "," << csvNumber(mc.errorBounds[i]) << "\n";
    }
  }
  const double minAgree = c.cfg().extraReal("min_agree").value_or(0.95);
  o.details = {{"agree", agree}, {"total", total}, {"min_agree", minAgree}, {"samples", c.cfg().samples}};
  o.csv = csv.str();
  o.verdict = fromBool(static_cast<double>(agree) >= minAgree * static_cast<double>(total));
  return o;
}

Outcome dispatch(const Context& c) {
  switch (c.cfg().experiment) {
    case Experiment::Corr: return runCorr(c);
    case Experiment::Glm: return runGlm(c);
    case Experiment::Llm: return runLlm(c);
    case Experiment::Ggm: return runGgm(c);
    case Experiment::Coalescence: return runCoalescence(c);
    case Experiment::Rho: return runRho(c);
    case Experiment::Avg: return runAvg(c);
    case Experiment::Avol: return runAvol(c);
    case Experiment::Lin: return runLin(c);
    case Experiment::P1: return runP1(c);
    case Experiment::Duality: return runDuality(c);
  }
  fail(ErrorCode::InvalidArgument, "unknown experiment");
}

}  // namespace

const char* libraryVersion() { return INFINIMIX_VERSION; }

int statusOf(Verdict v) {
  switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::Fail: return 2;
    case Verdict::Inconclusive: return 3;
  }
  return 1;
}

nlohmann::json RunArtifact::toJson() const {
  nlohmann::json j{{"name", name},           {"config", config},       {"library_version", version},
                   {"started_at", startedAt}, {"finished_at", finishedAt}, {"cache_hits", cacheHits},
                   {"status", status},        {"verdict", verdict},     {"results", results}};
  j["error"] = error ? nlohmann::json(*error) : nlohmann::json(nullptr);
  return j;
}

RunArtifact RunArtifact::fromJson(const nlohmann::json& j) {
  RunArtifact a;
  try {
    a.name = j.at("name").get<std::string>();
    a.config = j.at("config").get<std::string>();
    a.version = j.at("library_version").get<std::string>();
    a.startedAt = j.at("started_at").get<std::string>();
    a.finishedAt = j.at("finished_at").get<std::string>();
    a.cacheHits = j.at("cache_hits").get<long>();
    a.status = j.at("status").get<int>();
    a.verdict = j.at("verdict").get<std::string>();
    a.results = j.at("results");
    if (!j.at("error").is_null()) a.error = j.at("error").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed artifact: ") + e.what());
  }
  return a;
}

RunArtifact runScenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  RunArtifact a;
  a.name = cfg.name;
  a.config = cfg.normalForm();
  a.version = libraryVersion();
  a.startedAt = utcNow();
  std::optional<LadderCache> cache;
  if (opts.useCache) cache.emplace(opts.cacheDir.empty() ? LadderCache::defaultDir() : opts.cacheDir);
  a.results = {{"experiment", to_string(cfg.experiment)},
               {"map", cfg.mapId},
               {"observables", cfg.observables},
               {"method", to_string(cfg.method)},
               {"seed", cfg.seed},
               {"samples", cfg.samples},
               {"tolerances", {{"tolerance", cfg.tolerance}, {"tail_fraction", cfg.tailFraction}}}};
  try {
    const Context ctx(cfg, cache ? &*cache : nullptr, opts.threads);
    Outcome o = dispatch(ctx);
    a.status = statusOf(o.verdict);
    a.verdict = o.label.empty() ? to_string(o.verdict) : o.label;
    a.results["series"] = std::move(o.series);
    a.results["details"] = std::move(o.details);
    a.csv = std::move(o.csv);
  } catch (const Error& e) {
    a.status = 1;
    a.verdict = "error";
    a.error = e.what();
  } catch (const std::exception& e) {
    a.status = 1;
    a.verdict = "error";
    a.error = e.what();
  }
  a.results["verdict"] = a.verdict;
  if (a.error) a.results["error"] = *a.error;
  if (cache) a.cacheHits = cache->hits();
  a.finishedAt = utcNow();
  return a;
}

std::filesystem::path writeArtifact(const RunArtifact& a, const std::filesystem::path& outDir) {
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  const auto json = outDir / (a.name + ".artifact.json");
  {
    std::ofstream out(json);
    if (!out) fail(ErrorCode::Io, "cannot write " + json.string());
    out << a.toJson().dump(2) << "\n";
  }
  if (!a.csv.empty()) {
    std::ofstream out(outDir / (a.name + ".series.csv"));
    if (!out) fail(ErrorCode::Io, "cannot write series csv in " + outDir.string());
    out << a.csv;
  }
  return json;
}

std::string renderReport(const nlohmann::json& artifact) {
  const auto a = RunArtifact::fromJson(artifact);
  std::ostringstream os;
  os << "scenario   " << a.name << "\n";
  os << "experiment " << a.results.value("experiment", std::string("?")) << "\n";
  os << "map        " << a.results.value("map", std::string("-")) << "\n";
  os << "method     " << a.results.value("method", std::string("-")) << "\n";
  os << "seed       " << a.results.value("seed", 0ULL) << "\n";
  os << "verdict    " << a.verdict << " (status " << a.status << ")\n";
  os << "version    " << a.version << ", cache hits " << a.cacheHits << "\n";
  if (a.error) os << "error      " << *a.error << "\n";
  const auto it = a.results.find("series");
  if (it != a.results.end() && it->is_array() && !it->empty() && it->front().contains("estimate")) {
    os << "\n" << std::setw(8) << "n" << std::setw(24) << "estimate" << std::setw(16) << "error" << "\n";
    const std::size_t total = it->size();
    for (std::size_t i = 0; i < total; ++i) {
      // Long series: head and tail only.
      if (total > 24 && i == 12) {
        os << std::setw(8) << "..." << "\n";
        i = total - 12;
      }
      const auto& e = (*it)[i];
      std::ostringstream est;
      est.precision(12);
      est << e.at("estimate").get<double>();
      std::ostringstream err;
      err.precision(3);
      err << e.value("error", 0.0);
      os << std::setw(8) << e.value("n", 0L) << std::setw(24) << est.str() << std::setw(16) << err.str();
      if (e.contains("exact") && e.at("exact").is_string()) os << "  " << e.at("exact").get<std::string>();
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace infinimix
