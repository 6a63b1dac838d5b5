#include "infinimix/mixing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "infinimix/errors.hpp"

namespace infinimix {
namespace {

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;
constexpr long kChunk = 1L << 15;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void requireSorted(const std::vector<long>& nList) {
  if (nList.empty()) fail(ErrorCode::InvalidArgument, "empty n list");
  if (nList.front() < 0) fail(ErrorCode::InvalidArgument, "negative n in n list");
  for (std::size_t i = 1; i < nList.size(); ++i) {
    if (nList[i] <= nList[i - 1]) fail(ErrorCode::InvalidArgument, "n list must be strictly increasing");
  }
}

CorrelationSeries exactLatticeSeries(const MapPtr& map, const GlobalObservable& f, const LocalObservable& g,
                                     const std::vector<long>& nList, const CorrelateOptions& opts) {
  if (!map->latticeJumpLaw()) {
    fail(ErrorCode::MethodMismatch, "exact lattice correlation needs a random-walk map, got " + map->id());
  }
  if (!g.latticeForm) fail(ErrorCode::MethodMismatch, "exact lattice correlation needs a lattice density, got " + g.id);
  TransferEngine engine(map, TransferMode::ExactLattice);
  engine.setFloatSwitchover(opts.floatSwitchover);
  engine.setLadderStore(opts.ladderStore);
  // P^n g is constant on cells, so only E(F | cells) matters.
  const GlobalObservable cells = f.exactCell ? f : projectToLattice(f);
  CorrelationSeries out;
  out.method = CorrelationMethod::ExactLattice;
  auto ladder = engine.ladder(*g.latticeForm, g.id, nList.front());
  for (long n : nList) {
    ladder.advanceTo(n);
    out.nValues.push_back(n);
    if (ladder.exact()) {
      const auto& m = ladder.exactMeasure();
      if (cells.exactCell) {
        const Rational r = m.pair(cells.exactCell);
        out.estimates.push_back(r.get_d());
        out.errorBounds.push_back(0.0);
        out.exact.push_back(r);
      } else {
        double absSum = 0;
        const double v = m.pairDouble([&](long c) {
          const double fc = cells.cellValue(c);
          absSum += std::abs(fc) * std::abs(m.massDouble(c));
          return fc;
        });
        const double l1 = m.l1().get_d();
        out.estimates.push_back(v);
        out.errorBounds.push_back(static_cast<double>(m.size() + 2) * kUnitRoundoff * absSum + 1e-10 * l1);
        out.exact.push_back(std::nullopt);
      }
    } else {
      const auto& m = ladder.floatMeasure();
      double v = 0;
      double absSum = 0;
      for (long c = m.offset; c < m.end(); ++c) {
        const double fc = cells.cellValue(c);
        v += fc * m.mass(c);
        absSum += std::abs(fc * m.mass(c));
      }
      out.estimates.push_back(v);
      out.errorBounds.push_back(cells.boundNorm * m.errorBound +
                                static_cast<double>(m.masses.size() + 2) * kUnitRoundoff * absSum +
                                (cells.exactCell ? 0.0 : 1e-10 * m.l1()));
      out.exact.push_back(std::nullopt);
    }
  }
  return out;
}

CorrelationSeries quadratureSeries(const MapPtr& map, const GlobalObservable& f, const LocalObservable& g,
                                   const std::vector<long>& nList, const CorrelateOptions& opts) {
  CorrelationSeries out;
  out.method = CorrelationMethod::Quadrature;
  for (long n : nList) {
    ComposedIntegral r;
    try {
      r = integrateComposed(*map, f, n, g, opts.quadrature);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "quadrature correlation at n=" << n << ": " << e.what();
      fail(e.code(), os.str());
    }
    out.nValues.push_back(n);
    out.estimates.push_back(r.value);
    out.errorBounds.push_back(r.errorBound);
    out.exact.push_back(std::nullopt);
  }
  return out;
}

struct ChunkSums {
  std::vector<double> sum;
  std::vector<double> sumSq;
};

// Orbit of a linear random-walk map with the fractional part held as a 64-bit
// fixed-point number. Each step consumes the leading base-k digit and appends
// a fresh uniform one at the bottom, which reproduces the law of the exact
// orbit of a uniformly distributed point.
class FixedPointWalk {
 public:
  FixedPointWalk(long k1, long k2) : k1_(k1), k_(static_cast<std::uint64_t>(k2 - k1)) {}

  void start(double x, std::mt19937_64& rng) {
    const double c = std::floor(x);
    cell_ = static_cast<long>(c);
    const double u = x - c;
    frac_ = static_cast<std::uint64_t>(std::ldexp(u, 64));
    frac_ |= rng() & 0x7ffULL;
  }

  void step(std::mt19937_64& rng) {
    const std::uint64_t digit = rng() % k_;
    const unsigned __int128 p = static_cast<unsigned __int128>(frac_) * k_ + digit;
    cell_ += k1_ + static_cast<long>(p >> 64);
    frac_ = static_cast<std::uint64_t>(p);
  }

  double position() const { return static_cast<double>(cell_) + std::ldexp(static_cast<double>(frac_), -64); }

 private:
  long k1_;
  std::uint64_t k_;
  long cell_ = 0;
  std::uint64_t frac_ = 0;
};

CorrelationSeries monteCarloSeries(const MapPtr& map, const GlobalObservable& f, const LocalObservable& g,
                                   const std::vector<long>& nList, const MonteCarloOptions& mc) {
  if (mc.samples < 2) fail(ErrorCode::InvalidArgument, "Monte Carlo needs at least 2 samples");
  const AbsDensitySampler sampler(g);
  const long nMax = nList.back();
  const std::size_t m = nList.size();
  const long chunks = (mc.samples + kChunk - 1) / kChunk;
  std::vector<ChunkSums> results(static_cast<std::size_t>(chunks));
  const auto range = map->walkRange();
  const bool linearWalk = range && map->lifted() && map->branches().size() == 1;

  auto runChunk = [&](long c) {
    std::mt19937_64 rng(splitmix64(mc.seed ^ splitmix64(static_cast<std::uint64_t>(c))));
    const long count = std::min(kChunk, mc.samples - c * kChunk);
    ChunkSums sums{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    std::vector<double> vals(m);
    for (long s = 0; s < count; ++s) {
      for (int attempt = 0;; ++attempt) {
        auto [x, sign] = sampler.draw(rng);
        try {
          std::size_t next = 0;
          if (linearWalk) {
            FixedPointWalk walk(range->first, range->second);
            walk.start(x, rng);
            for (long n = 0; n <= nMax; ++n) {
              if (n > 0) walk.step(rng);
              if (nList[next] == n) vals[next++] = sign * f(walk.position());
            }
          } else {
            for (long n = 0; n <= nMax; ++n) {
              if (n > 0) x = (*map)(x);
              if (nList[next] == n) vals[next++] = sign * f(x);
            }
          }
          break;
        } catch (const Error& e) {
          // Singular orbits form a null set; draw again.
          if (e.code() != ErrorCode::SingularOrbit || attempt > 1000) throw;
        }
      }
      for (std::size_t i = 0; i < m; ++i) {
        sums.sum[i] += vals[i];
        sums.sumSq[i] += vals[i] * vals[i];
      }
    }
    results[static_cast<std::size_t>(c)] = std::move(sums);
  };

  unsigned threads = mc.threads ? mc.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<long>(threads, chunks));
  std::atomic<long> nextChunk{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  auto worker = [&] {
    for (long c; (c = nextChunk.fetch_add(1)) < chunks;) {
      try {
        runChunk(c);
      } catch (...) {
        std::lock_guard lock(failureMutex);
        if (!failure) failure = std::current_exception();
        nextChunk = chunks;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  CorrelationSeries out;
  out.method = CorrelationMethod::MonteCarlo;
  out.seed = mc.seed;
  out.samples = mc.samples;
  const double N = static_cast<double>(mc.samples);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0;
    double sumSq = 0;
    for (const auto& r : results) {
      sum += r.sum[i];
      sumSq += r.sumSq[i];
    }
    const double mean = sum / N;
    const double var = std::max(0.0, (sumSq - sum * mean) / (N - 1));
    out.nValues.push_back(nList[i]);
    out.estimates.push_back(g.l1Norm * mean);
    out.errorBounds.push_back(3.0 * g.l1Norm * std::sqrt(var / N));
    out.exact.push_back(std::nullopt);
  }
  return out;
}

nlohmann::json seriesArray(const CorrelationSeries& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < s.nValues.size(); ++i) {
    nlohmann::json e{{"n", s.nValues[i]}, {"estimate", s.estimates[i]}, {"error", s.errorBounds[i]}};
    if (s.exact[i]) e["exact"] = s.exact[i]->get_str();
    arr.push_back(std::move(e));
  }
  return arr;
}

Verdict combine(const std::vector<Verdict>& vs) {
  if (std::find(vs.begin(), vs.end(), Verdict::Fail) != vs.end()) return Verdict::Fail;
  if (std::find(vs.begin(), vs.end(), Verdict::Inconclusive) != vs.end()) return Verdict::Inconclusive;
  return Verdict::Pass;
}

}  // namespace

std::string to_string(CorrelationMethod m) {
  switch (m) {
    case CorrelationMethod::Auto: return "auto";
    case CorrelationMethod::ExactLattice: return "exact";
    case CorrelationMethod::Quadrature: return "quadrature";
    case CorrelationMethod::MonteCarlo: return "montecarlo";
  }
  return "unknown";
}

CorrelationMethod parseMethod(const std::string& name) {
  if (name == "auto") return CorrelationMethod::Auto;
  if (name == "exact") return CorrelationMethod::ExactLattice;
  if (name == "quadrature") return CorrelationMethod::Quadrature;
  if (name == "montecarlo" || name == "mc") return CorrelationMethod::MonteCarlo;
  fail(ErrorCode::Parse, "unknown method '" + name + "' (auto, exact, quadrature, montecarlo)");
}

Verdict judgeDeviation(double deviation, double error, double tol) {
  if (std::isnan(deviation) || error > 0.5 * tol) return Verdict::Inconclusive;
  return deviation <= tol + error ? Verdict::Pass : Verdict::Fail;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

nlohmann::json CorrelationSeries::toJson() const {
  nlohmann::json j{{"method", to_string(method)}, {"series", seriesArray(*this)}};
  if (seed) j["seed"] = *seed;
  if (samples) j["samples"] = samples;
  return j;
}

std::string CorrelationSeries::toCsv() const {
  std::ostringstream os;
  os.precision(17);
  os << "n,estimate,error_bound,method\n";
  for (std::size_t i = 0; i < nValues.size(); ++i) {
    os << nValues[i] << "," << estimates[i] << "," << errorBounds[i] << "," << to_string(method) << "\n";
  }
  return os.str();
}

CorrelationMethod resolveMethod(const PiecewiseMap& map, const LocalObservable& g, long nMax,
                                const CorrelateOptions& opts) {
  if (opts.method != CorrelationMethod::Auto) return opts.method;
  if (map.latticeJumpLaw() && g.latticeForm) return CorrelationMethod::ExactLattice;
  if (nMax <= opts.autoQuadratureDepth) return CorrelationMethod::Quadrature;
  return CorrelationMethod::MonteCarlo;
}

CorrelationSeries correlate(const MapPtr& map, const GlobalObservable& f, const LocalObservable& g,
                            const std::vector<long>& nList, const CorrelateOptions& opts) {
  requireSorted(nList);
  switch (resolveMethod(*map, g, nList.back(), opts)) {
    case CorrelationMethod::ExactLattice: return exactLatticeSeries(map, f, g, nList, opts);
    case CorrelationMethod::Quadrature: return quadratureSeries(map, f, g, nList, opts);
    case CorrelationMethod::MonteCarlo: return monteCarloSeries(map, f, g, nList, opts.mc);
    case CorrelationMethod::Auto: break;
  }
  fail(ErrorCode::MethodMismatch, "unresolved correlation method");
}

TailStats tailStats(const std::vector<double>& values, const std::vector<double>& errors, double target,
                    double tailFraction) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "tail of an empty series");
  const std::size_t len = values.size();
  const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tailFraction * static_cast<double>(len))));
  TailStats t;
  t.minValue = std::numeric_limits<double>::infinity();
  t.maxValue = -t.minValue;
  for (std::size_t i = len - std::min(tail, len); i < len; ++i) {
    const double dev = std::abs(values[i] - target);
    t.rawMean += values[i];
    t.mean += dev;
    t.max = std::max(t.max, dev);
    t.minValue = std::min(t.minValue, values[i]);
    t.maxValue = std::max(t.maxValue, values[i]);
    t.errorMax = std::max(t.errorMax, errors[i]);
  }
  const double k = static_cast<double>(std::min(tail, len));
  t.rawMean /= k;
  t.mean /= k;
  return t;
}

std::vector<LocalObservable> glm3Dictionary() {
  std::vector<LocalObservable> out;
  for (double c : {0.0, 1.0, -1.0, 5.0, -5.0, 25.0, -25.0}) {
    for (double w : {1.0, 4.0}) out.push_back(makeIndicatorDensity(c, c + w, false));
  }
  out.push_back(makeLatticeDensity(LatticeMeasure::fromMasses(0, {Rational(1), Rational(-1)})));
  return out;
}

nlohmann::json GlmReport::toJson() const {
  nlohmann::json ds = nlohmann::json::array();
  for (const auto& d : densities) {
    ds.push_back({{"id", d.id},
                  {"mu", d.mu},
                  {"l1", d.l1},
                  {"tail_mean_deviation", d.tail.mean},
                  {"tail_max_deviation", d.tail.max},
                  {"tail_error", d.tail.errorMax},
                  {"verdict", to_string(d.verdict)},
                  {"correlation", d.series.toJson()}});
  }
  return {{"dictionary", dictionary}, {"avgF", avgF},          {"tol", tol},
          {"densities", ds},          {"glm2", to_string(glm2)}, {"glm3_index", glm3Index}};
}

GlmReport glmVerdict(const MapPtr& map, const GlobalObservable& f, const std::vector<LocalObservable>& gSet,
                     double avgF, const std::vector<long>& nList, double tol, const CorrelateOptions& opts,
                     std::string dictionaryName) {
  if (gSet.empty()) fail(ErrorCode::InvalidArgument, "GLM verdict needs at least one local observable");
  GlmReport rep;
  rep.dictionary = std::move(dictionaryName);
  rep.avgF = avgF;
  rep.tol = tol;
  std::vector<Verdict> verdicts;
  for (const auto& g : gSet) {
    GlmDensityResult r{g.id, g.integral, g.l1Norm, correlate(map, f, g, nList, opts), {}, Verdict::Inconclusive};
    // The mean-zero case is the GLM1 branch: the target is 0.
    const double mu = std::abs(g.integral) <= 1e-12 ? 0.0 : g.integral;
    r.tail = tailStats(r.series.estimates, r.series.errorBounds, avgF * mu);
    r.verdict = judgeDeviation(r.tail.max, r.tail.errorMax, tol);
    verdicts.push_back(r.verdict);
    if (g.l1Norm > 0) rep.glm3Index = std::max(rep.glm3Index, r.tail.max / g.l1Norm);
    rep.densities.push_back(std::move(r));
  }
  rep.glm2 = combine(verdicts);
  return rep;
}

nlohmann::json LlmReport::toJson() const {
  return {{"tol", tol},
          {"tail_max", tail.max},
          {"tail_error", tail.errorMax},
          {"verdict", to_string(verdict)},
          {"correlation", series.toJson()}};
}

LlmReport llmVerdict(const MapPtr& map, const LocalObservable& f, const LocalObservable& g,
                     const std::vector<long>& nList, double tol, const CorrelateOptions& opts) {
  if (!(f.supBound > 0) && f.pieces.empty()) fail(ErrorCode::InvalidArgument, "LLM needs a bounded f");
  LlmReport rep;
  rep.series = correlate(map, asGlobal(f), g, nList, opts);
  rep.tail = tailStats(rep.series.estimates, rep.series.errorBounds, 0.0);
  rep.tol = tol;
  rep.verdict = judgeDeviation(rep.tail.max, rep.tail.errorMax, tol);
  return rep;
}

nlohmann::json GgmGrid::toJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < cells[i].size(); ++j) {
      const auto& c = cells[i][j];
      nlohmann::json e{{"n", nValues[j]}, {"deviation", c.deviation}, {"error", c.errorBound}};
      e["value"] = c.value ? nlohmann::json(*c.value) : nlohmann::json(nullptr);
      row.push_back(std::move(e));
    }
    rows.push_back({{"M", scales[i]}, {"entries", row}});
  }
  return {{"target", target}, {"grid", rows}, {"anti_diagonal", antiDiagonal}, {"corner_deviation", cornerDeviation}};
}

GgmGrid ggmGrid(const MapPtr& map, const GlobalObservable& f, const GlobalObservable& g, const ExhaustiveFamily& fam,
                const std::vector<long>& nList, std::optional<double> target, const CorrelateOptions& opts) {
  requireSorted(nList);
  GgmGrid grid;
  grid.scales = fam.scaleLadder;
  grid.nValues = nList;
  grid.target = target ? *target : estimateAvg(f, fam).estimate * estimateAvg(g, fam).estimate;
  const bool monteCarlo = opts.method == CorrelationMethod::MonteCarlo;
  for (double M : fam.scaleLadder) {
    std::vector<GgmCell> row;
    for (long n : nList) {
      GgmCell cell;
      bool first = true;
      try {
        for (const auto& w : fam.members(M)) {
          double value;
          double error;
          if (monteCarlo) {
            const auto local = restrictTo(g, w.lo, w.hi);
            if (local.pieces.empty() && !(local.supBound > 0)) continue;
            const auto s = monteCarloSeries(map, f, local, {n}, opts.mc);
            value = s.estimates.front() / w.measure();
            error = s.errorBounds.front() / w.measure();
          } else {
            const auto r = integrateComposedWindow(*map, f, n, g, w.lo, w.hi, opts.quadrature);
            value = r.value / w.measure();
            error = r.errorBound / w.measure();
          }
          if (first) cell.value = value;
          first = false;
          cell.errorBound = std::max(cell.errorBound, error);
          cell.deviation = std::max(cell.deviation, std::abs(value - grid.target));
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::QuadratureBudget && e.code() != ErrorCode::IntervalBlowup) throw;
        cell.value.reset();
        cell.deviation = std::numeric_limits<double>::quiet_NaN();
      }
      row.push_back(cell);
    }
    grid.cells.push_back(std::move(row));
  }
  const std::size_t diag = std::min(grid.scales.size(), nList.size());
  for (std::size_t i = 0; i < diag; ++i) grid.antiDiagonal.push_back(grid.cells[i][i].deviation);
  for (std::size_t i = grid.scales.size() / 2; i < grid.scales.size(); ++i) {
    for (std::size_t j = nList.size() / 2; j < nList.size(); ++j) {
      const double d = grid.cells[i][j].deviation;
      if (!std::isnan(d)) grid.cornerDeviation = std::max(grid.cornerDeviation, d);
    }
  }
  return grid;
}

nlohmann::json CoalescenceSeries::toJson() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : points) {
    nlohmann::json e{{"n", p.n}, {"delta", p.delta}, {"dominated", p.dominated}};
    e["bound"] = p.bound ? nlohmann::json(*p.bound) : nlohmann::json(nullptr);
    if (p.exactDelta) e["exact_delta"] = p.exactDelta->get_str();
    if (p.exactBound) e["exact_bound"] = p.exactBound->get_str();
    arr.push_back(std::move(e));
  }
  return {{"exact", exact}, {"bound_nonincreasing", boundNonIncreasing}, {"series", arr}};
}

CoalescenceSeries coalescenceTest(const MapPtr& map, const GlobalObservable& f, const LocalObservable& g,
                                  const LocalObservable& h, const std::vector<long>& nList,
                                  const CorrelateOptions& opts) {
  requireSorted(nList);
  if (std::abs(g.integral) < 1e-12 || std::abs(h.integral) < 1e-12) {
    fail(ErrorCode::ZeroMean, "coalescence needs densities with nonzero integral");
  }
  CoalescenceSeries out;
  const bool lattice = map->latticeJumpLaw() && g.latticeForm && h.latticeForm &&
                       (opts.method == CorrelationMethod::Auto || opts.method == CorrelationMethod::ExactLattice);
  if (!lattice) {
    const auto a = correlate(map, f, normalized(g), nList, opts);
    const auto b = correlate(map, f, normalized(h), nList, opts);
    for (std::size_t i = 0; i < nList.size(); ++i) {
      out.points.push_back({nList[i], std::abs(a.estimates[i] - b.estimates[i]), std::nullopt, std::nullopt,
                            std::nullopt, true});
    }
    return out;
  }
  const LatticeMeasure diff = g.latticeForm->scaled(Rational(1) / g.latticeForm->total()) -
                              h.latticeForm->scaled(Rational(1) / h.latticeForm->total());
  TransferEngine engine(map, TransferMode::ExactLattice);
  engine.setFloatSwitchover(opts.floatSwitchover);
  engine.setLadderStore(opts.ladderStore);
  const GlobalObservable cells = f.exactCell ? f : projectToLattice(f);
  const Rational fNorm(f.boundNorm);
  auto ladder = engine.ladder(diff, "coal:" + g.id + "|" + h.id, nList.front());
  out.exact = static_cast<bool>(cells.exactCell);
  for (long n : nList) {
    ladder.advanceTo(n);
    CoalescencePoint p{n, 0.0, std::nullopt, std::nullopt, std::nullopt, true};
    if (ladder.exact()) {
      const auto& m = ladder.exactMeasure();
      p.exactBound = m.l1() * fNorm;
      p.bound = p.exactBound->get_d();
      if (cells.exactCell) {
        p.exactDelta = abs(m.pair(cells.exactCell));
        p.delta = p.exactDelta->get_d();
        p.dominated = *p.exactDelta <= *p.exactBound;
      } else {
        p.delta = std::abs(m.pairDouble([&](long c) { return cells.cellValue(c); }));
        p.dominated = p.delta <= *p.bound * (1 + 1e-12) + 1e-10;
      }
    } else {
      out.exact = false;
      const auto& m = ladder.floatMeasure();
      double v = 0;
      for (long c = m.offset; c < m.end(); ++c) v += cells.cellValue(c) * m.mass(c);
      const double slack = f.boundNorm * (m.errorBound + m.l1RoundingBound());
      p.delta = std::abs(v);
      p.bound = m.l1() * f.boundNorm;
      p.dominated = p.delta <= *p.bound + 2 * slack;
    }
    out.points.push_back(std::move(p));
  }
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    const auto& a = out.points[i - 1];
    const auto& b = out.points[i];
    if (a.exactBound && b.exactBound) {
      if (*b.exactBound > *a.exactBound) out.boundNonIncreasing = false;
    } else if (*b.bound > *a.bound + 1e-12) {
      out.boundNonIncreasing = false;
    }
  }
  return out;
}

nlohmann::json EquilibriumEstimate::toJson() const {
  nlohmann::json tails = nlohmann::json::array();
  for (const auto& t : perDensityTails) {
    tails.push_back({{"id", t.id}, {"tail_mean", t.tailMean}, {"tail_spread", t.tailSpread}});
  }
  nlohmann::json ss = nlohmann::json::array();
  for (const auto& s : series) ss.push_back(s.toJson());
  return {{"rho_hat", rhoHat}, {"coalescence_defect", coalescenceDefect}, {"densities", tails}, {"correlations", ss}};
}

EquilibriumEstimate estimateRho(const MapPtr& map, const GlobalObservable& f, const std::vector<LocalObservable>& gSet,
                                const std::vector<long>& nList, double tailFraction, const CorrelateOptions& opts) {
  if (gSet.empty()) fail(ErrorCode::InvalidArgument, "rho estimate needs at least one density");
  EquilibriumEstimate est;
  for (const auto& g : gSet) {
    if (std::abs(g.integral) < 1e-12) fail(ErrorCode::ZeroMean, g.id + " has zero integral");
    auto s = correlate(map, f, g, nList, opts);
    std::vector<double> ratios;
    std::vector<double> errs;
    for (std::size_t i = 0; i < s.estimates.size(); ++i) {
      ratios.push_back(s.estimates[i] / g.integral);
      errs.push_back(s.errorBounds[i] / std::abs(g.integral));
    }
    const auto t = tailStats(ratios, errs, 0.0, tailFraction);
    est.perDensityTails.push_back({g.id, t.rawMean, t.maxValue - t.minValue});
    est.series.push_back(std::move(s));
  }
  for (const auto& t : est.perDensityTails) est.rhoHat += t.tailMean;
  est.rhoHat /= static_cast<double>(est.perDensityTails.size());
  for (const auto& a : est.perDensityTails) {
    for (const auto& b : est.perDensityTails) {
      est.coalescenceDefect = std::max(est.coalescenceDefect, std::abs(a.tailMean - b.tailMean));
    }
  }
  return est;
}

}  // namespace infinimix
