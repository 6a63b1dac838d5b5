#include "infinimix/observables.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "infinimix/errors.hpp"
#include "infinimix/quadrature.hpp"

namespace infinimix {
namespace {

constexpr long kMaxBreaks = 20'000'000;

long floorMod(long a, long m) {
  const long r = a % m;
  return r < 0 ? r + m : r;
}

std::string fmtNumber(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void integerBreaks(double lo, double hi, std::vector<double>& out) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) fail(ErrorCode::InvalidArgument, "breaks over an unbounded range");
  if (hi - lo > kMaxBreaks) fail(ErrorCode::QuadratureBudget, "too many cell breaks requested");
  for (double k = std::floor(lo) + 1; k < hi; k += 1.0) {
    if (k > lo) out.push_back(k);
  }
}

BreakFn periodicBreaks(long j, std::vector<double> profileBreaks) {
  if (profileBreaks.empty()) return {};
  return [j, pb = std::move(profileBreaks)](double lo, double hi, std::vector<double>& out) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) fail(ErrorCode::InvalidArgument, "breaks over an unbounded range");
    const double p = static_cast<double>(j);
    if ((hi - lo) / p * static_cast<double>(pb.size()) > kMaxBreaks) {
      fail(ErrorCode::QuadratureBudget, "too many periodic breaks requested");
    }
    for (double base = std::floor(lo / p) * p; base < hi; base += p) {
      for (double b : pb) {
        const double x = base + b;
        if (x > lo && x < hi) out.push_back(x);
      }
    }
  };
}

GlobalObservable latticeStep(std::string id, std::function<Rational(long)> exact,
                             std::function<double(long)> value, double bound) {
  GlobalObservable f;
  f.id = std::move(id);
  f.eval = [value](double x) { return value(static_cast<long>(std::floor(x))); };
  f.boundNorm = bound;
  f.tags.latticeStep = true;
  f.tags.piecewiseConstant = true;
  f.breaks = integerBreaks;
  f.exactCell = std::move(exact);
  return f;
}

long lcm(long a, long b) { return std::lcm(a, b); }

std::vector<ConstantPiece> mergePieces(const std::vector<ConstantPiece>& a, double ca,
                                       const std::vector<ConstantPiece>& b, double cb) {
  std::vector<double> cuts;
  for (const auto& p : a) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  for (const auto& p : b) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto valueAt = [](const std::vector<ConstantPiece>& ps, double x) {
    for (const auto& p : ps) {
      if (x >= p.lo && x < p.hi) return p.value;
    }
    return 0.0;
  };
  std::vector<ConstantPiece> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double v = ca * valueAt(a, mid) + cb * valueAt(b, mid);
    if (v != 0.0) out.push_back({cuts[i], cuts[i + 1], v});
  }
  return out;
}

void finishLocal(LocalObservable& g) {
  if (!g.pieces.empty()) {
    g.integral = 0;
    g.l1Norm = 0;
    g.supBound = 0;
    for (const auto& p : g.pieces) {
      g.integral += p.value * (p.hi - p.lo);
      g.l1Norm += std::abs(p.value) * (p.hi - p.lo);
      g.supBound = std::max(g.supBound, std::abs(p.value));
    }
    if (g.latticeForm) g.integral = g.latticeForm->total().get_d();
    return;
  }
  QuadratureOptions opts;
  opts.absTol = 1e-12;
  const auto& f = g.eval;
  g.integral = integrate(f, g.support.lo, g.support.hi, g.breakpoints, opts).value;
  g.l1Norm = integrate([&f](double x) { return std::abs(f(x)); }, g.support.lo, g.support.hi,
                       g.breakpoints, opts)
                 .value;
}

}  // namespace

std::vector<double> GlobalObservable::breaksIn(double lo, double hi) const {
  std::vector<double> out;
  if (breaks) breaks(lo, hi, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double LocalObservable::integrate(double a, double b) const {
  const double lo = std::max(a, support.lo);
  const double hi = std::min(b, support.hi);
  if (!(lo < hi)) return 0.0;
  if (!pieces.empty()) {
    double sum = 0;
    for (const auto& p : pieces) {
      const double s = std::max(lo, p.lo);
      const double t = std::min(hi, p.hi);
      if (s < t) sum += p.value * (t - s);
    }
    return sum;
  }
  QuadratureOptions opts;
  opts.absTol = 1e-12;
  return infinimix::integrate(eval, lo, hi, breakpoints, opts).value;
}

double LocalObservable::integrateAbs(double a, double b) const {
  const double lo = std::max(a, support.lo);
  const double hi = std::min(b, support.hi);
  if (!(lo < hi)) return 0.0;
  if (!pieces.empty()) {
    double sum = 0;
    for (const auto& p : pieces) {
      const double s = std::max(lo, p.lo);
      const double t = std::min(hi, p.hi);
      if (s < t) sum += std::abs(p.value) * (t - s);
    }
    return sum;
  }
  QuadratureOptions opts;
  opts.absTol = 1e-12;
  const auto& f = eval;
  return infinimix::integrate([&f](double x) { return std::abs(f(x)); }, lo, hi, breakpoints, opts).value;
}

GlobalObservable makeConstant(double c) {
  const Rational exact(c);
  auto f = latticeStep(c == 1.0 ? "one" : "const:" + fmtNumber(c), [exact](long) { return exact; },
                       [c](long) { return c; }, std::abs(c));
  f.eval = [c](double) { return c; };
  f.breaks = {};
  f.tags.periodic = 1;
  f.tags.uniformCesaroMean = true;
  f.tags.oddSymmetric = (c == 0.0);
  return f;
}

GlobalObservable makeOne() { return makeConstant(1.0); }

GlobalObservable makeSign() {
  GlobalObservable f;
  f.id = "sign";
  f.eval = [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); };
  f.boundNorm = 1.0;
  f.tags.oddSymmetric = true;
  f.tags.piecewiseConstant = true;
  f.breaks = [](double lo, double hi, std::vector<double>& out) {
    if (lo < 0.0 && hi > 0.0) out.push_back(0.0);
  };
  f.exactCell = [](long j) { return Rational(j >= 0 ? 1 : -1); };
  return f;
}

GlobalObservable makePeriodic(long j, std::function<double(double)> profile, double bound,
                              std::vector<double> profileBreaks, bool piecewiseConstant, std::string id) {
  if (j < 1) fail(ErrorCode::InvalidArgument, "period must be a positive integer");
  GlobalObservable f;
  f.id = id.empty() ? "periodic:" + std::to_string(j) : std::move(id);
  const double p = static_cast<double>(j);
  f.eval = [profile = std::move(profile), p](double x) {
    double u = x - p * std::floor(x / p);
    if (u >= p) u = 0.0;
    return profile(u);
  };
  f.boundNorm = bound;
  f.tags.periodic = j;
  f.tags.uniformCesaroMean = true;
  f.tags.piecewiseConstant = piecewiseConstant;
  f.breaks = periodicBreaks(j, std::move(profileBreaks));
  return f;
}

GlobalObservable makeCosine(long j) {
  const double p = static_cast<double>(j);
  auto f = makePeriodic(
      j, [p](double u) { return std::cos(2 * std::numbers::pi * u / p); }, 1.0, {}, false,
      "cos:" + std::to_string(j));
  if (j == 1) {
    // Every cell holds a full period.
    f.exactCell = [](long) { return Rational(0); };
  }
  return f;
}

GlobalObservable makeHalfCell(long j) {
  const double half = 0.5 * static_cast<double>(j);
  auto f = makePeriodic(
      j, [half](double u) { return u < half ? 1.0 : 0.0; }, 1.0, {0.0, half}, true,
      "halfcell:" + std::to_string(j));
  if (j == 1) f.exactCell = [](long) { return Rational(1, 2); };
  return f;
}

GlobalObservable makeCellPattern(const std::vector<Rational>& values) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "cell pattern needs at least one value");
  std::vector<double> dv;
  double bound = 0;
  std::ostringstream id;
  id << "cellpattern:";
  for (std::size_t i = 0; i < values.size(); ++i) {
    dv.push_back(values[i].get_d());
    bound = std::max(bound, std::abs(dv.back()));
    id << (i ? "," : "") << values[i].get_str();
  }
  const long p = static_cast<long>(values.size());
  auto f = latticeStep(
      id.str(), [values, p](long j) { return values[static_cast<std::size_t>(floorMod(j, p))]; },
      [dv, p](long j) { return dv[static_cast<std::size_t>(floorMod(j, p))]; }, bound);
  f.tags.periodic = p;
  f.tags.uniformCesaroMean = true;
  return f;
}

GlobalObservable makeCells(long lo, const std::vector<Rational>& values) {
  std::vector<double> dv;
  double bound = 0;
  std::ostringstream id;
  id << "cells:" << lo << ":";
  for (std::size_t i = 0; i < values.size(); ++i) {
    dv.push_back(values[i].get_d());
    bound = std::max(bound, std::abs(dv.back()));
    id << (i ? "," : "") << values[i].get_str();
  }
  const long hi = lo + static_cast<long>(values.size());
  auto f = latticeStep(
      id.str(),
      [values, lo, hi](long j) { return (j >= lo && j < hi) ? values[static_cast<std::size_t>(j - lo)] : Rational(0); },
      [dv, lo, hi](long j) { return (j >= lo && j < hi) ? dv[static_cast<std::size_t>(j - lo)] : 0.0; }, bound);
  f.tags.uniformCesaroMean = true;
  f.breaks = [lo, hi](double a, double b, std::vector<double>& out) {
    for (long k = std::max(lo, static_cast<long>(std::ceil(a))); k <= hi && k < b; ++k) {
      if (k > a) out.push_back(static_cast<double>(k));
    }
  };
  return f;
}

GlobalObservable makeDyadicFlip() {
  auto sgn = [](long j) {
    const unsigned long m = static_cast<unsigned long>(j < 0 ? -j : j) + 1;
    const int k = 63 - __builtin_clzl(m);
    return (k % 2 == 0) ? 1 : -1;
  };
  return latticeStep(
      "dyadicflip", [sgn](long j) { return Rational(sgn(j)); },
      [sgn](long j) { return static_cast<double>(sgn(j)); }, 1.0);
}

GlobalObservable asGlobal(const LocalObservable& g) {
  GlobalObservable f;
  f.id = g.id;
  f.eval = [g](double x) { return g(x); };
  f.boundNorm = g.supBound;
  f.tags.uniformCesaroMean = true;
  f.tags.piecewiseConstant = !g.pieces.empty();
  std::vector<double> cuts = g.breakpoints;
  cuts.push_back(g.support.lo);
  cuts.push_back(g.support.hi);
  for (const auto& p : g.pieces) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  f.breaks = [cuts](double lo, double hi, std::vector<double>& out) {
    for (double c : cuts) {
      if (c > lo && c < hi) out.push_back(c);
    }
  };
  if (g.latticeForm) {
    f.tags.latticeStep = true;
    f.exactCell = [m = *g.latticeForm](long j) { return m.mass(j); };
  }
  return f;
}

GlobalObservable add(const GlobalObservable& f, const GlobalObservable& g) {
  GlobalObservable h;
  h.id = f.id + "+" + g.id;
  h.eval = [a = f.eval, b = g.eval](double x) { return a(x) + b(x); };
  h.boundNorm = f.boundNorm + g.boundNorm;
  if (f.tags.periodic && g.tags.periodic) h.tags.periodic = lcm(*f.tags.periodic, *g.tags.periodic);
  h.tags.latticeStep = f.tags.latticeStep && g.tags.latticeStep;
  h.tags.oddSymmetric = f.tags.oddSymmetric && g.tags.oddSymmetric;
  h.tags.uniformCesaroMean = f.tags.uniformCesaroMean && g.tags.uniformCesaroMean;
  h.tags.piecewiseConstant = f.tags.piecewiseConstant && g.tags.piecewiseConstant;
  if (f.breaks || g.breaks) {
    h.breaks = [a = f.breaks, b = g.breaks](double lo, double hi, std::vector<double>& out) {
      if (a) a(lo, hi, out);
      if (b) b(lo, hi, out);
    };
  }
  if (f.exactCell && g.exactCell) {
    h.exactCell = [a = f.exactCell, b = g.exactCell](long j) { return Rational(a(j) + b(j)); };
  }
  return h;
}

GlobalObservable scale(const GlobalObservable& f, double c) {
  GlobalObservable h = f;
  h.id = fmtNumber(c) + "*" + f.id;
  h.eval = [a = f.eval, c](double x) { return c * a(x); };
  h.boundNorm = std::abs(c) * f.boundNorm;
  if (f.exactCell) {
    const Rational rc(c);
    h.exactCell = [a = f.exactCell, rc](long j) { return Rational(rc * a(j)); };
  }
  return h;
}

GlobalObservable projectToLattice(const GlobalObservable& f) {
  if (f.tags.latticeStep) return f;
  struct Cache {
    std::shared_mutex mutex;
    std::unordered_map<long, double> values;
  };
  auto cache = std::make_shared<Cache>();
  const std::optional<long> period = f.tags.periodic;
  auto cell = [cache, f, period](long j) -> double {
    const long key = period ? floorMod(j, *period) : j;
    {
      std::shared_lock lock(cache->mutex);
      const auto it = cache->values.find(key);
      if (it != cache->values.end()) return it->second;
    }
    double v;
    if (f.exactCell) {
      v = f.exactCell(key).get_d();
    } else {
      const double lo = static_cast<double>(key);
      QuadratureOptions opts;
      opts.absTol = 1e-10;
      try {
        v = integrate(f.eval, lo, lo + 1.0, f.breaksIn(lo, lo + 1.0), opts).value;
      } catch (const Error& e) {
        fail(e.code(), "projecting " + f.id + " on cell " + std::to_string(key) + ": " + e.detail());
      }
    }
    std::unique_lock lock(cache->mutex);
    cache->values.emplace(key, v);
    return v;
  };
  GlobalObservable h;
  h.id = "E[" + f.id + "|cells]";
  h.eval = [cell](double x) { return cell(static_cast<long>(std::floor(x))); };
  h.boundNorm = f.boundNorm;
  h.tags = f.tags;
  h.tags.latticeStep = true;
  h.tags.piecewiseConstant = true;
  h.breaks = integerBreaks;
  h.exactCell = f.exactCell;
  return h;
}

CesaroResult cesaroMean(const GlobalObservable& f, const std::vector<long>& qGrid, long jMax) {
  if (jMax < 1) fail(ErrorCode::InvalidArgument, "cesaroMean needs jMax >= 1");
  if (qGrid.empty()) fail(ErrorCode::InvalidArgument, "cesaroMean needs a nonempty q grid");
  std::vector<double> means;
  for (long q : qGrid) {
    double integral;
    if (f.exactCell) {
      Rational sum = 0;
      for (long c = q - jMax; c < q + jMax; ++c) sum += f.exactCell(c);
      integral = sum.get_d();
    } else if (f.tags.latticeStep) {
      integral = 0;
      for (long c = q - jMax; c < q + jMax; ++c) integral += f.cellValue(c);
    } else {
      const double lo = static_cast<double>(q - jMax);
      const double hi = static_cast<double>(q + jMax);
      QuadratureOptions opts;
      opts.absTol = 1e-10 * (hi - lo);
      opts.budget = 10'000'000;
      integral = integrate(f.eval, lo, hi, f.breaksIn(lo, hi), opts).value;
    }
    means.push_back(integral / (2.0 * static_cast<double>(jMax)));
  }
  double value = 0;
  for (double m : means) value += m;
  value /= static_cast<double>(means.size());
  double defect = 0;
  for (double m : means) defect = std::max(defect, std::abs(m - value));
  return {value, defect};
}

LocalObservable makeIndicatorDensity(double a, double b, bool normalize) {
  if (!(a < b)) fail(ErrorCode::InvalidArgument, "indicator needs a < b");
  LocalObservable g;
  std::ostringstream id;
  id << (normalize ? "density:" : "indicator:") << a << ":" << b;
  g.id = id.str();
  const double v = normalize ? 1.0 / (b - a) : 1.0;
  g.eval = [v](double) { return v; };
  g.support = {a, b, true};
  g.pieces = {{a, b, v}};
  g.breakpoints = {a, b};
  if (a == std::floor(a) && b == std::floor(b) && std::abs(a) < 1e15 && std::abs(b) < 1e15) {
    const long lo = static_cast<long>(a);
    const long hi = static_cast<long>(b);
    const Rational mass = normalize ? Rational(1, hi - lo) : Rational(1);
    g.latticeForm = LatticeMeasure::fromMasses(lo, std::vector<Rational>(static_cast<std::size_t>(hi - lo), mass));
  }
  finishLocal(g);
  return g;
}

LocalObservable makeLatticeDensity(const LatticeMeasure& m) {
  const auto t = m.trimmed();
  if (t.empty()) fail(ErrorCode::InvalidArgument, "lattice density with no mass");
  LocalObservable g;
  std::ostringstream id;
  id << "cells:" << t.offset() << ":";
  for (long c = t.offset(); c < t.end(); ++c) id << (c == t.offset() ? "" : ",") << t.mass(c).get_str();
  g.id = id.str();
  std::vector<double> values;
  for (long c = t.offset(); c < t.end(); ++c) {
    values.push_back(t.massDouble(c));
    if (values.back() != 0.0) {
      g.pieces.push_back({static_cast<double>(c), static_cast<double>(c + 1), values.back()});
    }
    g.breakpoints.push_back(static_cast<double>(c));
  }
  g.breakpoints.push_back(static_cast<double>(t.end()));
  const long lo = t.offset();
  g.eval = [values, lo](double x) {
    const long c = static_cast<long>(std::floor(x)) - lo;
    return (c >= 0 && c < static_cast<long>(values.size())) ? values[static_cast<std::size_t>(c)] : 0.0;
  };
  g.support = {static_cast<double>(t.offset()), static_cast<double>(t.end()), true};
  g.latticeForm = t;
  finishLocal(g);
  return g;
}

LocalObservable makeTriangular(double a, double peak, double b) {
  if (!(a < peak && peak < b)) fail(ErrorCode::InvalidArgument, "triangular density needs a < peak < b");
  LocalObservable g;
  std::ostringstream id;
  id << "triangle:" << a << ":" << peak << ":" << b;
  g.id = id.str();
  const double h = 2.0 / (b - a);
  g.eval = [a, peak, b, h](double x) {
    if (x < a || x >= b) return 0.0;
    return x < peak ? h * (x - a) / (peak - a) : h * (b - x) / (b - peak);
  };
  g.support = {a, b, true};
  g.breakpoints = {a, peak, b};
  finishLocal(g);
  g.supBound = h;
  return g;
}

LocalObservable makeGaussBump(double center, double width) {
  if (!(width > 0)) fail(ErrorCode::InvalidArgument, "gauss width must be positive");
  LocalObservable g;
  std::ostringstream id;
  id << "gauss:" << center << ":" << width;
  g.id = id.str();
  const double z = std::erf(8.0 / std::numbers::sqrt2);
  const double peak = 1.0 / (width * std::sqrt(2 * std::numbers::pi) * z);
  g.eval = [center, width, peak](double x) {
    const double u = (x - center) / width;
    return peak * std::exp(-0.5 * u * u);
  };
  g.support = {center - 8 * width, center + 8 * width, true};
  finishLocal(g);
  g.supBound = peak;
  return g;
}

LocalObservable add(const LocalObservable& f, const LocalObservable& g) {
  LocalObservable h;
  h.id = f.id + "+" + g.id;
  h.support = {std::min(f.support.lo, g.support.lo), std::max(f.support.hi, g.support.hi), true};
  h.eval = [f, g](double x) { return f(x) + g(x); };
  h.breakpoints = f.breakpoints;
  h.breakpoints.insert(h.breakpoints.end(), g.breakpoints.begin(), g.breakpoints.end());
  h.breakpoints.push_back(f.support.lo);
  h.breakpoints.push_back(f.support.hi);
  h.breakpoints.push_back(g.support.lo);
  h.breakpoints.push_back(g.support.hi);
  std::sort(h.breakpoints.begin(), h.breakpoints.end());
  h.breakpoints.erase(std::unique(h.breakpoints.begin(), h.breakpoints.end()), h.breakpoints.end());
  if (!f.pieces.empty() && !g.pieces.empty()) h.pieces = mergePieces(f.pieces, 1.0, g.pieces, 1.0);
  if (f.latticeForm && g.latticeForm) h.latticeForm = *f.latticeForm + *g.latticeForm;
  finishLocal(h);
  if (h.pieces.empty()) h.supBound = f.supBound + g.supBound;
  return h;
}

LocalObservable scale(const LocalObservable& f, double c) {
  LocalObservable h = f;
  h.id = fmtNumber(c) + "*" + f.id;
  h.eval = [e = f.eval, c](double x) { return c * e(x); };
  for (auto& p : h.pieces) p.value *= c;
  if (f.latticeForm) h.latticeForm = f.latticeForm->scaled(Rational(c));
  h.integral = c * f.integral;
  h.l1Norm = std::abs(c) * f.l1Norm;
  h.supBound = std::abs(c) * f.supBound;
  return h;
}

LocalObservable normalized(const LocalObservable& f) {
  if (std::abs(f.integral) < 1e-12) fail(ErrorCode::ZeroMean, f.id + " has zero integral");
  if (f.latticeForm) {
    // Divide exactly so that the lattice form keeps rational masses.
    LocalObservable h = scale(f, 1.0 / f.integral);
    h.latticeForm = f.latticeForm->scaled(Rational(1) / f.latticeForm->total());
    h.integral = 1.0;
    return h;
  }
  return scale(f, 1.0 / f.integral);
}

AbsDensitySampler::AbsDensitySampler(const LocalObservable& g) : g_(&g), pieces_(g.pieces) {
  double acc = 0;
  for (const auto& p : pieces_) {
    acc += std::abs(p.value) * (p.hi - p.lo);
    cumulative_.push_back(acc);
  }
  if (pieces_.empty() && !(g.supBound > 0)) {
    fail(ErrorCode::InvalidArgument, "cannot sample " + g.id + " without a sup bound");
  }
}

std::pair<double, double> AbsDensitySampler::draw(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (!pieces_.empty()) {
    const double target = unit(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    const auto& p = pieces_[static_cast<std::size_t>(it - cumulative_.begin())];
    const double x = p.lo + unit(rng) * (p.hi - p.lo);
    return {x, p.value > 0 ? 1.0 : -1.0};
  }
  const auto& s = g_->support;
  for (;;) {
    const double x = s.lo + unit(rng) * (s.hi - s.lo);
    const double v = (*g_)(x);
    if (unit(rng) * g_->supBound < std::abs(v)) return {x, v > 0 ? 1.0 : -1.0};
  }
}

}  // namespace infinimix
