#include "infinimix/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "infinimix/errors.hpp"
#include "infinimix/quadrature.hpp"

namespace infinimix {
namespace {

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

struct TreeSum {
  double signedSum = 0.0;
  double absSum = 0.0;  // sum of |terms|, i.e. P^n|g|(x)
};

class PreimageTree {
 public:
  PreimageTree(const PiecewiseMap& map, const LocalObservable& g) : map_(map), g_(g) {
    if (auto d = map.displacement()) displacement_ = d;
  }

  TreeSum sum(double y, long remaining) const {
    TreeSum out;
    walk(y, remaining, 1.0, out);
    return out;
  }

 private:
  void walk(double y, long remaining, double weight, TreeSum& out) const {
    if (remaining == 0) {
      const double v = g_(y);
      out.signedSum += weight * v;
      out.absSum += weight * std::abs(v);
      return;
    }
    if (weight < 1e-300) return;
    if (displacement_) {
      // Any point with T^r(z) = y satisfies y - z in [r*dlo, r*dhi].
      const double r = static_cast<double>(remaining);
      const double lo = y - r * displacement_->second;
      const double hi = y - r * displacement_->first;
      if (hi < g_.support.lo || lo > g_.support.hi) return;
    }
    for (const auto& p : map_.preimages(y)) walk(p.x, remaining - 1, weight * p.weight, out);
  }

  const PiecewiseMap& map_;
  const LocalObservable& g_;
  std::optional<std::pair<double, double>> displacement_;
};

// Two-point Gauss-Legendre on every cell of the grid.
template <class F>
std::pair<double, double> gridIntegral(const std::vector<double>& grid, F&& f) {
  constexpr double kNode = 0.5773502691896257645;
  double a = 0;
  double b = 0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double mid = 0.5 * (grid[i] + grid[i + 1]);
    const double half = 0.5 * (grid[i + 1] - grid[i]);
    const auto l = f(mid - half * kNode);
    const auto r = f(mid + half * kNode);
    a += half * (l.first + r.first);
    b += half * (l.second + r.second);
  }
  return {a, b};
}

void appendUniform(std::vector<double>& grid, double lo, double hi, double step) {
  const auto count = static_cast<long>(std::ceil((hi - lo) / step));
  for (long i = 0; i < count; ++i) grid.push_back(lo + (hi - lo) * static_cast<double>(i) / count);
}

}  // namespace

LatticeLadder::LatticeLadder(JumpLaw law, LatticeMeasure start, long startN, long floatSwitchover)
    : law_(std::move(law)), exact_(std::move(start)), n_(startN), switchover_(floatSwitchover) {
  if (switchover_ >= 0 && n_ >= switchover_) approx_ = FloatLatticeMeasure::from(exact_);
}

void LatticeLadder::advanceTo(long n) {
  if (n < n_) fail(ErrorCode::InvalidArgument, "lattice ladders only move forward");
  if (!approx_ && source_ && n > n_) {
    const long reach = switchover_ >= 0 ? std::min(n, switchover_) : n;
    if (auto hit = source_(reach, n_); hit && hit->first > n_) {
      exact_ = std::move(hit->second);
      n_ = hit->first;
      if (switchover_ >= 0 && n_ >= switchover_) approx_ = FloatLatticeMeasure::from(exact_);
    }
  }
  while (n_ < n) {
    if (approx_) {
      approx_ = approx_->pushed(law_);
    } else {
      exact_ = exact_.pushed(law_);
    }
    ++n_;
    ++steps_;
    if (!approx_ && observer_) observer_(n_, exact_);
    if (!approx_ && switchover_ >= 0 && n_ >= switchover_) {
      approx_ = FloatLatticeMeasure::from(exact_);
    }
  }
}

TransferEngine::TransferEngine(MapPtr map, TransferMode mode, long depthLimit)
    : map_(std::move(map)), mode_(mode), depthLimit_(depthLimit) {
  if (mode_ == TransferMode::ExactLattice && !map_->latticeJumpLaw()) {
    fail(ErrorCode::MethodMismatch, "exact lattice mode needs a map with a lattice jump law (" + map_->id() + ")");
  }
}

TransferEngine TransferEngine::automatic(MapPtr map) {
  const bool lattice = map->latticeJumpLaw().has_value();
  return TransferEngine(std::move(map), lattice ? TransferMode::ExactLattice : TransferMode::PreimageSum);
}

LatticeMeasure TransferEngine::applyLattice(const LatticeMeasure& g, long n) const {
  if (mode_ != TransferMode::ExactLattice) fail(ErrorCode::MethodMismatch, "applyLattice needs exact lattice mode");
  if (n < 0) fail(ErrorCode::InvalidArgument, "negative power");
  LatticeMeasure m = g;
  const auto& law = *map_->latticeJumpLaw();
  for (long i = 0; i < n; ++i) m = m.pushed(law);
  return m;
}

LatticeLadder TransferEngine::ladder(const LatticeMeasure& g, const std::string& key, long firstN) const {
  if (!map_->latticeJumpLaw()) fail(ErrorCode::MethodMismatch, "lattice ladder needs a lattice jump law");
  const auto& law = *map_->latticeJumpLaw();
  const std::string fullKey = map_->id() + "|" + key;
  LatticeLadder l(law, g, 0, floatSwitchover_);
  if (store_) {
    LadderStore* store = store_;
    store->offer(fullKey, 0, g);
    l.onRung([store, fullKey](long n, const LatticeMeasure& m) { store->offer(fullKey, n, m); });
    // Stored rungs are only used up to the float switchover, so results do
    // not depend on what the cache holds.
    l.source([store, fullKey](long n, long after) { return store->lookup(fullKey, n, after); });
    l.advanceTo(floatSwitchover_ >= 0 ? std::min(firstN, floatSwitchover_) : firstN);
  }
  return l;
}

SignedDensityValue TransferEngine::evalPointwise(const LocalObservable& g, long n, double x) const {
  if (n < 0) fail(ErrorCode::InvalidArgument, "negative power");
  if (n > depthLimit_) {
    std::ostringstream os;
    os << "preimage tree depth " << n << " exceeds limit " << depthLimit_;
    fail(ErrorCode::DepthExceeded, os.str());
  }
  if (n == 0) return {g(x), 0.0};
  const PreimageTree tree(*map_, g);
  const TreeSum s = tree.sum(x, n);
  // Each leaf weight is a product of n rounded reciprocals of rounded derivatives.
  const double rel = static_cast<double>(4 * n + 4) * kUnitRoundoff;
  return {s.signedSum, rel * s.absSum};
}

std::optional<Rational> couplingExact(const GlobalObservable& f, const LocalObservable& g) {
  if (!g.latticeForm || !f.exactCell) return std::nullopt;
  return g.latticeForm->pair(f.exactCell);
}

double coupling(const GlobalObservable& f, const LocalObservable& g) {
  if (auto exact = couplingExact(f, g)) return exact->get_d();
  const double lo = g.support.lo;
  const double hi = g.support.hi;
  std::vector<double> breaks = f.breaksIn(lo, hi);
  breaks.insert(breaks.end(), g.breakpoints.begin(), g.breakpoints.end());
  for (const auto& p : g.pieces) {
    breaks.push_back(p.lo);
    breaks.push_back(p.hi);
  }
  QuadratureOptions opts;
  opts.absTol = 1e-10;
  return integrate([&](double x) { return f(x) * g(x); }, lo, hi, breaks, opts).value;
}

LinSeries linNorm(const TransferEngine& engine, const LocalObservable& g, const std::vector<long>& nList) {
  if (std::abs(g.integral) > 1e-12) {
    std::ostringstream os;
    os << g.id << " has integral " << g.integral << "; Lin's criterion needs mean zero";
    fail(ErrorCode::NotMeanZero, os.str());
  }
  if (!std::is_sorted(nList.begin(), nList.end())) fail(ErrorCode::InvalidArgument, "nList must be increasing");
  LinSeries out;
  if (engine.mode() == TransferMode::ExactLattice) {
    if (!g.latticeForm) fail(ErrorCode::MethodMismatch, "exact Lin series needs a lattice density");
    if (g.latticeForm->total() != 0) fail(ErrorCode::NotMeanZero, g.id + " has nonzero exact mass");
    auto ladder = engine.ladder(*g.latticeForm, g.id, nList.empty() ? 0 : nList.front());
    out.exactArithmetic = true;
    for (long n : nList) {
      ladder.advanceTo(n);
      LinPoint p{n, 0.0, 0.0, 0.0, std::nullopt};
      if (ladder.exact()) {
        p.exact = ladder.exactMeasure().l1();
        p.norm = p.exact->get_d();
      } else {
        out.exactArithmetic = false;
        const auto& m = ladder.floatMeasure();
        p.norm = m.l1();
        p.errorBound = m.errorBound + m.l1RoundingBound();
      }
      out.points.push_back(std::move(p));
    }
  } else {
    const auto& map = engine.map();
    for (long n : nList) {
      if (n > engine.depthLimit()) fail(ErrorCode::DepthExceeded, "Lin series beyond preimage depth limit");
      const PreimageTree tree(map, g);
      auto density = [&](double x) {
        const TreeSum s = n == 0 ? TreeSum{g(x), std::abs(g(x))} : tree.sum(x, n);
        return std::make_pair(std::abs(s.signedSum), s.absSum);
      };
      std::vector<double> grid;
      double norm = 0;
      double truncation = 0;
      if (auto d = map.displacement()) {
        const double r = static_cast<double>(n);
        appendUniform(grid, std::floor(g.support.lo + r * d->first), std::ceil(g.support.hi + r * d->second), 1.0 / 64);
        grid.push_back(std::ceil(g.support.hi + r * d->second));
        norm = gridIntegral(grid, density).first;
      } else {
        const double core = std::ceil(std::max(std::abs(g.support.lo), std::abs(g.support.hi))) + 4.0;
        for (double w = 4 * core;; w *= 2) {
          grid.clear();
          appendUniform(grid, -w, -core, 0.25);
          appendUniform(grid, -core, core, 1.0 / 64);
          appendUniform(grid, core, w, 0.25);
          grid.push_back(w);
          const auto [signedPart, absPart] = gridIntegral(grid, density);
          norm = signedPart;
          truncation = std::max(0.0, g.l1Norm - absPart);
          if (truncation < 1e-3 * g.l1Norm || w > 4096) break;
        }
      }
      out.points.push_back({n, norm, 0.0, truncation, std::nullopt});
    }
  }
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    const auto& a = out.points[i - 1];
    const auto& b = out.points[i];
    if (a.exact && b.exact) {
      if (*b.exact > *a.exact) out.nonIncreasing = false;
    } else if (b.norm - b.errorBound > a.norm + a.errorBound + a.truncationBound + 1e-12) {
      out.nonIncreasing = false;
    }
  }
  return out;
}

}  // namespace infinimix
