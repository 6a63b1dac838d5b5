#include "infinimix/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "infinimix/errors.hpp"

namespace infinimix {
namespace {

// Branch locations whose domain meets [lo, hi).
std::vector<BranchLocation> locationsMeeting(const PiecewiseMap& map, double lo, double hi) {
  std::vector<BranchLocation> out;
  const auto& branches = map.branches();
  if (!map.lifted()) {
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const auto& d = branches[i].domain;
      if (std::max(lo, d.lo) < std::min(hi, d.hi)) out.push_back({i, 0});
    }
    return out;
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorCode::IntervalBlowup, "unbounded interval meets infinitely many cells");
  }
  const long first = static_cast<long>(std::floor(lo));
  const long last = static_cast<long>(std::floor(hi));
  for (long j = first; j <= last; ++j) {
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const BranchLocation at{i, j};
      const auto d = map.domainOf(at);
      if (std::max(lo, d.lo) < std::min(hi, d.hi)) out.push_back(at);
    }
  }
  return out;
}

// Locations whose image meets [lo, hi).
std::vector<BranchLocation> locationsHitting(const PiecewiseMap& map, double lo, double hi) {
  std::vector<BranchLocation> out;
  const auto& branches = map.branches();
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto& im = branches[i].image;
    if (!map.lifted()) {
      if (std::max(lo, im.lo) < std::min(hi, im.hi)) out.push_back({i, 0});
      continue;
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      fail(ErrorCode::IntervalBlowup, "unbounded set has infinitely many preimage components");
    }
    const long jlo = static_cast<long>(std::floor(lo - im.hi));
    const long jhi = static_cast<long>(std::ceil(hi - im.lo));
    for (long j = jlo; j <= jhi; ++j) {
      const BranchLocation at{i, j};
      const auto shifted = map.imageOf(at);
      if (std::max(lo, shifted.lo) < std::min(hi, shifted.hi)) out.push_back(at);
    }
  }
  return out;
}

struct PieceWalker {
  const PiecewiseMap& map;
  long depth;
  const std::function<void(const MonotonePiece&)>& visit;
  std::size_t maxPieces;
  std::size_t count = 0;
  std::vector<BranchLocation> chain;

  double pullToX(double y) const {
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) y = map.inverseThrough(*it, y);
    return y;
  }

  void walk(double xlo, double xhi, double ylo, double yhi, bool increasing, long level) {
    if (!(xlo < xhi)) return;
    if (level == depth) {
      if (++count > maxPieces) {
        std::ostringstream os;
        os << "more than " << maxPieces << " monotone pieces at depth " << depth;
        fail(ErrorCode::IntervalBlowup, os.str());
      }
      visit(MonotonePiece{xlo, xhi, ylo, yhi, increasing, chain});
      return;
    }
    for (const auto& at : locationsMeeting(map, ylo, yhi)) {
      const auto d = map.domainOf(at);
      const double s = std::max(ylo, d.lo);
      const double t = std::min(yhi, d.hi);
      if (!(s < t)) continue;
      const bool branchUp = map.branches()[at.branch].increasing;
      const double fs = map.forwardThrough(at, s);
      const double ft = map.forwardThrough(at, t);
      const double xs = (s == ylo) ? (increasing ? xlo : xhi) : pullToX(s);
      const double xt = (t == yhi) ? (increasing ? xhi : xlo) : pullToX(t);
      chain.push_back(at);
      walk(std::min(xs, xt), std::max(xs, xt), branchUp ? fs : ft, branchUp ? ft : fs,
           increasing == branchUp, level + 1);
      chain.pop_back();
    }
  }
};

}  // namespace

IntervalUnion normalizeUnion(IntervalUnion parts) {
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const Interval& i) { return !(i.lo < i.hi); }),
              parts.end());
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  IntervalUnion out;
  for (const auto& p : parts) {
    if (!out.empty() && p.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, p.hi);
    } else {
      out.push_back({p.lo, p.hi, true});
    }
  }
  return out;
}

double measureOf(const IntervalUnion& u) {
  double m = 0;
  for (const auto& i : u) m += i.hi - i.lo;
  return m;
}

IntervalUnion intersectUnions(const IntervalUnion& a, const IntervalUnion& b) {
  IntervalUnion out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (lo < hi) out.push_back({lo, hi, true});
    if (a[i].hi < b[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

double symmetricDifferenceMeasure(const IntervalUnion& a, const IntervalUnion& b) {
  // |A xor B| = |A| + |B| - 2|A and B|, evaluated piecewise to avoid
  // cancellation between large measures.
  std::vector<double> cuts;
  for (const auto& i : a) {
    cuts.push_back(i.lo);
    cuts.push_back(i.hi);
  }
  for (const auto& i : b) {
    cuts.push_back(i.lo);
    cuts.push_back(i.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto inside = [](const IntervalUnion& u, double x) {
    auto it = std::upper_bound(u.begin(), u.end(), x, [](double v, const Interval& i) { return v < i.lo; });
    if (it == u.begin()) return false;
    --it;
    return x >= it->lo && x < it->hi;
  };
  double m = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    if (inside(a, mid) != inside(b, mid)) m += cuts[k + 1] - cuts[k];
  }
  return m;
}

IntervalUnion pullback(const PiecewiseMap& map, const IntervalUnion& set, long n,
                       std::size_t maxComponents) {
  IntervalUnion current = normalizeUnion(set);
  for (long step = 0; step < n; ++step) {
    IntervalUnion next;
    for (const auto& piece : current) {
      for (const auto& at : locationsHitting(map, piece.lo, piece.hi)) {
        const auto im = map.imageOf(at);
        const double s = std::max(piece.lo, im.lo);
        const double t = std::min(piece.hi, im.hi);
        if (!(s < t)) continue;
        const double a = map.inverseThrough(at, s);
        const double b = map.inverseThrough(at, t);
        next.push_back({std::min(a, b), std::max(a, b), true});
        if (next.size() > maxComponents) {
          std::ostringstream os;
          os << "pullback exceeded " << maxComponents << " components at step " << step + 1;
          fail(ErrorCode::IntervalBlowup, os.str());
        }
      }
    }
    current = normalizeUnion(std::move(next));
  }
  return current;
}

double MonotonePiece::toX(const PiecewiseMap& map, double y) const {
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) y = map.inverseThrough(*it, y);
  return y;
}

double MonotonePiece::toY(const PiecewiseMap& map, double x) const {
  for (const auto& at : chain) x = map.forwardThrough(at, x);
  return x;
}

std::size_t forEachMonotonePiece(const PiecewiseMap& map, double a, double b, long n,
                                 const std::function<void(const MonotonePiece&)>& visit,
                                 std::size_t maxPieces) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    fail(ErrorCode::InvalidArgument, "monotone pieces need a finite nonempty range");
  }
  PieceWalker walker{map, n, visit, maxPieces, 0, {}};
  walker.walk(a, b, a, b, true, 0);
  return walker.count;
}

}  // namespace infinimix
