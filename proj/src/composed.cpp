#include "infinimix/composed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "infinimix/errors.hpp"
#include "infinimix/partition.hpp"
#include "infinimix/quadrature.hpp"

namespace infinimix {
namespace {

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

}  // namespace

LocalObservable restrictTo(const GlobalObservable& g, double lo, double hi) {
  if (!(lo < hi)) fail(ErrorCode::InvalidArgument, "empty window");
  LocalObservable w;
  std::ostringstream id;
  id << g.id << "@[" << lo << "," << hi << ")";
  w.id = id.str();
  w.eval = g.eval;
  w.support = {lo, hi, true};
  w.breakpoints = g.breaksIn(lo, hi);
  w.supBound = g.boundNorm;
  if (g.tags.piecewiseConstant) {
    std::vector<double> cuts = w.breakpoints;
    cuts.insert(cuts.begin(), lo);
    cuts.push_back(hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double v = g(0.5 * (cuts[i] + cuts[i + 1]));
      if (v != 0.0) w.pieces.push_back({cuts[i], cuts[i + 1], v});
    }
  }
  w.breakpoints.push_back(lo);
  w.breakpoints.push_back(hi);
  return w;
}

ComposedIntegral integrateComposed(const PiecewiseMap& map, const GlobalObservable& f, long n,
                                   const LocalObservable& weight, const ComposedOptions& opts) {
  ComposedIntegral out;
  const double lo = weight.support.lo;
  const double hi = weight.support.hi;
  if (!(lo < hi)) return out;
  const double total = hi - lo;
  const double rounding = static_cast<double>(8 * (n + 2)) * kUnitRoundoff;

  auto spend = [&](long evals) {
    out.evaluations += evals;
    if (out.evaluations > opts.budget) {
      std::ostringstream os;
      os << "composed integral of " << f.id << " at n=" << n << " exceeded " << opts.budget << " evaluations";
      fail(ErrorCode::QuadratureBudget, os.str());
    }
  };

  QuadratureOptions quad;
  quad.maxPieceWidth = 0;

  out.pieces = forEachMonotonePiece(map, lo, hi, n, [&](const MonotonePiece& piece) {
    auto xAt = [&](double y) {
      if (y == piece.ylo) return piece.increasing ? piece.xlo : piece.xhi;
      if (y == piece.yhi) return piece.increasing ? piece.xhi : piece.xlo;
      return piece.toX(map, y);
    };
    double ylo = piece.ylo;
    double yhi = piece.yhi;
    // Cut unbounded image tails once their x-extent is negligible.
    auto truncate = [&](bool upper) {
      const double xInf = (upper == piece.increasing) ? piece.xhi : piece.xlo;
      const double other = upper ? ylo : yhi;
      double y = std::max(1.0, std::isfinite(other) ? std::abs(other) : 1.0);
      for (int k = 0; k < 2000; ++k, y *= 2) {
        const double cut = upper ? y : -y;
        const double xCut = piece.toX(map, cut);
        const double tail = std::abs(xInf - xCut);
        if (tail <= opts.tailTol || !std::isfinite(y * 2)) {
          out.errorBound += f.boundNorm * weight.integrateAbs(std::min(xInf, xCut), std::max(xInf, xCut));
          return cut;
        }
      }
      return upper ? y : -y;
    };
    if (!std::isfinite(yhi)) yhi = truncate(true);
    if (!std::isfinite(ylo)) ylo = truncate(false);
    if (!(ylo < yhi)) return;

    std::vector<double> cuts = f.breaksIn(ylo, yhi);
    cuts.insert(cuts.begin(), ylo);
    cuts.push_back(yhi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double s = cuts[i];
      const double t = cuts[i + 1];
      const bool first = (i == 0 && ylo == piece.ylo);
      const bool last = (i + 2 == cuts.size() && yhi == piece.yhi);
      const double xs = first ? xAt(piece.ylo) : piece.toX(map, s);
      const double xt = last ? xAt(piece.yhi) : piece.toX(map, t);
      const double a = std::min(xs, xt);
      const double b = std::max(xs, xt);
      if (!(a < b)) continue;
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (f.tags.piecewiseConstant) {
        spend(1);
        const double v = f(0.5 * (s + t));
        out.value += v * weight.integrate(a, b);
        out.errorBound += std::abs(v) * weight.supBound * rounding * scale;
      } else {
        quad.absTol = std::max(opts.absTol * (b - a) / total, 1e-300);
        quad.budget = opts.budget - out.evaluations;
        std::vector<double> wb;
        for (double c : weight.breakpoints) {
          if (c > a && c < b) wb.push_back(c);
        }
        const auto r = integrate([&](double x) { return f(piece.toY(map, x)) * weight(x); }, a, b, wb, quad);
        spend(r.evaluations);
        out.value += r.value;
        out.errorBound += r.errorEstimate + f.boundNorm * weight.supBound * rounding * scale;
      }
    }
  });
  return out;
}

ComposedIntegral integrateComposedWindow(const PiecewiseMap& map, const GlobalObservable& f, long n,
                                         const GlobalObservable& g, double lo, double hi,
                                         const ComposedOptions& opts) {
  if (map.lifted() && f.tags.periodic && g.tags.periodic) {
    const long period = std::lcm(*f.tags.periodic, *g.tags.periodic);
    const double p = static_cast<double>(period);
    const double full = std::floor((hi - lo) / p);
    if (full >= 2) {
      // T commutes with integer shifts, so x -> F(T^n x) G(x) has period `period`.
      const auto one = integrateComposed(map, f, n, restrictTo(g, lo, lo + p), opts);
      ComposedIntegral out = one;
      out.value = full * one.value;
      out.errorBound = full * one.errorBound;
      const double rest = lo + full * p;
      if (rest < hi) {
        const auto tail = integrateComposed(map, f, n, restrictTo(g, rest, hi), opts);
        out.value += tail.value;
        out.errorBound += tail.errorBound;
        out.evaluations += tail.evaluations;
        out.pieces += tail.pieces;
      }
      return out;
    }
  }
  return integrateComposed(map, f, n, restrictTo(g, lo, hi), opts);
}

}  // namespace infinimix
