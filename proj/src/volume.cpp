#include "infinimix/volume.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "infinimix/composed.hpp"
#include "infinimix/errors.hpp"
#include "infinimix/partition.hpp"
#include "infinimix/quadrature.hpp"

namespace infinimix {
namespace {

double plainIntegral(const GlobalObservable& f, double lo, double hi, double tol) {
  QuadratureOptions opts;
  opts.absTol = tol;
  opts.maxPieceWidth = f.tags.piecewiseConstant ? 0.0 : 1.0;
  return integrate(f.eval, lo, hi, f.breaksIn(lo, hi), opts).value;
}

IvLimitReport buildReport(const std::function<double(const Window&)>& average, const ExhaustiveFamily& fam,
                          double tol) {
  if (fam.scaleLadder.size() < 4) fail(ErrorCode::InvalidArgument, "infinite-volume estimate needs >= 4 scales");
  if (!std::is_sorted(fam.scaleLadder.begin(), fam.scaleLadder.end())) {
    fail(ErrorCode::InvalidArgument, "scale ladder must be increasing");
  }
  std::vector<std::vector<double>> averages;
  for (double M : fam.scaleLadder) {
    std::vector<double> row;
    for (const auto& w : fam.members(M)) row.push_back(average(w));
    averages.push_back(std::move(row));
  }
  IvLimitReport rep;
  rep.tol = tol;
  const auto& top = averages.back();
  for (double a : top) rep.estimate += a;
  rep.estimate /= static_cast<double>(top.size());
  // defect(M) = sup over members with scale >= M; walk down from the top.
  std::vector<double> defects(averages.size(), 0.0);
  double running = 0.0;
  for (std::size_t i = averages.size(); i-- > 0;) {
    for (double a : averages[i]) running = std::max(running, std::abs(a - rep.estimate));
    defects[i] = running;
  }
  for (std::size_t i = 0; i < defects.size(); ++i) rep.defectSeries.push_back({fam.scaleLadder[i], defects[i]});

  const std::size_t k = defects.size();
  bool settling = true;
  for (std::size_t i = k - 3; i + 1 < k; ++i) {
    if (defects[i + 1] > defects[i] + kAvgNoiseFloor) settling = false;
  }
  bool stuck = true;
  for (std::size_t i = k - 3; i < k; ++i) {
    if (defects[i] < 10 * tol) stuck = false;
  }
  if (defects.back() <= tol && settling) {
    rep.verdict = IvVerdict::Converged;
  } else if (stuck) {
    rep.verdict = IvVerdict::NotUniform;
  } else {
    rep.verdict = IvVerdict::Inconclusive;
  }
  return rep;
}

}  // namespace

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::SymmetricIntervals: return "symmetric";
    case FamilyKind::TranslatedIntervals: return "translated";
    case FamilyKind::CellAligned: return "cellaligned";
  }
  return "unknown";
}

std::string to_string(IvVerdict v) {
  switch (v) {
    case IvVerdict::Converged: return "converged";
    case IvVerdict::NotUniform: return "not-uniform";
    case IvVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::vector<Window> ExhaustiveFamily::members(double M) const {
  if (!(M > 0)) fail(ErrorCode::InvalidArgument, "window scale must be positive");
  std::vector<Window> out;
  switch (kind) {
    case FamilyKind::SymmetricIntervals:
      out.push_back({-M, M});
      break;
    case FamilyKind::TranslatedIntervals:
      for (double a : probeGrid) {
        const double c = probesScaleWithM ? a * M : a;
        out.push_back({c - M, c + M});
      }
      break;
    case FamilyKind::CellAligned: {
      const double j = std::max(1.0, std::round(M));
      for (double a : probeGrid) {
        const double q = std::round(probesScaleWithM ? a * M : a);
        out.push_back({q - j, q + j});
      }
      break;
    }
  }
  return out;
}

nlohmann::json IvLimitReport::toJson() const {
  nlohmann::json ladder = nlohmann::json::array();
  for (const auto& p : defectSeries) ladder.push_back({{"M", p.M}, {"defect", p.defect}});
  return {{"estimate", estimate}, {"tol", tol}, {"ladder", ladder}, {"verdict", to_string(verdict)}};
}

double windowAverage(const GlobalObservable& f, const Window& v) {
  const double mu = v.measure();
  if (!(mu > 0) || !std::isfinite(mu)) fail(ErrorCode::InvalidArgument, "window must have finite positive measure");
  const double tol = 1e-9 * mu;
  if (f.tags.periodic) {
    const double p = static_cast<double>(*f.tags.periodic);
    const double full = std::floor(mu / p);
    if (full >= 2) {
      const double one = plainIntegral(f, v.lo, v.lo + p, tol / (full + 1));
      const double rest = v.lo + full * p;
      const double tail = rest < v.hi ? plainIntegral(f, rest, v.hi, tol / (full + 1)) : 0.0;
      return (full * one + tail) / mu;
    }
  }
  return plainIntegral(f, v.lo, v.hi, tol) / mu;
}

IvLimitReport estimateAvg(const GlobalObservable& f, const ExhaustiveFamily& fam, double tol) {
  return buildReport([&](const Window& w) { return windowAverage(f, w); }, fam, tol);
}

std::vector<double> avgInvarianceCheck(const GlobalObservable& f, const ExhaustiveFamily& fam,
                                       const PiecewiseMap& map, const std::vector<long>& nList, double tol) {
  const auto base = estimateAvg(f, fam, tol);
  if (base.verdict != IvVerdict::Converged) {
    fail(ErrorCode::InvalidArgument, "Avg(" + f.id + ") did not converge on this family");
  }
  const auto one = makeOne();
  std::vector<double> out;
  for (long n : nList) {
    if (n == 0) {
      out.push_back(0.0);
      continue;
    }
    const auto rep = buildReport(
        [&](const Window& w) {
          return integrateComposedWindow(map, f, n, one, w.lo, w.hi).value / w.measure();
        },
        fam, tol);
    out.push_back(std::abs(rep.estimate - base.estimate));
  }
  return out;
}

std::vector<AvolPoint> avolCheck(const PiecewiseMap& map, const ExhaustiveFamily& fam, long n) {
  std::vector<AvolPoint> out;
  for (double M : fam.scaleLadder) {
    AvolPoint p{M, 0.0, 0.0};
    for (const auto& w : fam.members(M)) {
      const IntervalUnion v{{w.lo, w.hi, true}};
      if (n == 0) continue;
      const auto pulled = pullback(map, v, n);
      const double mu = w.measure();
      p.ratio = std::max(p.ratio, symmetricDifferenceMeasure(pulled, v) / mu);
      p.measureDefect = std::max(p.measureDefect, std::abs(measureOf(pulled) - mu));
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace infinimix
