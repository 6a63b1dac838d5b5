#include "infinimix/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "infinimix/errors.hpp"

namespace infinimix {
namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Rule {
  double value;
  double error;
};

Rule gaussKronrod(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

struct Refiner {
  const std::function<double(double)>& f;
  long budget;
  long evaluations = 0;

  Rule run(double a, double b, double tol, Rule whole) {
    const double width = b - a;
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    if (whole.error <= tol || width <= 64 * std::numeric_limits<double>::epsilon() * scale) {
      return whole;
    }
    const double mid = 0.5 * (a + b);
    const Rule left = eval(a, mid);
    const Rule right = eval(mid, b);
    const Rule l = run(a, mid, 0.5 * tol, left);
    const Rule r = run(mid, b, 0.5 * tol, right);
    return {l.value + r.value, l.error + r.error};
  }

  Rule eval(double a, double b) {
    evaluations += 15;
    if (evaluations > budget) {
      std::ostringstream os;
      os << "integral exceeded " << budget << " evaluations near [" << a << ", " << b << ")";
      fail(ErrorCode::QuadratureBudget, os.str());
    }
    return gaussKronrod(f, a, b);
  }
};

}  // namespace

std::vector<double> cutPoints(double a, double b, std::span<const double> breaks,
                              double maxPieceWidth) {
  std::vector<double> cuts{a, b};
  for (double x : breaks) {
    if (x > a && x < b) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  if (maxPieceWidth > 0) {
    std::vector<double> fine;
    fine.reserve(cuts.size());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = cuts[i];
      const double hi = cuts[i + 1];
      fine.push_back(lo);
      const double span = hi - lo;
      if (span > maxPieceWidth) {
        const auto pieces = static_cast<long>(std::ceil(span / maxPieceWidth));
        for (long k = 1; k < pieces; ++k) fine.push_back(lo + span * static_cast<double>(k) / pieces);
      }
    }
    fine.push_back(cuts.back());
    cuts = std::move(fine);
  }
  return cuts;
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breaks, const QuadratureOptions& opts) {
  if (!(a < b)) return {};
  if (!std::isfinite(a) || !std::isfinite(b)) {
    fail(ErrorCode::InvalidArgument, "integrate needs a finite range");
  }
  const auto cuts = cutPoints(a, b, breaks, opts.maxPieceWidth);
  const double total = b - a;
  Refiner refiner{f, opts.budget};
  QuadratureResult out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const double tol = opts.absTol * (hi - lo) / total;
    const Rule r = refiner.run(lo, hi, tol, refiner.eval(lo, hi));
    out.value += r.value;
    out.errorEstimate += r.error;
  }
  out.evaluations = refiner.evaluations;
  return out;
}

}  // namespace infinimix
