#pragma once

#include <functional>
#include <span>
#include <vector>

namespace infinimix {

struct QuadratureOptions {
  double absTol = 1e-10;
  long budget = 1'000'000;  // integrand evaluations
  double maxPieceWidth = 1.0;
};

struct QuadratureResult {
  double value = 0.0;
  double errorEstimate = 0.0;
  long evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b] with a bisection refinement.
/// `breaks` are known discontinuities; the range is first cut at them and into
/// pieces no wider than `maxPieceWidth`. Throws QuadratureBudget when the
/// evaluation budget runs out.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breaks = {}, const QuadratureOptions& opts = {});

/// Sorted, deduplicated cut points of [a, b] including both ends.
std::vector<double> cutPoints(double a, double b, std::span<const double> breaks,
                              double maxPieceWidth);

}  // namespace infinimix
