#pragma once

#include <functional>
#include <span>
#include <vector>

#include "infinimix/maps.hpp"

namespace infinimix {

/// A sorted union of disjoint half-open intervals.
using IntervalUnion = std::vector<Interval>;

IntervalUnion normalizeUnion(IntervalUnion parts);
double measureOf(const IntervalUnion& u);
IntervalUnion intersectUnions(const IntervalUnion& a, const IntervalUnion& b);
/// Lebesgue measure of the symmetric difference.
double symmetricDifferenceMeasure(const IntervalUnion& a, const IntervalUnion& b);

/// T^{-n}(set), computed by pushing interval endpoints through the branch
/// inverses. Throws IntervalBlowup past `maxComponents`.
IntervalUnion pullback(const PiecewiseMap& map, const IntervalUnion& set, long n,
                       std::size_t maxComponents = 1'000'000);

/// A maximal interval of x on which T^n is a single composition of branches.
struct MonotonePiece {
  double xlo, xhi;  // x-space
  double ylo, yhi;  // T^n of the piece; may be unbounded near poles
  bool increasing;  // orientation of T^n on the piece
  std::span<const BranchLocation> chain;

  /// The x in the piece with T^n(x) = y.
  double toX(const PiecewiseMap& map, double y) const;
  /// T^n(x) along this chain (continuous up to the piece ends).
  double toY(const PiecewiseMap& map, double x) const;
};

/// Visits every monotone piece of T^n over the finite range [a, b). Returns
/// the number of pieces visited. Throws IntervalBlowup past `maxPieces`.
std::size_t forEachMonotonePiece(const PiecewiseMap& map, double a, double b, long n,
                                 const std::function<void(const MonotonePiece&)>& visit,
                                 std::size_t maxPieces = 50'000'000);

}  // namespace infinimix
