#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "infinimix/lattice.hpp"
#include "infinimix/maps.hpp"

namespace infinimix {

/// Structural facts about an observable that estimators dispatch on.
struct ObservableTags {
  std::optional<long> periodic;  // F(x + j) = F(x)
  bool latticeStep = false;      // constant on every cell [j, j+1)
  bool oddSymmetric = false;
  bool uniformCesaroMean = false;
  bool piecewiseConstant = false;  // constant between the reported breaks
};

/// Appends the discontinuities of an observable inside (lo, hi) to `out`.
using BreakFn = std::function<void(double lo, double hi, std::vector<double>& out)>;

/// A bounded function F on R.
struct GlobalObservable {
  std::string id;
  std::function<double(double)> eval;
  double boundNorm = 0.0;
  ObservableTags tags;
  BreakFn breaks;
  /// Exact cell values, present for lattice-step observables with rational values.
  std::function<Rational(long)> exactCell;

  double operator()(double x) const { return eval(x); }
  std::vector<double> breaksIn(double lo, double hi) const;
  /// Cell value of a lattice-step observable.
  double cellValue(long j) const { return eval(static_cast<double>(j) + 0.5); }
};

struct ConstantPiece {
  double lo;
  double hi;
  double value;
};

/// An integrable function g with finite support.
struct LocalObservable {
  std::string id;
  std::function<double(double)> eval;
  Interval support;
  double integral = 0.0;  // mu(g)
  double l1Norm = 0.0;    // ||g||_1
  double supBound = 0.0;  // >= sup |g|
  std::optional<LatticeMeasure> latticeForm;
  std::vector<double> breakpoints;
  /// Present when g is constant on finitely many intervals (zero elsewhere).
  std::vector<ConstantPiece> pieces;

  double operator()(double x) const { return support.contains(x) ? eval(x) : 0.0; }
  /// Integral of g over [a, b) intersected with the support.
  double integrate(double a, double b) const;
  /// Integral of |g| over [a, b).
  double integrateAbs(double a, double b) const;
};

// Global observables.
GlobalObservable makeConstant(double c);
GlobalObservable makeOne();
GlobalObservable makeSign();
/// F(x) = profile(x mod j). `profileBreaks` lists discontinuities in [0, j).
GlobalObservable makePeriodic(long j, std::function<double(double)> profile, double bound,
                              std::vector<double> profileBreaks = {}, bool piecewiseConstant = false,
                              std::string id = {});
GlobalObservable makeCosine(long j);
/// Indicator of [0, j/2) + jZ.
GlobalObservable makeHalfCell(long j);
/// Periodic lattice-step observable with the given cell values on cells 0..p-1.
GlobalObservable makeCellPattern(const std::vector<Rational>& values);
/// Lattice-step observable equal to values[i] on cell lo+i and 0 elsewhere.
GlobalObservable makeCells(long lo, const std::vector<Rational>& values);
/// Lattice-step observable with value (-1)^k on cells j with floor(log2(|j|+1)) = k.
/// Its Cesaro means oscillate, so it is a candidate non-equilibrium observable.
GlobalObservable makeDyadicFlip();
/// A bounded local observable viewed as a global one.
GlobalObservable asGlobal(const LocalObservable& f);

GlobalObservable add(const GlobalObservable& f, const GlobalObservable& g);
GlobalObservable scale(const GlobalObservable& f, double c);

/// E(F | cells): value on [j, j+1) is the cell integral of F, computed lazily
/// with a thread-safe per-cell cache. Lattice-step inputs are returned as is.
GlobalObservable projectToLattice(const GlobalObservable& f);

struct CesaroResult {
  double value;
  double uniformityDefect;
};

/// (1/2j) * integral of F over [q-j, q+j] at j = jMax for every q in the grid.
CesaroResult cesaroMean(const GlobalObservable& f, const std::vector<long>& qGrid, long jMax);

// Local observables.
LocalObservable makeIndicatorDensity(double a, double b, bool normalize);
LocalObservable makeLatticeDensity(const LatticeMeasure& m);
LocalObservable makeTriangular(double a, double peak, double b);
/// Normal density truncated to center +- 8 widths and renormalized.
LocalObservable makeGaussBump(double center, double width);
LocalObservable add(const LocalObservable& f, const LocalObservable& g);
LocalObservable scale(const LocalObservable& f, double c);
LocalObservable normalized(const LocalObservable& f);

/// Draws x with law |g| / ||g||_1 together with sign(g(x)).
class AbsDensitySampler {
 public:
  explicit AbsDensitySampler(const LocalObservable& g);
  std::pair<double, double> draw(std::mt19937_64& rng) const;

 private:
  const LocalObservable* g_;
  std::vector<ConstantPiece> pieces_;
  std::vector<double> cumulative_;
};

}  // namespace infinimix
