#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "infinimix/lattice.hpp"
#include "infinimix/maps.hpp"
#include "infinimix/observables.hpp"

namespace infinimix {

enum class TransferMode { ExactLattice, PreimageSum };

struct SignedDensityValue {
  double value = 0.0;
  double errorBound = 0.0;
};

/// Persistent storage for P^n g ladders (implemented by the runner's cache).
class LadderStore {
 public:
  virtual ~LadderStore() = default;
  /// Largest stored rung n' with after < n' <= n for the key, if any.
  virtual std::optional<std::pair<long, LatticeMeasure>> lookup(const std::string& key, long n, long after) = 0;
  /// Called for every exact rung the ladder passes through.
  virtual void offer(const std::string& key, long n, const LatticeMeasure& rung) = 0;
};

/// P^n g for a lattice density, advanced one convolution at a time. Past
/// `floatSwitchover` (if >= 0) the ladder continues in floating point with a
/// tracked L1 error bound.
class LatticeLadder {
 public:
  LatticeLadder(JumpLaw law, LatticeMeasure start, long startN = 0, long floatSwitchover = -1);

  long n() const { return n_; }
  bool exact() const { return !approx_; }
  const LatticeMeasure& exactMeasure() const { return exact_; }
  const FloatLatticeMeasure& floatMeasure() const { return *approx_; }
  /// Number of convolutions performed by this object.
  long steps() const { return steps_; }

  void advanceTo(long n);
  void onRung(std::function<void(long, const LatticeMeasure&)> observer) { observer_ = std::move(observer); }
  /// Lookup of stored rungs, consulted before convolving forward.
  using RungSource = std::function<std::optional<std::pair<long, LatticeMeasure>>(long n, long after)>;
  void source(RungSource src) { source_ = std::move(src); }

 private:
  JumpLaw law_;
  LatticeMeasure exact_;
  std::optional<FloatLatticeMeasure> approx_;
  long n_;
  long switchover_;
  long steps_ = 0;
  std::function<void(long, const LatticeMeasure&)> observer_;
  RungSource source_;
};

class TransferEngine {
 public:
  TransferEngine(MapPtr map, TransferMode mode, long depthLimit = 24);
  /// ExactLattice when the map has a lattice jump law, PreimageSum otherwise.
  static TransferEngine automatic(MapPtr map);

  const PiecewiseMap& map() const { return *map_; }
  const MapPtr& mapPtr() const { return map_; }
  TransferMode mode() const { return mode_; }
  long depthLimit() const { return depthLimit_; }
  long floatSwitchover() const { return floatSwitchover_; }
  void setFloatSwitchover(long n) { floatSwitchover_ = n; }
  void setLadderStore(LadderStore* store) { store_ = store; }

  /// Exact P^n g on the lattice.
  LatticeMeasure applyLattice(const LatticeMeasure& g, long n) const;

  /// A ladder for P^n g positioned at or below `firstN`, using the ladder
  /// store when one is attached. `key` identifies g in the store.
  LatticeLadder ladder(const LatticeMeasure& g, const std::string& key, long firstN) const;

  /// P^n g(x) by summing over the n-step preimage tree.
  SignedDensityValue evalPointwise(const LocalObservable& g, long n, double x) const;

 private:
  MapPtr map_;
  TransferMode mode_;
  long depthLimit_;
  long floatSwitchover_ = -1;
  LadderStore* store_ = nullptr;
};

/// <F, g> = integral of F g. Exact cell sum when g is a lattice density and F
/// has exact cell averages; adaptive quadrature (tol 1e-10) otherwise.
double coupling(const GlobalObservable& f, const LocalObservable& g);
std::optional<Rational> couplingExact(const GlobalObservable& f, const LocalObservable& g);

struct LinPoint {
  long n;
  double norm;                  // ||P^n g||_1
  double errorBound;            // quadrature / rounding bound (0 when exact)
  double truncationBound;       // mass possibly missed outside the integration window
  std::optional<Rational> exact;
};

struct LinSeries {
  std::vector<LinPoint> points;
  bool exactArithmetic = false;
  /// ||P^{n'} g|| <= ||P^n g|| + 1e-12 for consecutive entries (exact comparison
  /// on exact entries).
  bool nonIncreasing = true;
};

/// ||P^n g||_1 over nList for a mean-zero g. Throws NotMeanZero when |mu(g)| > 1e-12.
LinSeries linNorm(const TransferEngine& engine, const LocalObservable& g, const std::vector<long>& nList);

}  // namespace infinimix
