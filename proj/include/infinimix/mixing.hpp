#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infinimix/composed.hpp"
#include "infinimix/lattice.hpp"
#include "infinimix/maps.hpp"
#include "infinimix/observables.hpp"
#include "infinimix/transfer.hpp"
#include "infinimix/volume.hpp"

namespace infinimix {

enum class CorrelationMethod { Auto, ExactLattice, Quadrature, MonteCarlo };

std::string to_string(CorrelationMethod m);
CorrelationMethod parseMethod(const std::string& name);

struct MonteCarloOptions {
  std::uint64_t seed = 20240611;
  long samples = 1'000'000;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct CorrelateOptions {
  CorrelationMethod method = CorrelationMethod::Auto;
  MonteCarloOptions mc;
  ComposedOptions quadrature;
  long floatSwitchover = -1;
  LadderStore* ladderStore = nullptr;
  /// Largest n for which Auto picks Quadrature on a non-lattice problem.
  long autoQuadratureDepth = 14;
};

/// n -> mu((F o T^n) g) with error bounds.
struct CorrelationSeries {
  std::vector<long> nValues;
  std::vector<double> estimates;
  std::vector<double> errorBounds;
  std::vector<std::optional<Rational>> exact;  // ExactLattice with exact cell averages
  CorrelationMethod method = CorrelationMethod::ExactLattice;
  std::optional<std::uint64_t> seed;
  long samples = 0;

  nlohmann::json toJson() const;
  /// Columns n, estimate, error_bound, method.
  std::string toCsv() const;
};

/// The method Auto resolves to for this problem.
CorrelationMethod resolveMethod(const PiecewiseMap& map, const LocalObservable& g, long nMax,
                                const CorrelateOptions& opts);

CorrelationSeries correlate(const MapPtr& map, const GlobalObservable& f, const LocalObservable& g,
                            const std::vector<long>& nList, const CorrelateOptions& opts = {});

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

/// Inconclusive when error > tol / 2, else pass iff deviation <= tol + error.
Verdict judgeDeviation(double deviation, double error, double tol);

struct TailStats {
  double rawMean = 0.0;  // mean of the values themselves
  double mean = 0.0;
  double max = 0.0;
  double minValue = 0.0;
  double maxValue = 0.0;
  double errorMax = 0.0;
};

/// Statistics of |series - target| (and of the raw values) over the last
/// `tailFraction` of the entries.
TailStats tailStats(const std::vector<double>& values, const std::vector<double>& errors, double target,
                    double tailFraction = 1.0 / 3.0);

struct GlmDensityResult {
  std::string id;
  double mu;
  double l1;
  CorrelationSeries series;
  TailStats tail;  // of |corr(n) - avgF mu(g)|
  Verdict verdict;
};

struct GlmReport {
  std::string dictionary;
  double avgF;
  double tol;
  std::vector<GlmDensityResult> densities;
  Verdict glm2 = Verdict::Inconclusive;
  /// max over the dictionary of tail deviation / ||g||_1 (restricted GLM3).
  double glm3Index = 0.0;

  nlohmann::json toJson() const;
};

GlmReport glmVerdict(const MapPtr& map, const GlobalObservable& f, const std::vector<LocalObservable>& gSet,
                     double avgF, const std::vector<long>& nList, double tol, const CorrelateOptions& opts = {},
                     std::string dictionaryName = "custom");

/// Finite stand-in for the unit ball of L1: cell indicators at centres
/// {0, +-1, +-5, +-25} with widths 1 and 4, plus the dipole 1_[0,1) - 1_[1,2).
std::vector<LocalObservable> glm3Dictionary();
inline constexpr const char* kGlm3DictionaryName = "cells{0,+-1,+-5,+-25}x{w1,w4}+dipole";

struct LlmReport {
  CorrelationSeries series;
  TailStats tail;
  double tol;
  Verdict verdict;

  nlohmann::json toJson() const;
};

LlmReport llmVerdict(const MapPtr& map, const LocalObservable& f, const LocalObservable& g,
                     const std::vector<long>& nList, double tol, const CorrelateOptions& opts = {});

struct GgmCell {
  std::optional<double> value;  // missing when the budget ran out
  double errorBound = 0.0;
  double deviation = 0.0;       // max over family members |value - target|
};

struct GgmGrid {
  std::vector<double> scales;
  std::vector<long> nValues;
  std::vector<std::vector<GgmCell>> cells;  // [scale][n]
  double target = 0.0;
  /// Deviation along M_i, n_i for i = 0, 1, ... (the joint limit direction).
  std::vector<double> antiDiagonal;
  /// Max deviation over the lower-right quadrant.
  double cornerDeviation = 0.0;

  nlohmann::json toJson() const;
};

/// mu_V((F o T^n) G) over the family's windows. `target` defaults to
/// Avg(F) Avg(G) estimated on the same family.
GgmGrid ggmGrid(const MapPtr& map, const GlobalObservable& f, const GlobalObservable& g, const ExhaustiveFamily& fam,
                const std::vector<long>& nList, std::optional<double> target = std::nullopt,
                const CorrelateOptions& opts = {});

struct CoalescencePoint {
  long n;
  double delta;
  std::optional<double> bound;  // ||P^n(g/mu(g) - h/mu(h))||_1 * ||F||_inf
  std::optional<Rational> exactDelta;
  std::optional<Rational> exactBound;
  bool dominated = true;  // delta <= bound (exact comparison when available)
};

struct CoalescenceSeries {
  std::vector<CoalescencePoint> points;
  bool exact = false;
  bool boundNonIncreasing = true;

  nlohmann::json toJson() const;
};

CoalescenceSeries coalescenceTest(const MapPtr& map, const GlobalObservable& f, const LocalObservable& g,
                                  const LocalObservable& h, const std::vector<long>& nList,
                                  const CorrelateOptions& opts = {});

struct DensityTail {
  std::string id;
  double tailMean;
  double tailSpread;
};

struct EquilibriumEstimate {
  double rhoHat = 0.0;
  std::vector<DensityTail> perDensityTails;
  double coalescenceDefect = 0.0;
  std::vector<CorrelationSeries> series;

  nlohmann::json toJson() const;
};

EquilibriumEstimate estimateRho(const MapPtr& map, const GlobalObservable& f, const std::vector<LocalObservable>& gSet,
                                const std::vector<long>& nList, double tailFraction = 1.0 / 3.0,
                                const CorrelateOptions& opts = {});

}  // namespace infinimix
