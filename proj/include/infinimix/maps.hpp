#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infinimix/lattice.hpp"

namespace infinimix {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// [lo, hi), or (lo, hi) when `loClosed` is false. Either end may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool loClosed = true;

  bool contains(double x) const { return (loClosed ? x >= lo : x > lo) && x < hi; }
  double length() const { return hi - lo; }
  bool finite() const;
};

enum class MapKind { Boole, TranslationInvariant, Custom };

std::string to_string(MapKind kind);

/// One monotone expanding piece. For lifted maps the domain lies in the
/// fundamental cell [0, 1) and the branch is copied to every cell [j, j+1).
struct Branch {
  Interval domain;
  Interval image;
  bool increasing = true;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  std::function<double(double)> derivative;

  /// forward() with the one-sided limits at the domain ends taken from `image`.
  double forwardAt(double x) const;
};

struct Preimage {
  double x;
  double weight;  // 1 / |T'(x)|
  bool operator==(const Preimage&) const = default;
};

/// Which branch (and, for lifted maps, which cell shift) a point belongs to.
struct BranchLocation {
  std::size_t branch;
  long shift;
};

struct MeasureCheckReport {
  std::size_t samples = 0;
  double maxDeviation = 0.0;   // max |sum of weights - 1|
  double worstPoint = 0.0;
};

class PiecewiseMap {
 public:
  PiecewiseMap(std::string id, MapKind kind, std::vector<Branch> branches, bool lifted,
               std::optional<JumpLaw> jumpLaw = std::nullopt);

  const std::string& id() const { return id_; }
  MapKind kind() const { return kind_; }
  bool lifted() const { return lifted_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::optional<JumpLaw>& latticeJumpLaw() const { return jumpLaw_; }
  /// k1, k2 of a linear random-walk map.
  std::optional<std::pair<long, long>> walkRange() const;
  const MeasureCheckReport& measureReport() const { return report_; }

  /// T(x). Throws SingularOrbit when x is not in any branch domain.
  double operator()(double x) const;
  double derivative(double x) const;
  std::optional<BranchLocation> locate(double x) const;

  /// One preimage per branch (and cell) whose image contains y.
  std::vector<Preimage> preimages(double y) const;

  /// Bounds [lo, hi] on T(x) - x when finite (lifted maps only).
  std::optional<std::pair<double, double>> displacement() const;

  /// Forward and inverse through a located branch, in absolute coordinates.
  double forwardThrough(const BranchLocation& at, double x) const;
  double inverseThrough(const BranchLocation& at, double y) const;
  Interval domainOf(const BranchLocation& at) const;
  Interval imageOf(const BranchLocation& at) const;

  /// Checks sum of preimage weights = 1 on the standard grid (1e3 points per
  /// unit cell over [-10, 10] and 1e2 tail points) and stores the report.
  MeasureCheckReport checkMeasurePreservation() const;

 private:
  std::string id_;
  MapKind kind_;
  std::vector<Branch> branches_;
  bool lifted_;
  std::optional<JumpLaw> jumpLaw_;
  MeasureCheckReport report_;
};

using MapPtr = std::shared_ptr<const PiecewiseMap>;

/// T(x) mod j on [0, j) for a lifted map.
class QuotientMap {
 public:
  QuotientMap(MapPtr map, long period);
  long period() const { return period_; }
  double operator()(double x) const;

 private:
  MapPtr map_;
  long period_;
};

MapPtr makeBoole();
MapPtr makeRandomWalkMap(long k1, long k2);

/// Named formula template with numeric parameters, e.g. {"template": "affine", "params": [3, -1]}.
struct FormulaSpec {
  std::string name;
  std::vector<double> params;
};

struct BranchSpec {
  Interval domain;
  std::optional<Interval> image;
  FormulaSpec forward;
  FormulaSpec inverse;
  FormulaSpec derivative;
};

struct CustomMapSpec {
  std::string name = "custom";
  bool lifted = true;
  std::vector<BranchSpec> branches;
};

std::function<double(double)> compileFormula(const FormulaSpec& spec);
CustomMapSpec parseCustomMapSpec(const nlohmann::json& doc);

/// Builds the map and verifies Lebesgue preservation; throws
/// NotMeasurePreserving when the weight sum is off by more than 1e-6.
MapPtr makeCustomPiecewise(const CustomMapSpec& spec);

/// T^n(x); n = 0 returns x unchanged.
double iterate(const PiecewiseMap& map, double x, long n);

}  // namespace infinimix
