#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "infinimix/maps.hpp"
#include "infinimix/observables.hpp"

namespace infinimix {

struct Window {
  double lo;
  double hi;
  double measure() const { return hi - lo; }
};

enum class FamilyKind { SymmetricIntervals, TranslatedIntervals, CellAligned };

std::string to_string(FamilyKind kind);

/// Growing windows V with mu(V) -> infinity. Every kind contains the nested
/// exhausting sequence [-M, M) (centre 0 is always probed).
struct ExhaustiveFamily {
  FamilyKind kind = FamilyKind::SymmetricIntervals;
  std::vector<double> probeGrid{0.0};
  /// Probe centres are multiples of the scale M (e.g. {0, +-1} means {0, +-M}).
  bool probesScaleWithM = false;
  std::vector<double> scaleLadder;

  /// Family members at half-width M.
  std::vector<Window> members(double M) const;
};

enum class IvVerdict { Converged, NotUniform, Inconclusive };

std::string to_string(IvVerdict v);

struct DefectPoint {
  double M;
  double defect;
};

struct IvLimitReport {
  double estimate = 0.0;
  double tol = 0.0;
  std::vector<DefectPoint> defectSeries;
  IvVerdict verdict = IvVerdict::Inconclusive;

  nlohmann::json toJson() const;
};

/// mu_V(F), by quadrature to 1e-9 mu(V).
double windowAverage(const GlobalObservable& f, const Window& v);

/// Defects below this are indistinguishable from quadrature noise.
inline constexpr double kAvgNoiseFloor = 1e-9;

IvLimitReport estimateAvg(const GlobalObservable& f, const ExhaustiveFamily& fam, double tol = 5e-3);

/// |Avg(F o T^n) - Avg(F)| for every n.
std::vector<double> avgInvarianceCheck(const GlobalObservable& f, const ExhaustiveFamily& fam,
                                       const PiecewiseMap& map, const std::vector<long>& nList,
                                       double tol = 5e-3);

struct AvolPoint {
  double M;
  double ratio;               // mu(T^-n V xor V) / mu(V)
  double measureDefect;       // |mu(T^-n V) - mu(V)|
};

/// Ratios on V = [-M, M) over the family's ladder; exact endpoint pullback.
std::vector<AvolPoint> avolCheck(const PiecewiseMap& map, const ExhaustiveFamily& fam, long n);

}  // namespace infinimix
