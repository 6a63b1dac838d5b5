#pragma once

#include <gmpxx.h>

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace infinimix {

using Integer = mpz_class;
using Rational = mpq_class;

/// Law of the integer jump made by the cell index floor(T(x)) - floor(x).
/// `probabilities[i]` is the weight of the jump `minJump + i`.
struct JumpLaw {
  long minJump = 0;
  std::vector<Rational> probabilities;

  static JumpLaw uniform(long k1, long k2);

  long maxJump() const { return minJump + static_cast<long>(probabilities.size()) - 1; }
  Rational total() const;
  bool symmetric() const;
  double variance() const;
  /// Integer weights over a common denominator: probabilities[i] = weights[i] / denominator.
  std::pair<std::vector<Integer>, Integer> integerWeights() const;
};

/// A finitely supported signed measure on the unit cells [j, j+1). Masses are
/// exact: numerators over one shared positive denominator.
class LatticeMeasure {
 public:
  LatticeMeasure();
  LatticeMeasure(long offset, std::vector<Integer> numerators, Integer denominator);

  static LatticeMeasure cell(long j, const Rational& mass = 1);
  static LatticeMeasure fromMasses(long offset, const std::vector<Rational>& masses);

  long offset() const { return offset_; }
  /// One past the last stored cell.
  long end() const { return offset_ + static_cast<long>(numerators_.size()); }
  std::size_t size() const { return numerators_.size(); }
  bool empty() const { return numerators_.empty(); }

  const std::vector<Integer>& numerators() const { return numerators_; }
  const Integer& denominator() const { return denominator_; }

  Rational mass(long cell) const;
  double massDouble(long cell) const;
  Rational total() const;
  Rational l1() const;
  bool nonNegative() const;

  /// Sum over cells of value(cell) * mass(cell).
  Rational pair(const std::function<Rational(long)>& value) const;
  double pairDouble(const std::function<double(long)>& value) const;

  LatticeMeasure operator+(const LatticeMeasure& other) const;
  LatticeMeasure operator-(const LatticeMeasure& other) const;
  LatticeMeasure scaled(const Rational& factor) const;
  bool operator==(const LatticeMeasure& other) const;

  /// Drops zero cells at both ends and reduces the shared denominator.
  LatticeMeasure trimmed() const;

  /// One step of mass transport: mass in cell c moves to c + j with probability p(j).
  LatticeMeasure pushed(const JumpLaw& law) const;

  nlohmann::json toJson() const;
  static LatticeMeasure fromJson(const nlohmann::json& j);

 private:
  long offset_ = 0;
  std::vector<Integer> numerators_;
  Integer denominator_ = 1;
};

/// Floating-point shadow of a LatticeMeasure. `errorBound` bounds the L1
/// distance to the exact measure it tracks.
struct FloatLatticeMeasure {
  long offset = 0;
  std::vector<double> masses;
  double errorBound = 0.0;

  static FloatLatticeMeasure from(const LatticeMeasure& exact);

  long end() const { return offset + static_cast<long>(masses.size()); }
  double mass(long cell) const;
  double l1() const;
  /// Rounding in the L1 sum itself, to be added to errorBound when bracketing.
  double l1RoundingBound() const;
  double total() const;

  FloatLatticeMeasure pushed(const JumpLaw& law) const;
};

std::string toDecimal(const Integer& v);

}  // namespace infinimix
