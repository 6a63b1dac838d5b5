#include "infinimix/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infinimix/errors.hpp"

namespace infinimix {
namespace {

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

Integer lcm(const Integer& a, const Integer& b) {
  Integer out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

}  // namespace

std::string toDecimal(const Integer& v) { return v.get_str(10); }

JumpLaw JumpLaw::uniform(long k1, long k2) {
  if (k2 - k1 < 1) fail(ErrorCode::InvalidArgument, "empty jump range");
  JumpLaw law;
  law.minJump = k1;
  law.probabilities.assign(static_cast<std::size_t>(k2 - k1), Rational(1, k2 - k1));
  for (auto& p : law.probabilities) p.canonicalize();
  return law;
}

Rational JumpLaw::total() const {
  Rational sum = 0;
  for (const auto& p : probabilities) sum += p;
  return sum;
}

bool JumpLaw::symmetric() const {
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const long jump = minJump + static_cast<long>(i);
    const long mirror = -jump - minJump;
    if (mirror < 0 || mirror >= static_cast<long>(probabilities.size())) return false;
    if (probabilities[i] != probabilities[static_cast<std::size_t>(mirror)]) return false;
  }
  return true;
}

double JumpLaw::variance() const {
  double mean = 0;
  double second = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double j = static_cast<double>(minJump + static_cast<long>(i));
    const double p = probabilities[i].get_d();
    mean += p * j;
    second += p * j * j;
  }
  return second - mean * mean;
}

std::pair<std::vector<Integer>, Integer> JumpLaw::integerWeights() const {
  Integer den = 1;
  for (const auto& p : probabilities) den = lcm(den, p.get_den());
  std::vector<Integer> weights;
  weights.reserve(probabilities.size());
  for (const auto& p : probabilities) weights.push_back(p.get_num() * (den / p.get_den()));
  return {std::move(weights), den};
}

LatticeMeasure::LatticeMeasure() = default;

LatticeMeasure::LatticeMeasure(long offset, std::vector<Integer> numerators, Integer denominator)
    : offset_(offset), numerators_(std::move(numerators)), denominator_(std::move(denominator)) {
  if (denominator_ == 0) fail(ErrorCode::InvalidArgument, "zero denominator");
  if (denominator_ < 0) {
    denominator_ = -denominator_;
    for (auto& n : numerators_) n = -n;
  }
}

LatticeMeasure LatticeMeasure::cell(long j, const Rational& mass) {
  Rational m = mass;
  m.canonicalize();
  return LatticeMeasure(j, {m.get_num()}, m.get_den());
}

LatticeMeasure LatticeMeasure::fromMasses(long offset, const std::vector<Rational>& masses) {
  Integer den = 1;
  for (const auto& m : masses) den = lcm(den, m.get_den());
  std::vector<Integer> nums;
  nums.reserve(masses.size());
  for (const auto& m : masses) nums.push_back(m.get_num() * (den / m.get_den()));
  return LatticeMeasure(offset, std::move(nums), den);
}

Rational LatticeMeasure::mass(long cell) const {
  if (cell < offset_ || cell >= end()) return 0;
  Rational r(numerators_[static_cast<std::size_t>(cell - offset_)], denominator_);
  r.canonicalize();
  return r;
}

double LatticeMeasure::massDouble(long cell) const { return mass(cell).get_d(); }

Rational LatticeMeasure::total() const {
  Integer sum = 0;
  for (const auto& n : numerators_) sum += n;
  Rational r(sum, denominator_);
  r.canonicalize();
  return r;
}

Rational LatticeMeasure::l1() const {
  Integer sum = 0;
  for (const auto& n : numerators_) sum += abs(n);
  Rational r(sum, denominator_);
  r.canonicalize();
  return r;
}

bool LatticeMeasure::nonNegative() const {
  return std::all_of(numerators_.begin(), numerators_.end(), [](const Integer& n) { return n >= 0; });
}

Rational LatticeMeasure::pair(const std::function<Rational(long)>& value) const {
  // Cell values usually have tiny denominators; bring them to a common one so
  // the sum runs in integers and only the result is reduced.
  std::vector<Rational> values;
  values.reserve(numerators_.size());
  Integer common = 1;
  for (std::size_t i = 0; i < numerators_.size(); ++i) {
    values.push_back(numerators_[i] == 0 ? Rational(0) : value(offset_ + static_cast<long>(i)));
    values.back().canonicalize();
    common = lcm(common, values.back().get_den());
  }
  Integer acc = 0;
  for (std::size_t i = 0; i < numerators_.size(); ++i) {
    if (numerators_[i] == 0 || values[i] == 0) continue;
    acc += numerators_[i] * values[i].get_num() * (common / values[i].get_den());
  }
  Rational r(acc, denominator_ * common);
  r.canonicalize();
  return r;
}

double LatticeMeasure::pairDouble(const std::function<double(long)>& value) const {
  // Masses are converted one by one so that huge numerators do not overflow.
  double sum = 0;
  for (std::size_t i = 0; i < numerators_.size(); ++i) {
    if (numerators_[i] == 0) continue;
    const double m = Rational(numerators_[i], denominator_).get_d();
    sum += value(offset_ + static_cast<long>(i)) * m;
  }
  return sum;
}

LatticeMeasure LatticeMeasure::operator+(const LatticeMeasure& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  const Integer den = lcm(denominator_, other.denominator_);
  const Integer a = den / denominator_;
  const Integer b = den / other.denominator_;
  const long lo = std::min(offset_, other.offset_);
  const long hi = std::max(end(), other.end());
  std::vector<Integer> nums(static_cast<std::size_t>(hi - lo), Integer(0));
  for (std::size_t i = 0; i < numerators_.size(); ++i) {
    nums[static_cast<std::size_t>(offset_ - lo) + i] += numerators_[i] * a;
  }
  for (std::size_t i = 0; i < other.numerators_.size(); ++i) {
    nums[static_cast<std::size_t>(other.offset_ - lo) + i] += other.numerators_[i] * b;
  }
  return LatticeMeasure(lo, std::move(nums), den);
}

LatticeMeasure LatticeMeasure::operator-(const LatticeMeasure& other) const {
  return *this + other.scaled(-1);
}

LatticeMeasure LatticeMeasure::scaled(const Rational& factor) const {
  Rational f = factor;
  f.canonicalize();
  std::vector<Integer> nums = numerators_;
  for (auto& n : nums) n *= f.get_num();
  Integer den = denominator_ * f.get_den();
  if (f == 0) den = 1;
  return LatticeMeasure(offset_, std::move(nums), den);
}

bool LatticeMeasure::operator==(const LatticeMeasure& other) const {
  const long lo = std::min(offset_, other.offset_);
  const long hi = std::max(end(), other.end());
  for (long c = lo; c < hi; ++c) {
    const Integer a = (c >= offset_ && c < end()) ? numerators_[static_cast<std::size_t>(c - offset_)] : 0;
    const Integer b = (c >= other.offset_ && c < other.end())
                          ? other.numerators_[static_cast<std::size_t>(c - other.offset_)]
                          : 0;
    if (a * other.denominator_ != b * denominator_) return false;
  }
  return true;
}

LatticeMeasure LatticeMeasure::trimmed() const {
  std::size_t first = 0;
  std::size_t last = numerators_.size();
  while (first < last && numerators_[first] == 0) ++first;
  while (last > first && numerators_[last - 1] == 0) --last;
  if (first == last) return LatticeMeasure();
  Integer g = denominator_;
  for (std::size_t i = first; i < last; ++i) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), numerators_[i].get_mpz_t());
  std::vector<Integer> nums;
  nums.reserve(last - first);
  for (std::size_t i = first; i < last; ++i) nums.push_back(numerators_[i] / g);
  return LatticeMeasure(offset_ + static_cast<long>(first), std::move(nums), denominator_ / g);
}

LatticeMeasure LatticeMeasure::pushed(const JumpLaw& law) const {
  if (empty()) return *this;
  const auto [weights, lawDen] = law.integerWeights();
  const std::size_t span = weights.size();
  std::vector<Integer> out(numerators_.size() + span - 1, Integer(0));
  const bool uniform = std::all_of(weights.begin(), weights.end(),
                                   [&](const Integer& w) { return w == weights.front(); });
  if (uniform) {
    // Sliding window sum, then one multiplication per cell.
    Integer window = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (i < numerators_.size()) window += numerators_[i];
      if (i >= span) window -= numerators_[i - span];
      out[i] = window;
      if (weights.front() != 1) out[i] *= weights.front();
    }
  } else {
    for (std::size_t i = 0; i < numerators_.size(); ++i) {
      if (numerators_[i] == 0) continue;
      for (std::size_t t = 0; t < span; ++t) {
        if (weights[t] != 0) out[i + t] += numerators_[i] * weights[t];
      }
    }
  }
  return LatticeMeasure(offset_ + law.minJump, std::move(out), denominator_ * lawDen);
}

nlohmann::json LatticeMeasure::toJson() const {
  nlohmann::json nums = nlohmann::json::array();
  for (const auto& n : numerators_) nums.push_back(toDecimal(n));
  return {{"offset", offset_}, {"numerators", nums}, {"denominator", toDecimal(denominator_)}};
}

LatticeMeasure LatticeMeasure::fromJson(const nlohmann::json& j) {
  try {
    std::vector<Integer> nums;
    for (const auto& n : j.at("numerators")) {
      nums.emplace_back(n.is_string() ? n.get<std::string>() : std::to_string(n.get<long long>()), 10);
    }
    const auto& d = j.at("denominator");
    Integer den(d.is_string() ? d.get<std::string>() : std::to_string(d.get<long long>()), 10);
    return LatticeMeasure(j.at("offset").get<long>(), std::move(nums), std::move(den));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("lattice measure: ") + e.what());
  } catch (const std::invalid_argument& e) {
    fail(ErrorCode::Parse, std::string("lattice measure: bad integer: ") + e.what());
  }
}

FloatLatticeMeasure FloatLatticeMeasure::from(const LatticeMeasure& exact) {
  FloatLatticeMeasure out;
  out.offset = exact.offset();
  out.masses.reserve(exact.size());
  double l1 = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double m = Rational(exact.numerators()[i], exact.denominator()).get_d();
    out.masses.push_back(m);
    l1 += std::abs(m);
  }
  out.errorBound = kUnitRoundoff * l1 * 1.01;
  return out;
}

double FloatLatticeMeasure::mass(long cell) const {
  if (cell < offset || cell >= end()) return 0.0;
  return masses[static_cast<std::size_t>(cell - offset)];
}

double FloatLatticeMeasure::l1() const {
  double sum = 0;
  for (double m : masses) sum += std::abs(m);
  return sum;
}

double FloatLatticeMeasure::l1RoundingBound() const {
  return static_cast<double>(masses.size() + 1) * kUnitRoundoff * l1() * 1.01;
}

double FloatLatticeMeasure::total() const {
  double sum = 0;
  for (double m : masses) sum += m;
  return sum;
}

FloatLatticeMeasure FloatLatticeMeasure::pushed(const JumpLaw& law) const {
  FloatLatticeMeasure out;
  out.offset = offset + law.minJump;
  const std::size_t span = law.probabilities.size();
  std::vector<double> p;
  p.reserve(span);
  for (const auto& q : law.probabilities) p.push_back(q.get_d());
  out.masses.assign(masses.size() + span - 1, 0.0);
  for (std::size_t i = 0; i < masses.size(); ++i) {
    for (std::size_t t = 0; t < span; ++t) out.masses[i + t] += p[t] * masses[i];
  }
  // The exact transport is an L1 contraction, so the inherited error does not
  // grow; each step adds the rounding of the weights and of the span-term sums.
  const double stepRounding = static_cast<double>(span + 2) * kUnitRoundoff * 1.01 * l1();
  out.errorBound = errorBound + stepRounding;
  return out;
}

}  // namespace infinimix
