#include "infinimix/maps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "infinimix/errors.hpp"

namespace infinimix {
namespace {

constexpr double kPoleGuard = 1e-300;

bool imageContains(const Branch& b, const Interval& image, double y) {
  // Increasing branches map [lo, hi) onto [f(lo), f(hi)); decreasing ones onto (f(hi), f(lo)].
  if (b.increasing) return image.contains(y);
  return y > image.lo && y <= image.hi;
}

double parseBound(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  fail(ErrorCode::Parse, "interval bound must be a number or \"inf\"/\"-inf\"");
}

FormulaSpec parseFormula(const nlohmann::json& v) {
  FormulaSpec f;
  f.name = v.at("template").get<std::string>();
  if (v.contains("params")) f.params = v.at("params").get<std::vector<double>>();
  return f;
}

// Roots of x^2 - y x - c = 0, chosen without cancellation.
double booleRoot(double y, double c, double sign) {
  const double disc = std::sqrt(y * y + 4 * c);
  if (!std::isfinite(disc)) {
    // |y| huge: the big root is ~ y, the small one ~ -c / y.
    const bool big = (sign > 0) == (y > 0);
    return big ? y : -c / y;
  }
  if ((sign > 0) == (y >= 0)) return 0.5 * (y + sign * disc);
  const double other = 0.5 * (y - sign * disc);
  return -c / other;
}

}  // namespace

bool Interval::finite() const { return std::isfinite(lo) && std::isfinite(hi); }

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::Boole: return "Boole";
    case MapKind::TranslationInvariant: return "TranslationInvariant";
    case MapKind::Custom: return "Custom";
  }
  return "Unknown";
}

double Branch::forwardAt(double x) const {
  if (x == domain.lo) return increasing ? image.lo : image.hi;
  if (x == domain.hi) return increasing ? image.hi : image.lo;
  return forward(x);
}

PiecewiseMap::PiecewiseMap(std::string id, MapKind kind, std::vector<Branch> branches, bool lifted,
                           std::optional<JumpLaw> jumpLaw)
    : id_(std::move(id)), kind_(kind), branches_(std::move(branches)), lifted_(lifted),
      jumpLaw_(std::move(jumpLaw)) {
  if (branches_.empty()) fail(ErrorCode::InvalidArgument, "map needs at least one branch");
  std::sort(branches_.begin(), branches_.end(),
            [](const Branch& a, const Branch& b) { return a.domain.lo < b.domain.lo; });
  if (jumpLaw_ && jumpLaw_->total() != 1) {
    fail(ErrorCode::InvalidArgument, "lattice jump law must sum to 1");
  }
  report_ = checkMeasurePreservation();
}

std::optional<std::pair<long, long>> PiecewiseMap::walkRange() const {
  if (!jumpLaw_) return std::nullopt;
  return std::make_pair(jumpLaw_->minJump, jumpLaw_->maxJump() + 1);
}

std::optional<BranchLocation> PiecewiseMap::locate(double x) const {
  if (!std::isfinite(x)) return std::nullopt;
  const double cell = lifted_ ? std::floor(x) : 0.0;
  const double u = x - cell;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    const auto& d = branches_[i].domain;
    if (!d.contains(u)) continue;
    if (!d.loClosed && std::abs(u - d.lo) < kPoleGuard) return std::nullopt;
    return BranchLocation{i, static_cast<long>(cell)};
  }
  return std::nullopt;
}

double PiecewiseMap::forwardThrough(const BranchLocation& at, double x) const {
  const auto& b = branches_[at.branch];
  if (!lifted_) return b.forwardAt(x);
  const double s = static_cast<double>(at.shift);
  return s + b.forwardAt(x - s);
}

double PiecewiseMap::inverseThrough(const BranchLocation& at, double y) const {
  const auto& b = branches_[at.branch];
  const double s = lifted_ ? static_cast<double>(at.shift) : 0.0;
  const double v = y - s;
  double u;
  if (v == b.image.lo) {
    u = b.increasing ? b.domain.lo : b.domain.hi;
  } else if (v == b.image.hi) {
    u = b.increasing ? b.domain.hi : b.domain.lo;
  } else {
    u = b.inverse(v);
    u = std::clamp(u, b.domain.lo, b.domain.hi);
  }
  return u + s;
}

Interval PiecewiseMap::domainOf(const BranchLocation& at) const {
  Interval d = branches_[at.branch].domain;
  if (lifted_) {
    d.lo += static_cast<double>(at.shift);
    d.hi += static_cast<double>(at.shift);
  }
  return d;
}

Interval PiecewiseMap::imageOf(const BranchLocation& at) const {
  Interval d = branches_[at.branch].image;
  if (lifted_) {
    d.lo += static_cast<double>(at.shift);
    d.hi += static_cast<double>(at.shift);
  }
  return d;
}

double PiecewiseMap::operator()(double x) const {
  const auto at = locate(x);
  if (!at) {
    std::ostringstream os;
    os.precision(17);
    os << "map " << id_ << ": orbit reached singular point " << x;
    fail(ErrorCode::SingularOrbit, os.str());
  }
  const auto& b = branches_[at->branch];
  const double s = lifted_ ? static_cast<double>(at->shift) : 0.0;
  const double y = s + b.forward(x - s);
  if (!std::isfinite(y)) {
    std::ostringstream os;
    os.precision(17);
    os << "map " << id_ << ": non-finite image of " << x;
    fail(ErrorCode::SingularOrbit, os.str());
  }
  return y;
}

double PiecewiseMap::derivative(double x) const {
  const auto at = locate(x);
  if (!at) fail(ErrorCode::SingularOrbit, "derivative at singular point");
  const double s = lifted_ ? static_cast<double>(at->shift) : 0.0;
  return branches_[at->branch].derivative(x - s);
}

std::vector<Preimage> PiecewiseMap::preimages(double y) const {
  if (!std::isfinite(y)) fail(ErrorCode::InvalidArgument, "preimages of a non-finite point");
  auto collect = [this](double target, bool boundaryCheck, bool* touches) {
    std::vector<Preimage> out;
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      const auto& b = branches_[i];
      long jlo = 0;
      long jhi = 0;
      if (lifted_) {
        jlo = static_cast<long>(std::ceil(target - b.image.hi)) - 1;
        jhi = static_cast<long>(std::floor(target - b.image.lo)) + 1;
      }
      for (long j = jlo; j <= jhi; ++j) {
        const double s = static_cast<double>(j);
        const double v = target - s;
        if (boundaryCheck && (v == b.image.lo || v == b.image.hi)) *touches = true;
        if (!imageContains(b, b.image, v)) continue;
        const double u = b.inverse(v);
        out.push_back({u + s, 1.0 / std::abs(b.derivative(u))});
      }
    }
    return out;
  };
  bool touches = false;
  auto out = collect(y, true, &touches);
  if (touches) {
    bool dummy = false;
    const auto below = collect(std::nextafter(y, -kInf), false, &dummy);
    const auto above = collect(std::nextafter(y, kInf), false, &dummy);
    if (below.size() != out.size() || above.size() != out.size()) {
      std::ostringstream os;
      os.precision(17);
      os << "map " << id_ << ": " << y << " is a branch-image endpoint";
      fail(ErrorCode::BoundaryPoint, os.str());
    }
  }
  std::sort(out.begin(), out.end(), [](const Preimage& a, const Preimage& b) { return a.x > b.x; });
  return out;
}

std::optional<std::pair<double, double>> PiecewiseMap::displacement() const {
  if (!lifted_) return std::nullopt;
  double lo = kInf;
  double hi = -kInf;
  for (const auto& b : branches_) {
    lo = std::min(lo, b.image.lo - b.domain.hi);
    hi = std::max(hi, b.image.hi - b.domain.lo);
  }
  return std::make_pair(lo, hi);
}

MeasureCheckReport PiecewiseMap::checkMeasurePreservation() const {
  MeasureCheckReport rep;
  auto probe = [&](double y) {
    double sum = 0;
    try {
      for (const auto& p : preimages(y)) sum += p.weight;
    } catch (const Error&) {
      return;
    }
    const double dev = std::abs(sum - 1.0);
    ++rep.samples;
    if (dev > rep.maxDeviation || std::isnan(dev)) {
      rep.maxDeviation = std::isnan(dev) ? kInf : dev;
      rep.worstPoint = y;
    }
  };
  for (long cell = -10; cell < 10; ++cell) {
    for (int i = 0; i < 1000; ++i) probe(static_cast<double>(cell) + (i + 0.5) / 1000.0);
  }
  for (int i = 0; i < 50; ++i) {
    const double y = 10.0 * std::pow(1e5, (i + 0.5) / 50.0);
    probe(y);
    probe(-y);
  }
  return rep;
}

QuotientMap::QuotientMap(MapPtr map, long period) : map_(std::move(map)), period_(period) {
  if (!map_->lifted()) fail(ErrorCode::InvalidArgument, "quotient map needs a translation-invariant map");
  if (period_ < 1) fail(ErrorCode::InvalidArgument, "quotient period must be positive");
}

double QuotientMap::operator()(double x) const {
  const double p = static_cast<double>(period_);
  double y = std::fmod((*map_)(x), p);
  if (y < 0) y += p;
  if (y >= p) y = 0.0;
  return y;
}

MapPtr makeBoole() {
  Branch neg;
  neg.domain = {-kInf, 0.0, true};
  neg.image = {-kInf, kInf, true};
  neg.forward = [](double x) { return x - 1.0 / x; };
  neg.inverse = [](double y) { return booleRoot(y, 1.0, -1.0); };
  neg.derivative = [](double x) { return 1.0 + 1.0 / (x * x); };
  Branch pos = neg;
  pos.domain = {0.0, kInf, false};
  pos.inverse = [](double y) { return booleRoot(y, 1.0, 1.0); };
  return std::make_shared<PiecewiseMap>("boole", MapKind::Boole, std::vector<Branch>{neg, pos}, false);
}

MapPtr makeRandomWalkMap(long k1, long k2) {
  if (k2 - k1 < 2) {
    std::ostringstream os;
    os << "random-walk map needs k2 - k1 >= 2 (got k1=" << k1 << ", k2=" << k2 << ")";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  const double a = static_cast<double>(k1);
  const double k = static_cast<double>(k2 - k1);
  Branch b;
  b.domain = {0.0, 1.0, true};
  b.image = {a, static_cast<double>(k2), true};
  b.forward = [a, k](double u) { return a + k * u; };
  b.inverse = [a, k](double v) { return (v - a) / k; };
  b.derivative = [k](double) { return k; };
  std::ostringstream id;
  id << "rw:" << k1 << ":" << k2;
  return std::make_shared<PiecewiseMap>(id.str(), MapKind::TranslationInvariant, std::vector<Branch>{b},
                                        true, JumpLaw::uniform(k1, k2));
}

std::function<double(double)> compileFormula(const FormulaSpec& spec) {
  auto need = [&](std::size_t n) {
    if (spec.params.size() != n) {
      std::ostringstream os;
      os << "formula template '" << spec.name << "' takes " << n << " parameters, got "
         << spec.params.size();
      fail(ErrorCode::Parse, os.str());
    }
  };
  const auto& p = spec.params;
  if (spec.name == "affine") {
    need(2);
    return [a = p[0], b = p[1]](double x) { return a * x + b; };
  }
  if (spec.name == "constant") {
    need(1);
    return [c = p[0]](double) { return c; };
  }
  if (spec.name == "quadratic") {
    need(3);
    return [a = p[0], b = p[1], c = p[2]](double x) { return (a * x + b) * x + c; };
  }
  if (spec.name == "quadratic_root") {
    need(4);
    return [a = p[0], b = p[1], c = p[2], s = p[3]](double y) {
      if (a == 0.0) return (y - c) / b;
      const double disc = std::sqrt(std::max(0.0, b * b - 4 * a * (c - y)));
      return (-b + (s >= 0 ? disc : -disc)) / (2 * a);
    };
  }
  if (spec.name == "x_minus_c_over_x") {
    need(1);
    return [c = p[0]](double x) { return x - c / x; };
  }
  if (spec.name == "one_plus_c_over_x2") {
    need(1);
    return [c = p[0]](double x) { return 1.0 + c / (x * x); };
  }
  if (spec.name == "boole_root") {
    need(2);
    return [c = p[0], s = p[1]](double y) { return booleRoot(y, c, s >= 0 ? 1.0 : -1.0); };
  }
  fail(ErrorCode::Parse, "unknown formula template '" + spec.name +
                             "' (known: affine, constant, quadratic, quadratic_root, "
                             "x_minus_c_over_x, one_plus_c_over_x2, boole_root)");
}

CustomMapSpec parseCustomMapSpec(const nlohmann::json& doc) {
  try {
    CustomMapSpec spec;
    spec.name = doc.value("name", std::string("custom"));
    spec.lifted = doc.value("lift", true);
    for (const auto& b : doc.at("branches")) {
      BranchSpec bs;
      const auto& d = b.at("domain");
      bs.domain = {parseBound(d.at(0)), parseBound(d.at(1)), !b.value("domain_open_low", false)};
      if (b.contains("image")) {
        const auto& im = b.at("image");
        bs.image = Interval{parseBound(im.at(0)), parseBound(im.at(1)), true};
      }
      bs.forward = parseFormula(b.at("forward"));
      bs.inverse = parseFormula(b.at("inverse"));
      bs.derivative = parseFormula(b.at("derivative"));
      spec.branches.push_back(std::move(bs));
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("custom map spec: ") + e.what());
  }
}

MapPtr makeCustomPiecewise(const CustomMapSpec& spec) {
  if (spec.branches.empty()) fail(ErrorCode::InvalidArgument, "custom map has no branches");
  std::vector<Branch> branches;
  for (const auto& bs : spec.branches) {
    if (!(bs.domain.lo < bs.domain.hi)) fail(ErrorCode::InvalidArgument, "empty branch domain");
    if (spec.lifted && (bs.domain.lo < 0.0 || bs.domain.hi > 1.0)) {
      fail(ErrorCode::InvalidArgument, "lifted branches must lie in the cell [0, 1)");
    }
    Branch b;
    b.domain = bs.domain;
    b.forward = compileFormula(bs.forward);
    b.inverse = compileFormula(bs.inverse);
    b.derivative = compileFormula(bs.derivative);
    const double lo = std::isfinite(bs.domain.lo) ? bs.domain.lo : std::min(-1e3, bs.domain.hi - 1e3);
    const double hi = std::isfinite(bs.domain.hi) ? bs.domain.hi : std::max(1e3, lo + 1e3);
    for (int i = 0; i < 101; ++i) {
      const double x = lo + (hi - lo) * (i + 0.5) / 101.0;
      if (!(std::abs(b.derivative(x)) > 1.0)) {
        std::ostringstream os;
        os << "branch on [" << bs.domain.lo << ", " << bs.domain.hi << ") is not expanding at " << x;
        fail(ErrorCode::InvalidArgument, os.str());
      }
    }
    b.increasing = b.derivative(0.5 * (lo + hi)) > 0;
    if (bs.image) {
      b.image = *bs.image;
    } else {
      if (!bs.domain.finite()) fail(ErrorCode::InvalidArgument, "unbounded branch domains need an explicit image");
      const double a = b.forward(bs.domain.lo);
      const double c = b.forward(bs.domain.hi);
      b.image = {std::min(a, c), std::max(a, c), true};
    }
    branches.push_back(std::move(b));
  }
  std::optional<JumpLaw> law;
  if (spec.lifted && spec.branches.size() == 1) {
    const auto& bs = spec.branches.front();
    if (bs.domain.lo == 0.0 && bs.domain.hi == 1.0 && bs.forward.name == "affine") {
      const double k = bs.forward.params[0];
      const double k1 = bs.forward.params[1];
      if (k >= 2 && k == std::floor(k) && k1 == std::floor(k1)) {
        law = JumpLaw::uniform(static_cast<long>(k1), static_cast<long>(k1 + k));
      }
    }
  }
  const MapKind kind = MapKind::Custom;
  auto map = std::make_shared<PiecewiseMap>("custom:" + spec.name, kind, std::move(branches),
                                            spec.lifted, std::move(law));
  const auto& rep = map->measureReport();
  if (rep.samples == 0 || rep.maxDeviation > 1e-6) {
    std::ostringstream os;
    os.precision(10);
    os << "custom map '" << spec.name << "' does not preserve Lebesgue measure: sum of 1/|T'| deviates by "
       << rep.maxDeviation << " at y = " << rep.worstPoint;
    fail(ErrorCode::NotMeasurePreserving, os.str());
  }
  return map;
}

double iterate(const PiecewiseMap& map, double x, long n) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "negative iteration count");
  for (long i = 0; i < n; ++i) x = map(x);
  return x;
}

}  // namespace infinimix
