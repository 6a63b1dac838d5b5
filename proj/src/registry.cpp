#include "infinimix/registry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "infinimix/errors.hpp"

namespace infinimix {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::size_t editDistance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::vector<std::string> heads(const std::vector<CatalogEntry>& cat) {
  std::vector<std::string> out;
  for (const auto& e : cat) out.push_back(e.pattern.substr(0, e.pattern.find(':')));
  return out;
}

[[noreturn]] void unresolved(const std::string& what, const std::string& id, const std::vector<CatalogEntry>& cat) {
  const auto head = id.substr(0, id.find(':'));
  std::vector<std::string> patterns;
  for (const auto& e : cat) patterns.push_back(e.pattern);
  std::string msg = "unknown " + what + " '" + id + "'";
  const auto near = nearestMatches(head, heads(cat));
  if (!near.empty()) {
    msg += "; nearest:";
    for (const auto& n : near) {
      for (const auto& e : cat) {
        if (e.pattern.substr(0, e.pattern.find(':')) == n) {
          msg += " " + e.pattern;
          break;
        }
      }
    }
  }
  fail(ErrorCode::UnresolvedId, msg);
}

void expectArgs(const std::string& id, const std::vector<std::string>& parts, std::size_t n) {
  if (parts.size() != n + 1) {
    fail(ErrorCode::Parse, "'" + id + "' expects " + std::to_string(n) + " parameter(s)");
  }
}

std::vector<Rational> rationalList(const std::string& s) {
  std::vector<Rational> out;
  for (const auto& v : split(s, ',')) out.push_back(parseRational(trim(v)));
  if (out.empty()) fail(ErrorCode::Parse, "empty value list");
  return out;
}

struct Term {
  double factor;
  std::string atom;
};

std::vector<Term> parseExpression(const std::string& expr) {
  std::istringstream in(expr);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  if (tokens.empty()) fail(ErrorCode::Parse, "empty observable expression");
  std::vector<Term> terms;
  double sign = 1.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i % 2 == 1) {
      if (tokens[i] == "+") sign = 1.0;
      else if (tokens[i] == "-") sign = -1.0;
      else fail(ErrorCode::Parse, "expected '+' or '-' in '" + expr + "', got '" + tokens[i] + "'");
      if (i + 1 == tokens.size()) fail(ErrorCode::Parse, "dangling operator in '" + expr + "'");
      continue;
    }
    const auto& tok = tokens[i];
    const auto star = tok.find('*');
    if (star == std::string::npos) {
      terms.push_back({sign, tok});
    } else {
      terms.push_back({sign * parseReal(tok.substr(0, star)), tok.substr(star + 1)});
    }
  }
  return terms;
}

GlobalObservable globalAtom(const std::string& id) {
  const auto parts = split(id, ':');
  const auto& head = parts[0];
  if (id == "sign") return makeSign();
  if (id == "one") return makeOne();
  if (id == "dyadicflip") return makeDyadicFlip();
  if (head == "const") {
    expectArgs(id, parts, 1);
    return makeConstant(parseReal(parts[1]));
  }
  if (head == "cos") {
    expectArgs(id, parts, 1);
    return makeCosine(parseInteger(parts[1]));
  }
  if (head == "halfcell") {
    expectArgs(id, parts, 1);
    return makeHalfCell(parseInteger(parts[1]));
  }
  if (head == "cellpattern") {
    expectArgs(id, parts, 1);
    return makeCellPattern(rationalList(parts[1]));
  }
  if (head == "cells") {
    expectArgs(id, parts, 2);
    return makeCells(parseInteger(parts[1]), rationalList(parts[2]));
  }
  for (const auto& e : localCatalog()) {
    if (e.pattern.substr(0, e.pattern.find(':')) == head) return asGlobal(resolveLocal(id));
  }
  unresolved("global observable", id, globalCatalog());
}

LocalObservable localAtom(const std::string& id) {
  const auto parts = split(id, ':');
  const auto& head = parts[0];
  if (head == "indicator" || head == "density") {
    expectArgs(id, parts, 2);
    return makeIndicatorDensity(parseReal(parts[1]), parseReal(parts[2]), head == "density");
  }
  if (head == "cell") {
    expectArgs(id, parts, 1);
    const long j = parseInteger(parts[1]);
    return makeIndicatorDensity(static_cast<double>(j), static_cast<double>(j + 1), false);
  }
  if (head == "gauss") {
    expectArgs(id, parts, 2);
    return makeGaussBump(parseReal(parts[1]), parseReal(parts[2]));
  }
  if (head == "triangle") {
    expectArgs(id, parts, 3);
    return makeTriangular(parseReal(parts[1]), parseReal(parts[2]), parseReal(parts[3]));
  }
  if (head == "masses") {
    expectArgs(id, parts, 2);
    auto g = makeLatticeDensity(LatticeMeasure::fromMasses(parseInteger(parts[1]), rationalList(parts[2])));
    g.id = id;
    return g;
  }
  unresolved("local observable", id, localCatalog());
}

}  // namespace

std::vector<CatalogEntry> mapCatalog() {
  return {{"boole", "Boole transformation x - 1/x"},
          {"rw:<k1>:<k2>", "random-walk map, slope k2-k1, jumps uniform on k1..k2-1"},
          {"custom:<file>", "piecewise map from a JSON branch specification"}};
}

std::vector<CatalogEntry> globalCatalog() {
  return {{"sign", "sign(x), sign(0) = 0"},
          {"one", "constant 1"},
          {"const:<c>", "constant c"},
          {"cos:<j>", "cos(2 pi x / j)"},
          {"halfcell:<j>", "indicator of [0, j/2) + jZ"},
          {"cellpattern:<v0,v1,...>", "periodic lattice step with the given cell values"},
          {"cells:<lo>:<v0,v1,...>", "lattice step on cells lo.., zero elsewhere"},
          {"dyadicflip", "(-1)^k on cells with floor(log2(|j|+1)) = k"},
          {"<local id>", "any local observable, zero off its support"}};
}

std::vector<CatalogEntry> localCatalog() {
  return {{"indicator:<a>:<b>", "indicator of [a, b)"},
          {"density:<a>:<b>", "indicator of [a, b) divided by b - a"},
          {"cell:<j>", "indicator of [j, j+1)"},
          {"gauss:<c>:<w>", "normal density truncated to c +- 8w"},
          {"triangle:<a>:<p>:<b>", "triangular density on [a, b) with peak p"},
          {"masses:<lo>:<m0,m1,...>", "lattice density with the given cell masses"}};
}

std::vector<std::string> nearestMatches(const std::string& word, const std::vector<std::string>& candidates,
                                        std::size_t k) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& c : candidates) scored.emplace_back(editDistance(word, c), c);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  const std::size_t cutoff = std::max<std::size_t>(3, word.size() / 2);
  for (const auto& [d, c] : scored) {
    if (out.size() == k || d > cutoff) break;
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

MapPtr resolveMap(const std::string& id, const std::filesystem::path& baseDir) {
  if (id == "boole") return makeBoole();
  const auto parts = split(id, ':');
  if (parts[0] == "rw") {
    expectArgs(id, parts, 2);
    return makeRandomWalkMap(parseInteger(parts[1]), parseInteger(parts[2]));
  }
  if (parts[0] == "custom") {
    const auto rel = id.substr(7);
    if (rel.empty()) fail(ErrorCode::Parse, "custom map needs a file name");
    std::filesystem::path p(rel);
    if (p.is_relative() && !baseDir.empty()) p = baseDir / p;
    std::ifstream in(p);
    if (!in) fail(ErrorCode::Io, "cannot open custom map file " + p.string());
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Parse, p.string() + ": " + e.what());
    }
    return makeCustomPiecewise(parseCustomMapSpec(doc));
  }
  unresolved("map", id, mapCatalog());
}

GlobalObservable resolveGlobal(const std::string& expr) {
  std::optional<GlobalObservable> out;
  for (const auto& t : parseExpression(expr)) {
    auto f = globalAtom(t.atom);
    if (t.factor != 1.0) f = scale(f, t.factor);
    out = out ? add(*out, f) : f;
  }
  return *out;
}

LocalObservable resolveLocal(const std::string& expr) {
  std::optional<LocalObservable> out;
  for (const auto& t : parseExpression(expr)) {
    auto g = localAtom(t.atom);
    if (t.factor != 1.0) g = scale(g, t.factor);
    out = out ? add(*out, g) : g;
  }
  return *out;
}

std::vector<long> parseNList(const std::string& text) {
  const auto s = trim(text);
  std::vector<long> out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const long a = parseInteger(trim(s.substr(0, dots)));
    auto rest = s.substr(dots + 2);
    long step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = parseInteger(trim(rest.substr(colon + 1)));
      rest = rest.substr(0, colon);
    }
    const long b = parseInteger(trim(rest));
    if (step <= 0) fail(ErrorCode::Parse, "n list step must be positive");
    if (b < a) fail(ErrorCode::Parse, "n list range is empty: " + s);
    for (long n = a; n <= b; n += step) out.push_back(n);
  } else {
    for (const auto& v : split(s, ',')) out.push_back(parseInteger(trim(v)));
  }
  if (out.empty()) fail(ErrorCode::Parse, "empty n list");
  if (out.front() < 0) fail(ErrorCode::Parse, "n list entries must be nonnegative");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) fail(ErrorCode::Parse, "n list must be strictly increasing: " + s);
  }
  return out;
}

Rational parseRational(const std::string& text) {
  const auto s = trim(text);
  if (s.empty()) fail(ErrorCode::Parse, "empty number");
  try {
    if (const auto dot = s.find('.'); dot != std::string::npos) {
      const bool neg = s[0] == '-';
      const auto digits = s.substr(neg || s[0] == '+' ? 1 : 0);
      const auto d = digits.find('.');
      const auto frac = digits.substr(d + 1);
      Integer num(digits.substr(0, d) + frac, 10);
      Integer den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
      Rational r(neg ? Integer(-num) : num, den);
      r.canonicalize();
      return r;
    }
    Rational r(s[0] == '+' ? s.substr(1) : s, 10);
    if (r.get_den() == 0) fail(ErrorCode::Parse, "zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    fail(ErrorCode::Parse, "not a rational number: '" + s + "'");
  }
}

double parseReal(const std::string& text) {
  const auto s = trim(text);
  if (s.find('/') != std::string::npos) return parseRational(s).get_d();
  double v = 0;
  const char* end = s.data() + s.size();
  const char* begin = s.data() + (!s.empty() && s[0] == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || s.empty()) fail(ErrorCode::Parse, "not a number: '" + s + "'");
  return v;
}

long parseInteger(const std::string& text) {
  const auto s = trim(text);
  long v = 0;
  const char* end = s.data() + s.size();
  const char* begin = s.data() + (!s.empty() && s[0] == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || s.empty()) fail(ErrorCode::Parse, "not an integer: '" + s + "'");
  return v;
}

FamilyKind parseFamilyKind(const std::string& name) {
  if (name == "symmetric") return FamilyKind::SymmetricIntervals;
  if (name == "translated") return FamilyKind::TranslatedIntervals;
  if (name == "cellaligned" || name == "cell-aligned") return FamilyKind::CellAligned;
  const auto near = nearestMatches(name, {"symmetric", "translated", "cellaligned"});
  fail(ErrorCode::UnresolvedId, "unknown family kind '" + name + "'" +
                                    (near.empty() ? std::string() : "; nearest: " + near.front()));
}

}  // namespace infinimix
