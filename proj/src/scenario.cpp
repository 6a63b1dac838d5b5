#include "infinimix/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "infinimix/errors.hpp"
#include "infinimix/registry.hpp"

namespace infinimix {
namespace {

struct Setting {
  std::string value;
  int line;
  int column;  // of the value
};

using Sections = std::map<std::string, std::map<std::string, Setting>>;

const std::map<std::string, std::vector<std::string>>& allowedKeys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"run",
       {"experiment", "name", "n", "method", "tolerance", "seed", "samples", "float_switchover", "tail_fraction",
        "output", "target", "expect", "collar", "triples", "min_agree", "points", "range", "quadrature_budget",
        "local_clt"}},
      {"map", {"id"}},
      {"observables", {"F", "G", "f", "g", "h", "gset", "fset", "avg_f"}},
      {"family", {"kind", "probes", "probes_scale", "scales"}}};
  return keys;
}

const std::map<std::string, Experiment>& experimentNames() {
  static const std::map<std::string, Experiment> names{
      {"corr", Experiment::Corr},   {"glm", Experiment::Glm},   {"llm", Experiment::Llm},
      {"ggm", Experiment::Ggm},     {"coalescence", Experiment::Coalescence},
      {"rho", Experiment::Rho},     {"avg", Experiment::Avg},   {"avol", Experiment::Avol},
      {"lin", Experiment::Lin},     {"p1", Experiment::P1},     {"duality", Experiment::Duality}};
  return names;
}

std::vector<std::string> keysOf(const std::map<std::string, std::vector<std::string>>& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

[[noreturn]] void parseError(int line, int column, const std::string& msg) {
  fail(ErrorCode::Parse, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg);
}

std::string unquote(const std::string& v, int line, int column) {
  if (v.size() >= 2 && v.front() == '"') {
    if (v.back() != '"') parseError(line, column, "unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (!v.empty() && v.front() == '"') parseError(line, column, "unterminated string");
  return v;
}

Sections tokenize(const std::string& text) {
  Sections out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#' || raw[first] == ';') continue;
    const int col = static_cast<int>(first) + 1;
    if (raw[first] == '[') {
      const auto close = raw.find(']', first);
      if (close == std::string::npos) parseError(lineNo, col, "missing ']'");
      if (raw.find_first_not_of(" \t", close + 1) != std::string::npos) {
        parseError(lineNo, static_cast<int>(close) + 2, "unexpected text after section header");
      }
      section = raw.substr(first + 1, close - first - 1);
      if (!allowedKeys().count(section)) {
        const auto near = nearestMatches(section, keysOf(allowedKeys()), 1);
        parseError(lineNo, col + 1,
                   "unknown section [" + section + "]" + (near.empty() ? "" : "; did you mean [" + near[0] + "]"));
      }
      if (out.count(section)) parseError(lineNo, col, "duplicate section [" + section + "]");
      out[section];
      continue;
    }
    const auto eq = raw.find('=', first);
    if (eq == std::string::npos) parseError(lineNo, col, "expected 'key = value'");
    std::string key = raw.substr(first, eq - first);
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key.empty()) parseError(lineNo, col, "missing key");
    if (section.empty()) parseError(lineNo, col, "key '" + key + "' outside of any section");
    const auto& allowed = allowedKeys().at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      const auto near = nearestMatches(key, allowed, 1);
      parseError(lineNo, col,
                 "unknown key '" + key + "' in [" + section + "]" +
                     (near.empty() ? "" : "; did you mean '" + near[0] + "'"));
    }
    const auto vstart = raw.find_first_not_of(" \t", eq + 1);
    const int vcol = vstart == std::string::npos ? static_cast<int>(eq) + 2 : static_cast<int>(vstart) + 1;
    std::string value = vstart == std::string::npos ? std::string() : raw.substr(vstart);
    value.erase(value.find_last_not_of(" \t") + 1);
    value = unquote(value, lineNo, vcol);
    if (value.empty()) parseError(lineNo, vcol, "empty value for '" + key + "'");
    auto& sec = out[section];
    if (sec.count(key)) parseError(lineNo, col, "duplicate key '" + key + "'");
    sec[key] = {value, lineNo, vcol};
  }
  return out;
}

// Runs `fn` and rethrows any library error with the setting's position.
template <class Fn>
auto at(const Setting& s, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(e.code(), "line " + std::to_string(s.line) + ", column " + std::to_string(s.column) + ": " + e.detail());
  }
}

std::vector<double> realList(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  for (std::string item; std::getline(in, item, ',');) out.push_back(parseReal(item));
  return out;
}

bool parseBool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  fail(ErrorCode::Parse, "expected true or false, got '" + s + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string joinReals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string item; std::getline(in, item, ';');) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    item = item.substr(b);
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(item);
  }
  return out;
}

// Roles each experiment needs, and whether they are global (G) or local (L).
struct RoleSpec {
  std::string role;
  char kind;
  bool required;
};

std::vector<RoleSpec> rolesFor(Experiment e) {
  switch (e) {
    case Experiment::Corr: return {{"F", 'G', true}, {"g", 'L', true}};
    case Experiment::Glm: return {{"F", 'G', true}, {"gset", 'L', true}};
    case Experiment::Llm: return {{"f", 'L', true}, {"g", 'L', true}};
    case Experiment::Ggm: return {{"F", 'G', true}, {"G", 'G', true}};
    case Experiment::Coalescence: return {{"F", 'G', true}, {"g", 'L', true}, {"h", 'L', true}};
    case Experiment::Rho: return {{"F", 'G', true}, {"gset", 'L', true}};
    case Experiment::Avg: return {{"F", 'G', true}};
    case Experiment::Avol: return {};
    case Experiment::Lin: return {{"g", 'L', true}};
    case Experiment::P1: return {};
    case Experiment::Duality: return {{"fset", 'G', false}, {"gset", 'L', false}};
  }
  return {};
}

bool needsFamily(Experiment e) {
  return e == Experiment::Ggm || e == Experiment::Avg || e == Experiment::Avol;
}

bool needsN(Experiment e) { return e != Experiment::Avg && e != Experiment::P1; }

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [name, value] : experimentNames()) {
    if (value == e) return name;
  }
  return "unknown";
}

ExhaustiveFamily FamilySpec::build() const {
  ExhaustiveFamily fam;
  fam.kind = kind;
  fam.probeGrid = probes;
  fam.probesScaleWithM = probesScale;
  fam.scaleLadder = scales;
  return fam;
}

std::optional<double> ScenarioConfig::extraReal(const std::string& key) const {
  const auto it = extra.find(key);
  if (it == extra.end()) return std::nullopt;
  return parseReal(it->second);
}

std::string ScenarioConfig::extraString(const std::string& key, const std::string& fallback) const {
  const auto it = extra.find(key);
  return it == extra.end() ? fallback : it->second;
}

std::vector<std::string> ScenarioConfig::observableList(const std::string& role) const {
  const auto it = observables.find(role);
  return it == observables.end() ? std::vector<std::string>{} : splitList(it->second);
}

std::string ScenarioConfig::normalForm() const {
  std::ostringstream os;
  os << "[run]\n";
  std::map<std::string, std::string> run = extra;
  run["experiment"] = to_string(experiment);
  run["name"] = name;
  std::string ns;
  for (std::size_t i = 0; i < nList.size(); ++i) ns += (i ? "," : "") + std::to_string(nList[i]);
  if (!nList.empty()) run["n"] = ns;
  run["method"] = to_string(method);
  run["tolerance"] = fmt(tolerance);
  run["seed"] = std::to_string(seed);
  run["samples"] = std::to_string(samples);
  run["float_switchover"] = std::to_string(floatSwitchover);
  run["tail_fraction"] = fmt(tailFraction);
  if (!output.empty()) run["output"] = output;
  for (const auto& [k, v] : run) os << k << " = " << v << "\n";
  if (!mapId.empty()) os << "[map]\nid = " << mapId << "\n";
  if (!observables.empty()) {
    os << "[observables]\n";
    for (const auto& [k, v] : observables) os << k << " = " << v << "\n";
  }
  if (family) {
    os << "[family]\n";
    os << "kind = " << to_string(family->kind) << "\n";
    os << "probes = " << joinReals(family->probes) << "\n";
    os << "probes_scale = " << (family->probesScale ? "true" : "false") << "\n";
    os << "scales = " << joinReals(family->scales) << "\n";
  }
  return os.str();
}

nlohmann::json ScenarioConfig::echo() const { return normalForm(); }

ScenarioConfig parseScenario(const std::string& text, const std::filesystem::path& baseDir,
                             const std::string& defaultName) {
  const Sections sections = tokenize(text);
  ScenarioConfig cfg;
  cfg.baseDir = baseDir;
  const auto runIt = sections.find("run");
  if (runIt == sections.end() || !runIt->second.count("experiment")) {
    parseError(1, 1, "missing [run] experiment");
  }
  const auto& run = runIt->second;
  const Setting& exp = run.at("experiment");
  const auto eIt = experimentNames().find(exp.value);
  if (eIt == experimentNames().end()) {
    std::vector<std::string> names;
    for (const auto& [k, v] : experimentNames()) names.push_back(k);
    const auto near = nearestMatches(exp.value, names, 1);
    parseError(exp.line, exp.column,
               "unknown experiment '" + exp.value + "'" + (near.empty() ? "" : "; did you mean '" + near[0] + "'"));
  }
  cfg.experiment = eIt->second;
  cfg.name = run.count("name") ? run.at("name").value
                               : (defaultName.empty() ? to_string(cfg.experiment) : defaultName);

  for (const auto& [key, s] : run) {
    if (key == "experiment" || key == "name") continue;
    if (key == "n") {
      cfg.nList = at(s, [&] { return parseNList(s.value); });
    } else if (key == "method") {
      cfg.method = at(s, [&] { return parseMethod(s.value); });
    } else if (key == "tolerance") {
      cfg.tolerance = at(s, [&] { return parseReal(s.value); });
      if (!(cfg.tolerance > 0)) parseError(s.line, s.column, "tolerance must be positive");
    } else if (key == "seed") {
      const long v = at(s, [&] { return parseInteger(s.value); });
      if (v < 0) parseError(s.line, s.column, "seed must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(v);
    } else if (key == "samples") {
      cfg.samples = at(s, [&] { return parseInteger(s.value); });
      if (cfg.samples < 2) parseError(s.line, s.column, "samples must be at least 2");
    } else if (key == "float_switchover") {
      cfg.floatSwitchover = at(s, [&] { return parseInteger(s.value); });
    } else if (key == "tail_fraction") {
      cfg.tailFraction = at(s, [&] { return parseReal(s.value); });
      if (!(cfg.tailFraction > 0 && cfg.tailFraction <= 1)) parseError(s.line, s.column, "tail_fraction must be in (0, 1]");
    } else if (key == "output") {
      cfg.output = s.value;
    } else {
      // Validate the typed extras now so a bad value fails at parse time.
      if (key == "expect") {
        static const std::vector<std::string> ok{"pass", "fail", "converged", "not-uniform", "inconclusive"};
        if (std::find(ok.begin(), ok.end(), s.value) == ok.end()) {
          parseError(s.line, s.column, "expect must be one of pass, fail, converged, not-uniform, inconclusive");
        }
      } else if (key == "local_clt") {
        at(s, [&] { return parseBool(s.value); });
      } else if (key == "range") {
        const auto r = at(s, [&] { return realList(s.value); });
        if (r.size() != 2 || !(r[0] < r[1])) parseError(s.line, s.column, "range must be 'lo,hi' with lo < hi");
      } else if (key == "target" && s.value == "cesaro") {
      } else {
        at(s, [&] { return parseReal(s.value); });
      }
      cfg.extra[key] = s.value;
    }
  }
  if (needsN(cfg.experiment) && cfg.nList.empty()) parseError(exp.line, exp.column, "experiment needs an n list");

  if (const auto m = sections.find("map"); m != sections.end() && m->second.count("id")) {
    const Setting& s = m->second.at("id");
    cfg.mapId = s.value;
    at(s, [&] { return resolveMap(s.value, baseDir); });
  } else if (cfg.experiment != Experiment::Avg) {
    parseError(1, 1, "missing [map] id");
  }

  const auto roles = rolesFor(cfg.experiment);
  if (const auto o = sections.find("observables"); o != sections.end()) {
    for (const auto& [key, s] : o->second) {
      if (key == "avg_f") {
        at(s, [&] { return parseReal(s.value); });
        cfg.extra["avg_f"] = s.value;
        continue;
      }
      const auto r = std::find_if(roles.begin(), roles.end(), [&](const RoleSpec& rs) { return rs.role == key; });
      if (r == roles.end()) {
        parseError(s.line, s.column - static_cast<int>(key.size()),
                   "observable '" + key + "' is not used by experiment " + to_string(cfg.experiment));
      }
      for (const auto& item : splitList(s.value)) {
        if (r->kind == 'G') {
          at(s, [&] { return resolveGlobal(item); });
        } else {
          at(s, [&] { return resolveLocal(item); });
        }
      }
      cfg.observables[key] = s.value;
    }
  }
  for (const auto& r : roles) {
    if (r.required && !cfg.observables.count(r.role)) {
      parseError(exp.line, exp.column, "experiment " + to_string(cfg.experiment) + " needs observable '" + r.role + "'");
    }
  }

  if (const auto f = sections.find("family"); f != sections.end()) {
    FamilySpec fam;
    for (const auto& [key, s] : f->second) {
      if (key == "kind") fam.kind = at(s, [&] { return parseFamilyKind(s.value); });
      if (key == "probes") fam.probes = at(s, [&] { return realList(s.value); });
      if (key == "probes_scale") fam.probesScale = at(s, [&] { return parseBool(s.value); });
      if (key == "scales") {
        fam.scales = at(s, [&] { return realList(s.value); });
        for (std::size_t i = 0; i < fam.scales.size(); ++i) {
          if (!(fam.scales[i] > 0) || (i && fam.scales[i] <= fam.scales[i - 1])) {
            parseError(s.line, s.column, "scales must be positive and increasing");
          }
        }
      }
    }
    if (fam.scales.empty()) parseError(1, 1, "[family] needs scales");
    cfg.family = fam;
  } else if (needsFamily(cfg.experiment)) {
    parseError(exp.line, exp.column, "experiment " + to_string(cfg.experiment) + " needs a [family] section");
  }
  return cfg;
}

ScenarioConfig loadScenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::Io, "cannot open scenario " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parseScenario(ss.str(), file.parent_path(), file.stem().string());
  } catch (const Error& e) {
    fail(e.code(), file.string() + ": " + e.detail());
  }
}

}  // namespace infinimix
