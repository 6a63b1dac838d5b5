#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infinimix/mixing.hpp"
#include "infinimix/volume.hpp"

namespace infinimix {

enum class Experiment { Corr, Glm, Llm, Ggm, Coalescence, Rho, Avg, Avol, Lin, P1, Duality };

std::string to_string(Experiment e);

struct FamilySpec {
  FamilyKind kind = FamilyKind::SymmetricIntervals;
  std::vector<double> probes{0.0};
  bool probesScale = false;
  std::vector<double> scales;

  ExhaustiveFamily build() const;
};

struct ScenarioConfig {
  std::string name;
  Experiment experiment = Experiment::Corr;
  std::string mapId;
  std::map<std::string, std::string> observables;  // role -> expression
  std::optional<FamilySpec> family;
  std::vector<long> nList;
  CorrelationMethod method = CorrelationMethod::Auto;
  double tolerance = 1e-2;
  std::uint64_t seed = 20240611;
  long samples = 1'000'000;
  long floatSwitchover = -1;
  double tailFraction = 1.0 / 3.0;
  std::string output;
  /// Experiment-specific settings (target, expect, collar, ...), already validated.
  std::map<std::string, std::string> extra;
  /// Directory of the scenario file; custom map paths are relative to it.
  std::filesystem::path baseDir;

  /// Sorted "[section]\nkey = value" text of every setting, defaults included.
  std::string normalForm() const;
  nlohmann::json echo() const;

  std::optional<double> extraReal(const std::string& key) const;
  std::string extraString(const std::string& key, const std::string& fallback = {}) const;
  /// Entries of a ';' separated observable list.
  std::vector<std::string> observableList(const std::string& role) const;
};

/// Strict parser: unknown sections and keys are rejected with the nearest
/// valid name, and every id is resolved against the registries.
ScenarioConfig parseScenario(const std::string& text, const std::filesystem::path& baseDir = {},
                             const std::string& defaultName = {});
ScenarioConfig loadScenario(const std::filesystem::path& file);

}  // namespace infinimix
