#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "infinimix/scenario.hpp"

namespace infinimix {

struct RunOptions {
  unsigned threads = 0;
  bool useCache = true;
  std::filesystem::path cacheDir;  // empty: LadderCache::defaultDir()
};

struct RunArtifact {
  std::string name;
  std::string config;  // ScenarioConfig::normalForm()
  std::string version;
  std::string startedAt;
  std::string finishedAt;
  long cacheHits = 0;
  /// 0 pass / converged, 2 fail / not uniform, 3 inconclusive, 1 error.
  int status = 1;
  std::string verdict;
  nlohmann::json results;  // deterministic given config and seed
  std::string csv;
  std::optional<std::string> error;

  nlohmann::json toJson() const;
  static RunArtifact fromJson(const nlohmann::json& j);
};

int statusOf(Verdict v);

/// Never throws on module errors: they are captured with status 1.
RunArtifact runScenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Writes <name>.artifact.json and <name>.series.csv; returns the JSON path.
std::filesystem::path writeArtifact(const RunArtifact& a, const std::filesystem::path& outDir);

/// Plain-text summary table of an artifact.
std::string renderReport(const nlohmann::json& artifact);

const char* libraryVersion();

}  // namespace infinimix
