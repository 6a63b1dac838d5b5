#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "infinimix/errors.hpp"
#include "infinimix/registry.hpp"
#include "infinimix/runner.hpp"
#include "infinimix/scenario.hpp"

namespace fs = std::filesystem;
using namespace infinimix;

namespace {

fs::path scenarioDir() {
  if (const char* env = std::getenv("INFINIMIX_SCENARIO_DIR"); env && *env) return env;
  return INFINIMIX_SCENARIO_DIR;
}

// A path, or the name of a bundled scenario.
fs::path locateScenario(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  for (const auto& candidate : {scenarioDir() / arg, scenarioDir() / (arg + ".ini")}) {
    if (fs::exists(candidate)) return candidate;
  }
  return arg;
}

void printCatalog(const std::vector<CatalogEntry>& cat) {
  for (const auto& e : cat) std::cout << "  " << std::left << std::setw(26) << e.pattern << e.description << "\n";
}

int listScenarios() {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(scenarioDir(), ec)) {
    if (entry.path().extension() == ".ini") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      const auto cfg = loadScenario(f);
      std::cout << "  " << std::left << std::setw(22) << f.stem().string() << to_string(cfg.experiment) << " on "
                << (cfg.mapId.empty() ? "-" : cfg.mapId) << "\n";
    } catch (const Error& e) {
      std::cout << "  " << std::left << std::setw(22) << f.stem().string() << "invalid: " << e.what() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infinimix: numerical experiments on infinite-measure mixing"};
  app.set_version_flag("--version", std::string(libraryVersion()));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a scenario file and write its artifact");
  std::string scenarioArg;
  std::string outDir = ".";
  unsigned threads = 0;
  bool noCache = false;
  run->add_option("scenario", scenarioArg, "scenario file or bundled scenario name")->required();
  run->add_option("--out", outDir, "output directory");
  run->add_option("--threads", threads, "worker threads (0 = all cores)");
  run->add_flag("--no-cache", noCache, "do not read or write the ladder cache");

  auto* list = app.add_subcommand("list", "list registered maps, observables or bundled scenarios");
  std::string what;
  list->add_option("what", what, "maps | observables | scenarios")
      ->required()
      ->check(CLI::IsMember({"maps", "observables", "scenarios"}));

  auto* report = app.add_subcommand("report", "summarise an artifact");
  std::string artifactPath;
  report->add_option("artifact", artifactPath, "path to <name>.artifact.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const auto cfg = loadScenario(locateScenario(scenarioArg));
      RunOptions opts;
      opts.threads = threads;
      opts.useCache = !noCache;
      const auto artifact = runScenario(cfg, opts);
      const auto path = writeArtifact(artifact, outDir);
      std::cout << cfg.name << ": " << artifact.verdict << " (status " << artifact.status << ")\n";
      if (artifact.error) std::cerr << "error: " << *artifact.error << "\n";
      std::cout << "artifact " << path.string() << "\n";
      return artifact.status;
    }
    if (*list) {
      if (what == "maps") {
        printCatalog(mapCatalog());
      } else if (what == "observables") {
        std::cout << "global:\n";
        printCatalog(globalCatalog());
        std::cout << "local:\n";
        printCatalog(localCatalog());
        std::cout << "expressions: terms joined by ' + ' or ' - ', each optionally scaled as 2*<id>\n";
      } else {
        return listScenarios();
      }
      return 0;
    }
    if (*report) {
      std::ifstream in(artifactPath);
      if (!in) fail(ErrorCode::Io, "cannot open " + artifactPath);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, artifactPath + ": " + e.what());
      }
      std::cout << renderReport(j);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
