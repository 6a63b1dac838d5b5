#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "infinimix/maps.hpp"
#include "infinimix/observables.hpp"
#include "infinimix/volume.hpp"

namespace infinimix {

struct CatalogEntry {
  std::string pattern;
  std::string description;
};

std::vector<CatalogEntry> mapCatalog();
std::vector<CatalogEntry> globalCatalog();
std::vector<CatalogEntry> localCatalog();

/// Up to `k` candidates closest to `word` in edit distance.
std::vector<std::string> nearestMatches(const std::string& word, const std::vector<std::string>& candidates,
                                        std::size_t k = 3);

/// "boole", "rw:<k1>:<k2>" or "custom:<file>" (relative to `baseDir`).
MapPtr resolveMap(const std::string& id, const std::filesystem::path& baseDir = {});

/// Expressions are terms joined by " + " or " - " (spaces required), each
/// term an optional "<number>*" factor followed by an atom id.
GlobalObservable resolveGlobal(const std::string& expr);
LocalObservable resolveLocal(const std::string& expr);

/// "a..b", "a..b:step" or a comma separated list.
std::vector<long> parseNList(const std::string& text);

Rational parseRational(const std::string& text);
double parseReal(const std::string& text);
long parseInteger(const std::string& text);

FamilyKind parseFamilyKind(const std::string& name);

}  // namespace infinimix
