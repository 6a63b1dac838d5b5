#pragma once

#include <filesystem>
#include <mutex>
#include <string>

#include "infinimix/transfer.hpp"

namespace infinimix {

/// On-disk store of exact P^n g rungs. Every `interval`-th rung is written as
/// decimal numerators over a common denominator followed by a checksum line;
/// files failing the checksum are deleted and treated as missing.
class LadderCache : public LadderStore {
 public:
  explicit LadderCache(std::filesystem::path dir, long interval = 50);

  /// INFINIMIX_CACHE_DIR, or ./.infinimix_cache.
  static std::filesystem::path defaultDir();

  std::optional<std::pair<long, LatticeMeasure>> lookup(const std::string& key, long n, long after) override;
  void offer(const std::string& key, long n, const LatticeMeasure& rung) override;

  long hits() const;
  long writes() const;
  long corrupt() const;
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path fileFor(const std::string& key, long n) const;

 private:
  std::optional<LatticeMeasure> read(const std::filesystem::path& file, const std::string& key, long n) const;

  std::filesystem::path dir_;
  long interval_;
  mutable std::mutex mutex_;
  long hits_ = 0;
  long writes_ = 0;
  long corrupt_ = 0;
};

std::uint64_t fnv1a64(const std::string& data);

}  // namespace infinimix
