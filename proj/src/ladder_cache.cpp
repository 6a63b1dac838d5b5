#include "infinimix/ladder_cache.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "infinimix/errors.hpp"

namespace infinimix {
namespace {

constexpr const char* kMagic = "infinimix-ladder 1";

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

LadderCache::LadderCache(std::filesystem::path dir, long interval) : dir_(std::move(dir)), interval_(interval) {
  if (interval_ < 1) fail(ErrorCode::InvalidArgument, "cache interval must be positive");
}

std::filesystem::path LadderCache::defaultDir() {
  if (const char* env = std::getenv("INFINIMIX_CACHE_DIR"); env && *env) return env;
  return ".infinimix_cache";
}

std::filesystem::path LadderCache::fileFor(const std::string& key, long n) const {
  return dir_ / hex(fnv1a64(key)) / ("n" + std::to_string(n) + ".rung");
}

std::optional<LatticeMeasure> LadderCache::read(const std::filesystem::path& file, const std::string& key,
                                                long n) const {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto tag = text.rfind("checksum ");
  if (tag == std::string::npos) return std::nullopt;
  const std::string body = text.substr(0, tag);
  std::string stored = text.substr(tag + 9);
  while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
  if (stored != hex(fnv1a64(body))) return std::nullopt;

  std::istringstream lines(body);
  std::string line;
  std::getline(lines, line);
  if (line != kMagic) return std::nullopt;
  std::getline(lines, line);
  if (line != "key " + key) return std::nullopt;
  std::string word;
  long storedN = 0;
  long offset = 0;
  std::size_t count = 0;
  std::string den;
  lines >> word >> storedN;
  if (word != "n" || storedN != n) return std::nullopt;
  lines >> word >> offset;
  if (word != "offset") return std::nullopt;
  lines >> word >> den;
  if (word != "denominator") return std::nullopt;
  lines >> word >> count;
  if (word != "cells") return std::nullopt;
  std::vector<Integer> nums;
  nums.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string v;
    if (!(lines >> v)) return std::nullopt;
    nums.emplace_back(v);
  }
  return LatticeMeasure(offset, std::move(nums), Integer(den));
}

std::optional<std::pair<long, LatticeMeasure>> LadderCache::lookup(const std::string& key, long n, long after) {
  std::lock_guard lock(mutex_);
  const auto sub = dir_ / hex(fnv1a64(key));
  std::error_code ec;
  if (!std::filesystem::is_directory(sub, ec)) return std::nullopt;
  std::vector<long> stored;
  for (const auto& entry : std::filesystem::directory_iterator(sub, ec)) {
    const auto name = entry.path().filename().string();
    if (name.size() < 7 || name[0] != 'n' || entry.path().extension() != ".rung") continue;
    try {
      stored.push_back(std::stol(name.substr(1, name.size() - 6)));
    } catch (const std::exception&) {
    }
  }
  std::sort(stored.rbegin(), stored.rend());
  for (long m : stored) {
    if (m > n) continue;
    if (m <= after) break;
    const auto file = fileFor(key, m);
    try {
      if (auto rung = read(file, key, m)) {
        ++hits_;
        return std::make_pair(m, std::move(*rung));
      }
    } catch (const std::exception&) {
    }
    ++corrupt_;
    std::filesystem::remove(file, ec);
  }
  return std::nullopt;
}

void LadderCache::offer(const std::string& key, long n, const LatticeMeasure& rung) {
  if (n % interval_ != 0) return;
  std::lock_guard lock(mutex_);
  const auto file = fileFor(key, n);
  std::error_code ec;
  if (std::filesystem::exists(file, ec)) return;
  std::filesystem::create_directories(file.parent_path(), ec);
  if (ec) return;  // a read-only cache is just a slower cache
  std::ostringstream os;
  os << kMagic << "\nkey " << key << "\nn " << n << "\noffset " << rung.offset() << "\ndenominator "
     << rung.denominator().get_str() << "\ncells " << rung.numerators().size() << "\n";
  for (const auto& v : rung.numerators()) os << v.get_str() << "\n";
  const std::string body = os.str();
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return;
    out << body << "checksum " << hex(fnv1a64(body)) << "\n";
    if (!out) return;
  }
  std::filesystem::rename(tmp, file, ec);
  if (!ec) ++writes_;
}

long LadderCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

long LadderCache::writes() const {
  std::lock_guard lock(mutex_);
  return writes_;
}

long LadderCache::corrupt() const {
  std::lock_guard lock(mutex_);
  return corrupt_;
}

}  // namespace infinimix
