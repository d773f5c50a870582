#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "hsmuce/critical_values.hpp"
#include "hsmuce/philox.hpp"

namespace hsmuce {

namespace {

constexpr std::array<char, 4> kMagic = {'H', 'S', 'C', 'V'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kRngIdBytes = 16;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw CacheFormatError("cache file truncated");
  return value;
}

std::uint32_t kind_code(SystemKind kind) {
  switch (kind) {
    case SystemKind::kDyadicPartition: return 0;
    case SystemKind::kDyadicLength: return 1;
    case SystemKind::kAllIntervals: return 2;
  }
  throw std::logic_error("unknown SystemKind");
}

SystemKind kind_from_code(std::uint32_t code) {
  switch (code) {
    case 0: return SystemKind::kDyadicPartition;
    case 1: return SystemKind::kDyadicLength;
    case 2: return SystemKind::kAllIntervals;
    default: throw CacheFormatError("cache file carries an unknown system kind");
  }
}

}  // namespace

// Layout (little-endian): magic, version, system kind, n_sim, num_reps,
// seed, RNG id (16 bytes, zero padded), scale count, then the scale labels,
// the per-scale sorted statistics (num_reps doubles each) and the per-scale
// sort permutations (num_reps uint32 each). The permutations make the joint
// realization matrix recoverable, which the level condition of the
// calibration needs.
void store_cache(const SimulationCache& cache, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(kMagic.data(), kMagic.size());
    write_pod(out, kFormatVersion);
    write_pod(out, kind_code(cache.kind));
    write_pod(out, static_cast<std::uint64_t>(cache.n_sim));
    write_pod(out, cache.num_reps);
    write_pod(out, cache.seed);
    std::array<char, kRngIdBytes> rng_id{};
    std::memcpy(rng_id.data(), cache.rng_id.data(),
                std::min(cache.rng_id.size(), kRngIdBytes - 1));
    out.write(rng_id.data(), rng_id.size());
    write_pod(out, static_cast<std::uint32_t>(cache.scale_count()));
    write_pod(out, std::uint32_t{0});
    for (std::int64_t label : cache.labels) {
      write_pod(out, static_cast<std::uint64_t>(label));
    }
    for (const std::vector<double>& column : cache.sorted) {
      out.write(reinterpret_cast<const char*>(column.data()),
                static_cast<std::streamsize>(column.size() * sizeof(double)));
    }
    for (const std::vector<std::uint32_t>& column : cache.order) {
      out.write(reinterpret_cast<const char*>(column.data()),
                static_cast<std::streamsize>(column.size() * sizeof(std::uint32_t)));
    }
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SimulationCache load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) {
    throw CacheFormatError(path.string() + " is not a critical-value cache");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw CacheVersionError("cache format version " + std::to_string(version) +
                            " does not match expected version " +
                            std::to_string(kFormatVersion));
  }
  SimulationCache cache;
  cache.kind = kind_from_code(read_pod<std::uint32_t>(in));
  cache.n_sim = static_cast<std::int64_t>(read_pod<std::uint64_t>(in));
  cache.num_reps = read_pod<std::uint64_t>(in);
  cache.seed = read_pod<std::uint64_t>(in);
  std::array<char, kRngIdBytes> rng_id{};
  in.read(rng_id.data(), rng_id.size());
  if (!in) throw CacheFormatError("cache file truncated");
  cache.rng_id.assign(rng_id.data());
  if (cache.rng_id != kRngId) {
    throw CacheFormatError("cache was produced by unknown generator '" + cache.rng_id + "'");
  }
  const auto d = read_pod<std::uint32_t>(in);
  read_pod<std::uint32_t>(in);  // reserved
  for (std::uint32_t s = 0; s < d; ++s) {
    cache.labels.push_back(static_cast<std::int64_t>(read_pod<std::uint64_t>(in)));
  }
  cache.sorted.assign(d, std::vector<double>(cache.num_reps));
  for (std::uint32_t s = 0; s < d; ++s) {
    in.read(reinterpret_cast<char*>(cache.sorted[s].data()),
            static_cast<std::streamsize>(cache.num_reps * sizeof(double)));
    if (!in) throw CacheFormatError("cache file truncated");
  }
  cache.order.assign(d, std::vector<std::uint32_t>(cache.num_reps));
  for (std::uint32_t s = 0; s < d; ++s) {
    in.read(reinterpret_cast<char*>(cache.order[s].data()),
            static_cast<std::streamsize>(cache.num_reps * sizeof(std::uint32_t)));
    if (!in) throw CacheFormatError("cache file truncated");
  }
  // Trailing garbage would mean the file is not what we wrote.
  in.peek();
  if (!in.eof()) throw CacheFormatError("cache file has trailing data");
  return cache;
}

std::filesystem::path cache_file_name(SystemKind kind, std::int64_t n_sim,
                                      std::uint64_t num_reps, std::uint64_t seed) {
  return "critvals_" + to_string(kind) + "_n" + std::to_string(n_sim) + "_M" +
         std::to_string(num_reps) + "_seed" + std::to_string(seed) + "_" +
         std::string(kRngId) + ".bin";
}

SimulationCache obtain_cache(const std::string& dir, std::int64_t n, SystemKind kind,
                             std::uint64_t num_reps, std::uint64_t seed,
                             std::size_t memory_budget_bytes, int threads) {
  if (dir.empty()) {
    return simulate_statistics(n, kind, num_reps, seed, memory_budget_bytes, threads);
  }
  const std::int64_t n_sim = next_power_of_two(n);
  const std::filesystem::path path =
      std::filesystem::path(dir) / cache_file_name(kind, n_sim, num_reps, seed);
  if (std::filesystem::exists(path)) {
    SimulationCache cache = load_cache(path);
    if (cache.kind == kind && cache.n_sim == n_sim && cache.num_reps == num_reps &&
        cache.seed == seed) {
      return cache;
    }
    throw CacheFormatError(path.string() + " does not match its file name");
  }
  SimulationCache cache = simulate_statistics(n, kind, num_reps, seed,
                                              memory_budget_bytes, threads);
  std::filesystem::create_directories(dir);
  store_cache(cache, path);
  return cache;
}

}  // namespace hsmuce
