#ifndef HSMUCE_CRITICAL_VALUES_HPP_
#define HSMUCE_CRITICAL_VALUES_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsmuce/intervals.hpp"

namespace hsmuce {

class CacheVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CacheFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Monte-Carlo realizations of the per-scale maxima under standard gaussian
// noise, simulated once and recycled across significance levels and weights.
// Sample sizes are rounded up to the next power of two before simulating, so
// one cache per dyadic size serves all smaller n (the maxima are then taken
// over more intervals, which keeps the level guarantee).
struct SimulationCache {
  SystemKind kind = SystemKind::kDyadicPartition;
  std::int64_t n_sim = 0;  // power of two
  std::uint64_t num_reps = 0;
  std::uint64_t seed = 0;
  std::string rng_id;
  std::vector<std::int64_t> labels;  // scale labels, system order
  // sorted[s] holds the num_reps realizations of scale s ascending;
  // order[s][p] is the repetition index of the p-th order statistic, so the
  // joint realization matrix is exactly recoverable.
  std::vector<std::vector<double>> sorted;
  std::vector<std::vector<std::uint32_t>> order;

  std::size_t scale_count() const { return labels.size(); }
};

// Draws `num_reps` independent realizations of the per-scale maxima for the
// given system at the dyadic size covering n. Deterministic in (seed, kind,
// rounded n, num_reps); repetitions use independent counter-based substreams
// so the result does not depend on the thread count.
SimulationCache simulate_statistics(std::int64_t n, SystemKind kind,
                                    std::uint64_t num_reps, std::uint64_t seed,
                                    std::size_t memory_budget_bytes = std::size_t{2} << 30,
                                    int threads = 0);

// Scale-dependent critical values together with the configuration that
// produced them. Omitted scales (weight zero) carry +infinity.
struct CriticalValues {
  SystemKind kind = SystemKind::kDyadicPartition;
  std::int64_t n_sim = 0;
  std::uint64_t num_reps = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  std::vector<double> weights;
  std::vector<std::int64_t> labels;
  std::vector<double> thresholds;  // aligned with labels

  double threshold_for_label(std::int64_t label) const;

  // Thresholds in the scale order of `system` (which may be built for a
  // smaller n than n_sim; labels must all be present).
  std::vector<double> thresholds_for(const IntervalSystem& system) const;
};

// Sum-to-one check with tolerance 1e-12; zero entries mark omitted scales.
void validate_weights(std::span<const double> weights);

// Equal weights over the first `active` scales of a d-scale system, zero
// beyond. Used as the default with active = floor(log2 n) of the data.
std::vector<double> equal_weights(std::size_t d, std::size_t active);

// Calibrates the per-scale thresholds on the cached sample: start at the
// per-scale empirical (1 - alpha * weight) quantiles, then repeatedly lower
// the entry with the smallest rejection-to-weight ratio one order statistic
// at a time until the joint empirical rejection rate first exceeds alpha,
// and back off one step. The result satisfies the empirical level condition
// alpha - 1/M < rejection <= alpha, and the per-scale rejection-to-weight
// ratios agree pairwise up to one lowering step of the smaller weight,
// 1/(M min(w1, w2)) - for w1 >= w2 that is the plain 1/M slack. Ties in the
// argmin go to the lowest scale index.
CriticalValues balance(const SimulationCache& cache, double alpha,
                       std::span<const double> weights);

// Versioned binary container; writes are atomic (temp file + rename), loads
// of truncated or foreign files raise CacheFormatError and version mismatches
// CacheVersionError. Two caches with equal (kind, n_sim, num_reps, seed) are
// byte-identical.
void store_cache(const SimulationCache& cache, const std::filesystem::path& path);
SimulationCache load_cache(const std::filesystem::path& path);

// File name a cache is stored under; keyed by everything that determines its
// bytes.
std::filesystem::path cache_file_name(SystemKind kind, std::int64_t n_sim,
                                      std::uint64_t num_reps, std::uint64_t seed);

// Loads a matching cache from `dir`, or simulates one and persists it there.
// An empty dir disables on-disk recycling.
SimulationCache obtain_cache(const std::string& dir, std::int64_t n, SystemKind kind,
                             std::uint64_t num_reps, std::uint64_t seed,
                             std::size_t memory_budget_bytes = std::size_t{2} << 30,
                             int threads = 0);

// floor(log2(n))
int dyadic_scale_count(std::int64_t n);
std::int64_t next_power_of_two(std::int64_t n);

}  // namespace hsmuce

#endif  // HSMUCE_CRITICAL_VALUES_HPP_
