#ifndef HSMUCE_BENCHMARK_HPP_
#define HSMUCE_BENCHMARK_HPP_

#include <cstdint>

namespace hsmuce {

struct BenchmarkResult {
  std::int64_t n = 0;
  double median_fit_seconds = 0.0;
  std::int64_t k_hat = 0;
};

// Median wall time of fit() on a fixed two-change high signal-to-noise
// signal (values 0 -> 10 -> 0 at thirds, unit noise). Calibration happens
// once outside the timed region.
BenchmarkResult benchmark_fit(std::int64_t n, int runs, std::uint64_t monte_carlo_reps,
                              std::uint64_t seed, double alpha);

}  // namespace hsmuce

#endif  // HSMUCE_BENCHMARK_HPP_
