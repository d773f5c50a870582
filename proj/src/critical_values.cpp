#include "hsmuce/critical_values.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "hsmuce/local_stats.hpp"
#include "hsmuce/philox.hpp"

namespace hsmuce {

int dyadic_scale_count(std::int64_t n) {
  int d = 0;
  while ((std::int64_t{2} << d) <= n) ++d;
  return d;
}

std::int64_t next_power_of_two(std::int64_t n) {
  std::int64_t p = 1;
  while (p < n) p *= 2;
  return p;
}

void validate_weights(std::span<const double> weights) {
  double sum = 0.0;
  bool any_positive = false;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    if (w > 0.0) any_positive = true;
    sum += w;
  }
  if (!any_positive) throw std::invalid_argument("at least one weight must be positive");
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("weights must sum to one");
  }
}

std::vector<double> equal_weights(std::size_t d, std::size_t active) {
  if (active == 0 || active > d) throw std::invalid_argument("equal_weights: bad active count");
  std::vector<double> w(d, 0.0);
  for (std::size_t k = 0; k < active; ++k) w[k] = 1.0 / static_cast<double>(active);
  return w;
}

SimulationCache simulate_statistics(std::int64_t n, SystemKind kind,
                                    std::uint64_t num_reps, std::uint64_t seed,
                                    std::size_t memory_budget_bytes, int threads) {
  if (n < 2) throw std::domain_error("simulate_statistics: n must be >= 2");
  if (num_reps < 2) throw std::domain_error("simulate_statistics: need at least two repetitions");
  if (num_reps > std::numeric_limits<std::uint32_t>::max()) {
    throw std::domain_error("simulate_statistics: repetition count exceeds 32-bit index range");
  }
  const std::int64_t n_sim = next_power_of_two(n);
  const IntervalSystem system = IntervalSystem::build(n_sim, kind);
  const std::size_t d = system.scales().size();

  const std::size_t bytes = d * static_cast<std::size_t>(num_reps) * (sizeof(double) + sizeof(std::uint32_t)) +
                            static_cast<std::size_t>(n_sim) * sizeof(double);
  if (bytes > memory_budget_bytes) {
    throw ResourceError("simulate_statistics: " + std::to_string(bytes) +
                        " bytes exceed the memory budget of " +
                        std::to_string(memory_budget_bytes));
  }

  SimulationCache cache;
  cache.kind = kind;
  cache.n_sim = n_sim;
  cache.num_reps = num_reps;
  cache.seed = seed;
  cache.rng_id = std::string(kRngId);
  for (const IntervalScale& s : system.scales()) cache.labels.push_back(s.label);
  cache.sorted.assign(d, std::vector<double>(num_reps));

  int worker_count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (worker_count < 1) worker_count = 1;
  if (static_cast<std::uint64_t>(worker_count) > num_reps) {
    worker_count = static_cast<int>(num_reps);
  }

  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<double> z(n_sim);
    PrefixSums sums;
    for (std::uint64_t rep = begin; rep < end; ++rep) {
      PhiloxStream stream(seed, stream_id::simulation_rep(rep));
      stream.fill_normals(z);
      sums.reset(z);
      for (std::size_t s = 0; s < d; ++s) {
        const IntervalScale& scale = system.scales()[s];
        double best = -std::numeric_limits<double>::infinity();
        for (std::int64_t t = 0; t < scale.count; ++t) {
          const IndexInterval iv = scale.member(t);
          const double stat = local_statistic_from_moments(sums.moments(iv.i, iv.j), 0.0);
          if (stat > best) best = stat;
        }
        cache.sorted[s][rep] = best;
      }
    }
  };

  if (worker_count == 1) {
    run_range(0, num_reps);
  } else {
    std::vector<std::thread> workers;
    const std::uint64_t chunk = (num_reps + worker_count - 1) / worker_count;
    for (int t = 0; t < worker_count; ++t) {
      const std::uint64_t begin = chunk * static_cast<std::uint64_t>(t);
      const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, num_reps);
      if (begin >= end) break;
      workers.emplace_back(run_range, begin, end);
    }
    for (std::thread& w : workers) w.join();
  }

  // Sort each scale, remembering which repetition each order statistic
  // belongs to; that permutation is what makes the joint empirical CDF
  // computable from the cache alone.
  cache.order.assign(d, std::vector<std::uint32_t>(num_reps));
  std::vector<double> tmp(num_reps);
  for (std::size_t s = 0; s < d; ++s) {
    std::vector<std::uint32_t>& ord = cache.order[s];
    std::iota(ord.begin(), ord.end(), 0u);
    const std::vector<double>& vals = cache.sorted[s];
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return vals[a] < vals[b]; });
    for (std::uint64_t p = 0; p < num_reps; ++p) tmp[p] = vals[ord[p]];
    cache.sorted[s] = tmp;
  }
  return cache;
}

double CriticalValues::threshold_for_label(std::int64_t label) const {
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (labels[s] == label) return thresholds[s];
  }
  throw std::out_of_range("CriticalValues: no threshold for scale label " +
                          std::to_string(label));
}

std::vector<double> CriticalValues::thresholds_for(const IntervalSystem& system) const {
  if (system.kind() != kind) {
    throw std::invalid_argument("CriticalValues: interval system kind mismatch");
  }
  if (system.n() > n_sim) {
    throw std::invalid_argument("CriticalValues: calibrated for fewer observations than requested");
  }
  std::vector<double> out;
  out.reserve(system.scales().size());
  for (const IntervalScale& s : system.scales()) {
    out.push_back(threshold_for_label(s.label));
  }
  return out;
}

CriticalValues balance(const SimulationCache& cache, double alpha,
                       std::span<const double> weights) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("balance: alpha must lie in (0, 1)");
  }
  if (weights.size() != cache.scale_count()) {
    throw std::invalid_argument("balance: need one weight per cached scale");
  }
  validate_weights(weights);

  const std::uint64_t reps = cache.num_reps;
  const std::size_t d = cache.scale_count();
  std::vector<std::size_t> included;
  for (std::size_t s = 0; s < d; ++s) {
    if (weights[s] > 0.0) included.push_back(s);
  }

  // Start at the per-scale empirical (1 - alpha * weight) quantiles; the
  // joint rejection rate of that vector is at most alpha by the union bound.
  std::vector<std::uint64_t> w(d, reps);
  for (std::size_t s : included) {
    const auto cut = static_cast<std::uint64_t>(
        std::floor(static_cast<long double>(alpha) * weights[s] * reps));
    w[s] = reps - cut;
  }

  std::vector<std::uint32_t> violations(reps, 0);
  std::uint64_t rejected = 0;
  for (std::size_t s : included) {
    for (std::uint64_t p = w[s]; p < reps; ++p) {
      if (violations[cache.order[s][p]]++ == 0) ++rejected;
    }
  }

  const double level_count = alpha * static_cast<double>(reps);
  std::size_t last = d;
  while (static_cast<double>(rejected) <= level_count) {
    std::size_t best = d;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t s : included) {
      const double ratio = static_cast<double>(reps - w[s]) / weights[s];
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best = s;
      }
    }
    if (best == d || w[best] == 0) {
      throw std::logic_error("balance: ran out of order statistics");
    }
    --w[best];
    if (violations[cache.order[best][w[best]]]++ == 0) ++rejected;
    last = best;
  }
  if (last == d) {
    throw std::logic_error("balance: initial vector already exceeds the level");
  }
  ++w[last];  // back off the step that crossed the level

  CriticalValues cv;
  cv.kind = cache.kind;
  cv.n_sim = cache.n_sim;
  cv.num_reps = cache.num_reps;
  cv.seed = cache.seed;
  cv.alpha = alpha;
  cv.weights.assign(weights.begin(), weights.end());
  cv.labels = cache.labels;
  cv.thresholds.assign(d, std::numeric_limits<double>::infinity());
  for (std::size_t s : included) {
    cv.thresholds[s] = cache.sorted[s][w[s] - 1];
  }
  return cv;
}

}  // namespace hsmuce
