#ifndef HSMUCE_ESTIMATOR_HPP_
#define HSMUCE_ESTIMATOR_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hsmuce/critical_values.hpp"
#include "hsmuce/intervals.hpp"
#include "hsmuce/multiscale.hpp"
#include "hsmuce/step_fn.hpp"

namespace hsmuce {

// Admissible range for the segment mean on one test interval, derived from
// inverting the local test at its threshold.
struct MeanBound {
  IndexInterval interval;
  double lo = 0.0;
  double hi = 0.0;
};

// All mean bounds of a system whose scale carries a finite threshold,
// indexed by interval start and end position for the sweeps below.
class IntervalBounds {
 public:
  static IntervalBounds from_entries(std::int64_t n, std::vector<MeanBound> entries);

  std::int64_t n() const { return n_; }
  const std::vector<MeanBound>& entries() const { return entries_; }

  // Entry indices of intervals ending at position t / starting at position s.
  std::span<const std::uint32_t> ending_at(std::int64_t t) const;
  std::span<const std::uint32_t> starting_at(std::int64_t s) const;

 private:
  friend class IntervalBoundsBuilder;
  std::int64_t n_ = 0;
  std::vector<MeanBound> entries_;
  std::vector<std::uint32_t> end_offset_, end_items_;
  std::vector<std::uint32_t> start_offset_, start_items_;
};

// Incremental construction: counts positions while entries stream in, so
// indexing needs only one more pass over the entries.
class IntervalBoundsBuilder {
 public:
  IntervalBoundsBuilder(std::int64_t n, std::int64_t expected_entries);
  void add(IndexInterval interval, double lo, double hi);
  IntervalBounds finish();

 private:
  IntervalBounds bounds_;
};

// [mean - w, mean + w] with w = sqrt(threshold * var_hat / len) for every
// system interval whose scale threshold is finite.
IntervalBounds compute_bounds(std::span<const double> y, const IntervalSystem& system,
                              std::span<const double> thresholds);
IntervalBounds compute_bounds(const PrefixSums& sums, const IntervalSystem& system,
                              std::span<const double> thresholds);

// Index brackets for the change-points: the k-th change of every feasible
// solution with the minimal number of changes lies in [left[k-1], right[k-1]]
// (1-based k). They double as confidence intervals after division by n.
struct Limits {
  std::vector<std::int64_t> left;
  std::vector<std::int64_t> right;

  std::int64_t change_point_count() const {
    return static_cast<std::int64_t>(left.size());
  }
};

// Minimal number of change-points and their limit brackets. Forward sweep:
// extend a segment until the running intersection of its mean bounds becomes
// empty, which forces a change before that position; the count of forced
// breaks is the estimate. Backward sweep produces the left limits.
Limits left_right_limits(const IntervalBounds& bounds);

struct FitResult {
  std::int64_t k_hat = 0;
  StepFn fit;
  // Confidence intervals [left/n, right/n] per change-point.
  std::vector<std::pair<double, double>> cis;
  Limits limits;
  // Per-index envelope [lo, hi], 1-based positions 1..n at band[i-1].
  std::vector<std::pair<double, double>> band;
  double worst_margin = 0.0;  // max over tested intervals of statistic - threshold
  double total_cost = 0.0;    // profile-likelihood cost of the returned fit
};

// The full estimator: minimal change-point count, constrained maximum-
// likelihood fit via the window-pruned dynamic program, confidence intervals
// and band. Thresholds are given per system scale (+infinity omits a scale).
FitResult fit(std::span<const double> y, const IntervalSystem& system,
              std::span<const double> thresholds);

// Convenience overload looking thresholds up from calibrated critical values.
FitResult fit(std::span<const double> y, const IntervalSystem& system,
              const CriticalValues& critical_values);

// Envelope construction used by fit(); exposed for tests. `fitted` supplies
// fallback segment ranges when a window overlap leaves a segment without a
// certain index range.
std::vector<std::pair<double, double>> confidence_band(const IntervalBounds& bounds,
                                                       const Limits& limits,
                                                       const StepFn& fitted);

}  // namespace hsmuce

#endif  // HSMUCE_ESTIMATOR_HPP_
