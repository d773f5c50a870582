#ifndef HSMUCE_MULTISCALE_HPP_
#define HSMUCE_MULTISCALE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "hsmuce/intervals.hpp"
#include "hsmuce/local_stats.hpp"
#include "hsmuce/step_fn.hpp"

namespace hsmuce {

// One evaluated local test.
struct LocalStat {
  IndexInterval interval;
  double mean = 0.0;
  double variance_estimate = 0.0;
  double statistic = 0.0;
};

// Per-scale maxima of the local statistic with candidate value 0, in the
// order of system.scales(). This is the vector whose joint distribution the
// Monte-Carlo calibration samples.
std::vector<double> scale_maxima(std::span<const double> z, const IntervalSystem& system);

struct TestDecision {
  bool accept = true;
  // max over tested intervals of (statistic - threshold); -inf when no
  // interval is tested. Positive margin means rejection.
  double worst_margin;
  LocalStat worst;  // interval attaining the worst margin (if any tested)
  bool any_tested = false;
};

// The multiscale acceptance test for a candidate step function: on every
// system interval where the candidate is constant, the local statistic must
// stay below that scale's threshold. Thresholds are passed per scale in
// system order; +infinity disables a scale.
TestDecision test_candidate(std::span<const double> y, const StepFn& candidate,
                            std::span<const double> thresholds,
                            const IntervalSystem& system);

// Variant reusing precomputed cumulative sums of the observations.
TestDecision test_candidate(const PrefixSums& sums, const StepFn& candidate,
                            std::span<const double> thresholds,
                            const IntervalSystem& system);

}  // namespace hsmuce

#endif  // HSMUCE_MULTISCALE_HPP_
