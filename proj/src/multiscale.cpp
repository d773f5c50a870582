#include "hsmuce/multiscale.hpp"

#include <limits>
#include <stdexcept>

namespace hsmuce {

std::vector<double> scale_maxima(std::span<const double> z, const IntervalSystem& system) {
  if (static_cast<std::int64_t>(z.size()) != system.n()) {
    throw std::invalid_argument("scale_maxima: sequence length must match the system");
  }
  const PrefixSums sums(z);
  std::vector<double> maxima(system.scales().size(), 0.0);
  for (std::size_t s = 0; s < system.scales().size(); ++s) {
    const IntervalScale& scale = system.scales()[s];
    double best = -std::numeric_limits<double>::infinity();
    for (std::int64_t t = 0; t < scale.count; ++t) {
      const IndexInterval iv = scale.member(t);
      const double stat =
          local_statistic_from_moments(sums.moments(iv.i, iv.j), 0.0);
      if (stat > best) best = stat;
    }
    maxima[s] = best;
  }
  return maxima;
}

TestDecision test_candidate(std::span<const double> y, const StepFn& candidate,
                            std::span<const double> thresholds,
                            const IntervalSystem& system) {
  if (static_cast<std::int64_t>(y.size()) != system.n()) {
    throw std::invalid_argument("test_candidate: length mismatch");
  }
  return test_candidate(PrefixSums(y), candidate, thresholds, system);
}

TestDecision test_candidate(const PrefixSums& sums, const StepFn& candidate,
                            std::span<const double> thresholds,
                            const IntervalSystem& system) {
  if (sums.n() != system.n() || candidate.n != system.n()) {
    throw std::invalid_argument("test_candidate: length mismatch");
  }
  if (thresholds.size() != system.scales().size()) {
    throw std::invalid_argument("test_candidate: need one threshold per scale");
  }
  TestDecision decision;
  decision.worst_margin = -std::numeric_limits<double>::infinity();

  // Values clipped exactly onto an inverted-test bound reproduce the
  // threshold up to rounding; margins inside this tolerance count as passing
  // the closed constraint.
  auto tolerance = [](double threshold) { return 1e-9 * (1.0 + threshold); };

  // The candidate is constant on [i, j] iff no segment boundary lies in
  // (i, j], i.e. observations i..j share one segment. Walking segments and
  // visiting intervals contained in each covers exactly those intervals.
  const std::int64_t segments = candidate.change_point_count() + 1;
  for (std::int64_t k = 0; k < segments; ++k) {
    const std::int64_t lo = candidate.segment_start(k);
    const std::int64_t hi = candidate.segment_end(k);
    if (hi - lo < 1) continue;
    const double value = candidate.values[k];
    system.for_each_contained(lo, hi, [&](std::size_t scale_idx, IndexInterval iv) {
      const double threshold = thresholds[scale_idx];
      if (threshold == std::numeric_limits<double>::infinity()) return;
      const SegmentMoments m = sums.moments(iv.i, iv.j);
      const double stat = local_statistic_from_moments(m, value);
      const double margin = stat - threshold;
      decision.any_tested = true;
      if (margin > tolerance(threshold)) decision.accept = false;
      if (margin > decision.worst_margin) {
        decision.worst_margin = margin;
        decision.worst = LocalStat{iv, m.mean, m.var_hat, stat};
      }
    });
  }
  return decision;
}

}  // namespace hsmuce
