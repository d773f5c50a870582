#ifndef HSMUCE_STEP_FN_HPP_
#define HSMUCE_STEP_FN_HPP_

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hsmuce {

// Right-continuous piecewise-constant function on [0, 1], aligned to the
// sampling grid i/n. `boundaries` holds the first observation index of each
// new segment (1-based, strictly increasing, in [2, n]), so segment k covers
// observations [boundaries[k-1], boundaries[k] - 1] with the conventions
// boundaries[-1] = 1 and boundaries[K] = n + 1. The k-th change-point
// location is boundaries[k-1] / n. Used for mean functions, variance
// functions and fits alike.
struct StepFn {
  std::int64_t n = 0;
  std::vector<std::int64_t> boundaries;  // size K
  std::vector<double> values;            // size K + 1

  std::int64_t change_point_count() const {
    return static_cast<std::int64_t>(boundaries.size());
  }

  // First index of segment k, k in [0, K].
  std::int64_t segment_start(std::int64_t k) const {
    return k == 0 ? 1 : boundaries[k - 1];
  }

  // Last index of segment k.
  std::int64_t segment_end(std::int64_t k) const {
    return k == change_point_count() ? n : boundaries[k] - 1;
  }

  // Location of the k-th change-point (1-based k).
  double change_point_location(std::int64_t k) const {
    return static_cast<double>(boundaries[k - 1]) / static_cast<double>(n);
  }

  // Segment index containing observation i (1-based).
  std::int64_t segment_of(std::int64_t i) const {
    std::int64_t k = 0;
    while (k < change_point_count() && boundaries[k] <= i) ++k;
    return k;
  }

  double value_at_index(std::int64_t i) const { return values[segment_of(i)]; }

  // Value at t in [0, 1]; right-continuous with mu(1) by extension.
  double value_at(double t) const {
    std::int64_t k = 0;
    while (k < change_point_count() &&
           static_cast<double>(boundaries[k]) <= t * static_cast<double>(n)) {
      ++k;
    }
    return values[k];
  }
};

// Structural checks shared by fits and generated truths. The adjacent-values
// requirement identifies the change-points of a mean function; variance step
// functions may skip it via require_distinct_values = false.
inline void validate_step_fn(const StepFn& f, bool require_distinct_values = true) {
  if (f.n < 1) throw std::invalid_argument("StepFn: n must be positive");
  if (f.values.size() != f.boundaries.size() + 1) {
    throw std::invalid_argument("StepFn: values must have one more entry than boundaries");
  }
  std::int64_t prev = 1;
  for (std::int64_t b : f.boundaries) {
    if (b <= prev || b > f.n) {
      throw std::invalid_argument("StepFn: boundaries must be strictly increasing in (1, n]");
    }
    prev = b;
  }
  if (require_distinct_values) {
    for (std::size_t k = 1; k < f.values.size(); ++k) {
      if (f.values[k] == f.values[k - 1]) {
        throw std::invalid_argument("StepFn: adjacent segment values must differ");
      }
    }
  }
}

}  // namespace hsmuce

#endif  // HSMUCE_STEP_FN_HPP_
