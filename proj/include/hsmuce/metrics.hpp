#ifndef HSMUCE_METRICS_HPP_
#define HSMUCE_METRICS_HPP_

#include <cstdint>
#include <span>
#include <utility>

#include "hsmuce/step_fn.hpp"

namespace hsmuce {

// Location and reconstruction errors of a fitted segmentation against the
// truth. Change-point vectors include the boundary points 0 and 1.

// False positive sensitive location error: for every estimated segment,
// distance of its endpoints to the true change-points bracketing the segment
// midpoint, scaled by n / (2 * max(k_hat, 1)).
double fpsle(std::span<const double> true_cps, std::span<const double> est_cps,
             std::int64_t n);

// False negative sensitive counterpart: roles of truth and estimate swapped.
double fnsle(std::span<const double> true_cps, std::span<const double> est_cps,
             std::int64_t n);

// Exact integrals over [0,1] of (truth - fit)^2 and |truth - fit| on the
// merged breakpoint grid.
std::pair<double, double> mise_miae(const StepFn& truth, const StepFn& fitted);

// Change-point locations including the boundaries 0 and 1.
std::vector<double> change_points_with_boundaries(const StepFn& f);

}  // namespace hsmuce

#endif  // HSMUCE_METRICS_HPP_
