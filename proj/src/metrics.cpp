#include "hsmuce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hsmuce {

namespace {

void check_segmentation(std::span<const double> cps) {
  if (cps.size() < 2 || cps.front() != 0.0 || cps.back() != 1.0) {
    throw std::invalid_argument("segmentation must include boundaries 0 and 1");
  }
  for (std::size_t k = 1; k < cps.size(); ++k) {
    if (!(cps[k] > cps[k - 1])) {
      throw std::invalid_argument("change-points must be strictly increasing");
    }
  }
}

// Sum over segments of `outer` of the distances between the segment
// endpoints and the `reference` change-points bracketing the segment
// midpoint (midpoint in the left-open right-closed bracket).
double bracket_error_sum(std::span<const double> outer, std::span<const double> reference) {
  double sum = 0.0;
  for (std::size_t k = 1; k < outer.size(); ++k) {
    const double mid = 0.5 * (outer[k - 1] + outer[k]);
    auto it = std::lower_bound(reference.begin(), reference.end(), mid);
    if (it == reference.begin()) ++it;  // mid <= 0 cannot happen; guard anyway
    if (it == reference.end()) --it;
    const double right = *it;
    const double left = *(it - 1);
    sum += std::fabs(left - outer[k - 1]) + std::fabs(right - outer[k]);
  }
  return sum;
}

}  // namespace

double fpsle(std::span<const double> true_cps, std::span<const double> est_cps,
             std::int64_t n) {
  check_segmentation(true_cps);
  check_segmentation(est_cps);
  const auto k_hat = static_cast<double>(est_cps.size() - 2);
  const double scale = static_cast<double>(n) / (2.0 * std::max(k_hat, 1.0));
  return scale * bracket_error_sum(est_cps, true_cps);
}

double fnsle(std::span<const double> true_cps, std::span<const double> est_cps,
             std::int64_t n) {
  check_segmentation(true_cps);
  check_segmentation(est_cps);
  const auto k_true = static_cast<double>(true_cps.size() - 2);
  const double scale = static_cast<double>(n) / (2.0 * std::max(k_true, 1.0));
  return scale * bracket_error_sum(true_cps, est_cps);
}

std::pair<double, double> mise_miae(const StepFn& truth, const StepFn& fitted) {
  if (truth.n != fitted.n) {
    throw std::invalid_argument("mise_miae: both functions must live on the same grid");
  }
  const std::vector<double> a = change_points_with_boundaries(truth);
  const std::vector<double> b = change_points_with_boundaries(fitted);
  std::vector<double> grid;
  grid.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double ise = 0.0, iae = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double width = grid[k] - grid[k - 1];
    const double mid = 0.5 * (grid[k - 1] + grid[k]);
    const double diff = truth.value_at(mid) - fitted.value_at(mid);
    ise += width * diff * diff;
    iae += width * std::fabs(diff);
  }
  return {ise, iae};
}

std::vector<double> change_points_with_boundaries(const StepFn& f) {
  std::vector<double> cps;
  cps.reserve(f.boundaries.size() + 2);
  cps.push_back(0.0);
  for (std::int64_t k = 1; k <= f.change_point_count(); ++k) {
    const double tau = f.change_point_location(k);
    if (tau < 1.0) cps.push_back(tau);  // a change on the right edge has no width
  }
  cps.push_back(1.0);
  return cps;
}

}  // namespace hsmuce
