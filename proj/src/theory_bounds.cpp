#include "hsmuce/theory_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hsmuce {

namespace {

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in (0, 1)");
  }
}

// Weight of dyadic scale k out of a per-scale weight vector; scales outside
// the vector carry weight zero.
double weight_at(std::span<const double> weights, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > weights.size()) return 0.0;
  return weights[k - 1];
}

// The square-bracket factor shared by all underestimation bounds.
double detection_factor(double n_lambda_over_var, double lambda_log, double alpha,
                        double beta) {
  const double signal = std::sqrt(n_lambda_over_var / 32.0);
  const double penalty = std::sqrt(16.0 * std::log(8.0 / (lambda_log * alpha * beta)));
  const double exponent = positive_part(signal - penalty);
  return positive_part(1.0 - 3.0 * std::exp(-exponent * exponent / 48.0));
}

}  // namespace

int detection_scale(std::int64_t n, double lambda) {
  const double x = static_cast<double>(n) * lambda / 4.0;
  if (!(x > 0.0)) throw std::domain_error("detection_scale: n * lambda must be positive");
  return static_cast<int>(std::floor(std::log2(x)));
}

double overestimation_probability_bound(std::int64_t k, double alpha) {
  check_alpha(alpha);
  if (k < 0) throw std::domain_error("overestimation bound: k must be >= 0");
  return std::pow(alpha, static_cast<double>(k) + 1.0);
}

double overestimation_expectation_bound(double alpha) {
  check_alpha(alpha);
  return 2.0 * alpha / (1.0 - alpha);
}

UnderestimationBound underestimation_bound(const ScenarioBounds& scenario) {
  check_alpha(scenario.alpha);
  if (!(scenario.min_standardized_jump > 0.0) || !(scenario.min_segment_scale > 0.0) ||
      scenario.change_count < 0) {
    throw std::domain_error("underestimation bound: invalid scenario");
  }
  const double n_lambda = static_cast<double>(scenario.n) * scenario.min_segment_scale;
  const double beta = scenario.weight_at_detection_scale;
  const double log_term =
      std::log(8.0 / (scenario.min_segment_scale * scenario.alpha * beta));

  UnderestimationBound out;
  out.conditions_met = n_lambda >= 32.0 && log_term / n_lambda <= 1.0 / 512.0;
  const double factor = detection_factor(
      n_lambda * scenario.min_standardized_jump * scenario.min_standardized_jump,
      scenario.min_segment_scale, scenario.alpha, beta);
  out.detection_probability = factor * factor;
  out.miss_probability_bound =
      1.0 - std::pow(out.detection_probability, static_cast<double>(scenario.change_count));
  out.expected_misses_bound =
      static_cast<double>(scenario.change_count) * (1.0 - out.detection_probability);
  return out;
}

PerChangeUnderestimation underestimation_per_change(std::int64_t n, double alpha,
                                                    std::span<const double> segment_scales,
                                                    std::span<const double> jumps,
                                                    std::span<const double> sds,
                                                    std::span<const double> weights) {
  check_alpha(alpha);
  const std::size_t changes = jumps.size();
  if (segment_scales.size() != changes + 1 || sds.size() != changes + 1) {
    throw std::invalid_argument(
        "underestimation_per_change: need one scale and sd per segment");
  }

  PerChangeUnderestimation out;
  out.conditions_met = true;
  out.detection_probabilities.resize(changes);
  double product = 1.0;
  double sum = 0.0;
  for (std::size_t j = 1; j <= changes; ++j) {
    const double lambda_prev = segment_scales[j - 1];
    const double lambda_cur = segment_scales[j];
    const double jump2 = jumps[j - 1] * jumps[j - 1];
    const int scale_prev = detection_scale(n, lambda_prev);
    const int scale_cur = detection_scale(n, lambda_cur);

    const double n_lambda = static_cast<double>(n) * lambda_cur;
    const double cond_log =
        std::log(8.0 / (lambda_cur * alpha * weight_at(weights, scale_cur)));
    if (!(n_lambda >= 32.0 && cond_log / n_lambda <= 1.0 / 512.0)) {
      out.conditions_met = false;
    }

    const double left = detection_factor(
        static_cast<double>(n) * lambda_prev * jump2 / (sds[j - 1] * sds[j - 1]),
        lambda_cur, alpha, weight_at(weights, scale_prev));
    const double right = detection_factor(
        static_cast<double>(n) * lambda_cur * jump2 / (sds[j] * sds[j]),
        lambda_cur, alpha, weight_at(weights, scale_cur));
    const double eta = left * right;
    out.detection_probabilities[j - 1] = eta;
    product *= eta;
    sum += 1.0 - eta;
  }
  out.miss_probability_bound = 1.0 - product;
  out.expected_misses_bound = sum;
  return out;
}

double tune_alpha(double gamma, const ScenarioBounds& scenario,
                  std::span<const double> alpha_grid) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::domain_error("tune_alpha: gamma must lie in (0, 1]");
  }
  if (alpha_grid.empty()) throw std::invalid_argument("tune_alpha: empty grid");

  double best_alpha = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> grid(alpha_grid.begin(), alpha_grid.end());
  std::sort(grid.begin(), grid.end());
  for (double alpha : grid) {
    check_alpha(alpha);
    const double factor = detection_factor(
        static_cast<double>(scenario.n) * scenario.min_segment_scale *
            scenario.min_standardized_jump * scenario.min_standardized_jump,
        scenario.min_segment_scale, alpha, scenario.weight_at_detection_scale);
    const double miss =
        1.0 - std::pow(factor, 2.0 * static_cast<double>(scenario.change_count));
    const double value = gamma * alpha + (1.0 - gamma) * miss;
    if (value < best_value) {
      best_value = value;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

std::optional<double> critval_upper_bound(std::int64_t n, int k, double alpha,
                                          double beta_k) {
  check_alpha(alpha);
  if (k < 2 || beta_k <= 0.0) return std::nullopt;
  const double log_term =
      std::log(static_cast<double>(n) / (std::exp2(k) * alpha * beta_k));
  if (std::exp2(-k) * log_term > 0.5) return std::nullopt;
  return 8.0 * log_term;
}

std::optional<double> deviation_bound(std::int64_t n, double standardized_jump, double q) {
  if (n < 4 || !(q > 0.0) || q / static_cast<double>(n) > 0.125) return std::nullopt;
  const double gap =
      positive_part(std::sqrt(static_cast<double>(n)) * std::fabs(standardized_jump) -
                    std::sqrt(2.0 * q));
  return 2.0 * std::exp(-gap * gap / 48.0);
}

}  // namespace hsmuce
