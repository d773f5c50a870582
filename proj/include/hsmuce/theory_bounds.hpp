#ifndef HSMUCE_THEORY_BOUNDS_HPP_
#define HSMUCE_THEORY_BOUNDS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hsmuce {

// Closed-form finite-sample guarantees of the method, used for tuning alpha
// and as oracles in the statistical tests. Bounds come with explicit
// validity conditions; outside them the structs carry conditions_met = false
// rather than extrapolating.

// Scenario description: minimal standardized jump, minimal segment scale
// (as a fraction of [0,1], including the boundary segments), change count,
// level, and the weight of the detection scale floor(log2(n*lambda/4)).
struct ScenarioBounds {
  std::int64_t n = 0;
  double min_standardized_jump = 0.0;  // |jump| / max adjacent sd
  double min_segment_scale = 0.0;      // in (0, 1]
  std::int64_t change_count = 0;
  double alpha = 0.0;
  double weight_at_detection_scale = 0.0;
};

// floor(log2(n * lambda / 4)); the dyadic scale on which a segment of
// relative length lambda is detected.
int detection_scale(std::int64_t n, double lambda);

// P(k_hat > K + 2k) <= alpha^{k+1}.
double overestimation_probability_bound(std::int64_t k, double alpha);

// E[(k_hat - K)_+] <= 2 alpha / (1 - alpha).
double overestimation_expectation_bound(double alpha);

struct UnderestimationBound {
  bool conditions_met = false;
  double detection_probability = 0.0;   // per-change lower bound
  double miss_probability_bound = 1.0;  // P(k_hat < K) <= this
  double expected_misses_bound = 0.0;   // E[(K - k_hat)_+] <= this
};

// Uniform bound: every change is detected with probability at least
// [1 - 3 exp(-(1/48) (sqrt(n lambda jump^2 / 32)
//                     - sqrt(16 log(8 / (lambda alpha beta))))_+^2)]_+^2.
// Valid when n*lambda >= 32 and log(8/(lambda alpha beta))/(n lambda)
// <= 1/512; the formula value is reported either way.
UnderestimationBound underestimation_bound(const ScenarioBounds& scenario);

struct PerChangeUnderestimation {
  bool conditions_met = false;
  std::vector<double> detection_probabilities;  // one per change
  double miss_probability_bound = 1.0;          // 1 - prod eta_j
  double expected_misses_bound = 0.0;           // sum (1 - eta_j)
};

// Sharp per-change version. segment_scales has K+1 entries (lambda_0..K),
// jumps and the condition checks run over the K changes, sds has K+1
// entries, and weights is the full per-scale weight vector (index k-1 for
// scale k).
PerChangeUnderestimation underestimation_per_change(std::int64_t n, double alpha,
                                                    std::span<const double> segment_scales,
                                                    std::span<const double> jumps,
                                                    std::span<const double> sds,
                                                    std::span<const double> weights);

// Grid minimizer of gamma * alpha + (1 - gamma) * (miss bound at alpha) over
// the supplied alpha grid; ties break toward smaller alpha.
double tune_alpha(double gamma, const ScenarioBounds& scenario,
                  std::span<const double> alpha_grid);

// q_k <= 8 log(n / (2^k alpha beta_k)) for k >= 2 whenever
// 2^{-k} log(n / (2^k alpha beta_k)) <= 1/2; nullopt when the condition
// fails.
std::optional<double> critval_upper_bound(std::int64_t n, int k, double alpha,
                                          double beta_k);

// P(local statistic at standardized shift jump <= q) <=
// 2 exp(-(1/48) (sqrt(n) jump - sqrt(2q))_+^2), valid for n >= 4 and
// q/n <= 1/8; nullopt when the preconditions fail.
std::optional<double> deviation_bound(std::int64_t n, double standardized_jump, double q);

}  // namespace hsmuce

#endif  // HSMUCE_THEORY_BOUNDS_HPP_
