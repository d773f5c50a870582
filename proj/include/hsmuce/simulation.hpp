#ifndef HSMUCE_SIMULATION_HPP_
#define HSMUCE_SIMULATION_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hsmuce/intervals.hpp"
#include "hsmuce/step_fn.hpp"

namespace hsmuce {

enum class ErrorModel { kGaussian, kScaledT3 };

// How the standard-deviation function is produced.
enum class VarianceMode {
  kPairedWithMean,  // one random level 2^U per mean segment, U ~ Unif[-2, 2]
  kConstant,        // fixed level everywhere
  kFixedList,       // user-supplied level per mean segment
  kSinus,           // 1 + 0.5 sin(20 pi t)
  kPiecewiseLinear, // 0.5 + sawtooth with period 0.1
  kBlockwise,       // alternating 0.5 / 1 every 100 observations
};

// Optional additive periodic trend on the mean (robustness studies):
// b sin(a pi i), optionally scaled by the local standard deviation.
struct TrendOptions {
  double a = 0.0;
  double b = 0.0;
  bool scaled_by_sd = false;
};

struct Scenario {
  std::int64_t n = 0;
  std::int64_t change_count = 0;
  double difficulty = 200.0;  // the constant balancing jump sizes vs. scales
  double min_scale = 0.0;     // minimal segment length, boundaries included
  ErrorModel error_model = ErrorModel::kGaussian;
  VarianceMode variance_mode = VarianceMode::kPairedWithMean;
  double constant_sd = 1.0;            // kConstant
  std::vector<double> sd_list;         // kFixedList, one per segment
  std::optional<TrendOptions> trend;
  std::uint64_t seed = 0;
};

struct ScenarioDraw {
  StepFn mean;
  StepFn variance;  // sigma^2 as a step function on the sampling grid
  std::vector<double> observations;
};

// One random instance per the generator: change-point locations uniform
// subject to the minimal gap (rejection sampling, capped), segment standard
// deviations 2^U with U ~ Unif[-2, 2] (paired mode), jump sizes balanced so
// every change is comparably hard to find, signs fair coin flips, mean
// starting at zero. The repetition index selects an independent substream of
// the scenario seed.
ScenarioDraw draw_scenario(const Scenario& scenario, std::uint64_t repetition = 0);

struct MetricReport {
  std::int64_t repetitions = 0;
  // distribution of k_hat - K in the buckets <= -2, -1, 0, +1, >= +2
  double frac_under_many = 0.0;
  double frac_under_one = 0.0;
  double frac_exact = 0.0;
  double frac_over_one = 0.0;
  double frac_over_many = 0.0;
  double mean_abs_k_error = 0.0;
  double mean_fpsle = 0.0;
  double mean_fnsle = 0.0;
  double mean_mise = 0.0;
  double mean_miae = 0.0;
};

// Any segmentation method usable by the harness; ships with H-SMUCE only,
// competitor methods can be plugged in through the same signature.
struct Segmenter {
  std::string name;
  std::function<StepFn(const std::vector<double>& observations)> segment;
};

struct ExperimentConfig {
  Scenario scenario;
  std::int64_t repetitions = 0;
  double alpha = 0.1;
  SystemKind system = SystemKind::kDyadicPartition;
  std::vector<double> weights;  // empty = equal weights over the data scales
  std::uint64_t monte_carlo_reps = 10000;
  std::uint64_t critical_value_seed = 27;
  std::string cache_dir;  // empty = no on-disk recycling
};

// Builds the H-SMUCE segmenter for the experiment configuration, simulating
// (or loading) the critical-value cache once up front.
Segmenter make_hsmuce_segmenter(const ExperimentConfig& config);

// Runs repetitions [first_rep, first_rep + repetitions) of the scenario
// through the segmenter and averages the error metrics. Aggregation is a
// plain mean, so disjoint repetition ranges pool exactly.
MetricReport run_experiment_range(const Scenario& scenario, const Segmenter& segmenter,
                                  std::int64_t repetitions, std::int64_t first_rep);

MetricReport run_experiment(const ExperimentConfig& config);

}  // namespace hsmuce

#endif  // HSMUCE_SIMULATION_HPP_
