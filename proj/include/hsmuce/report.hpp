#ifndef HSMUCE_REPORT_HPP_
#define HSMUCE_REPORT_HPP_

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "hsmuce/estimator.hpp"
#include "hsmuce/simulation.hpp"

namespace hsmuce {

// Echo of everything that determines a fit, so reports are reproducible.
struct FitInputs {
  std::int64_t n = 0;
  double alpha = 0.0;
  std::vector<double> weights;
  SystemKind system = SystemKind::kDyadicPartition;
  std::uint64_t monte_carlo_reps = 0;
  std::uint64_t seed = 0;
  std::string cache_id;
};

// Lossless JSON report; identical inputs and cache give identical output up
// to the runtime field.
nlohmann::ordered_json fit_report_json(const FitInputs& inputs, const FitResult& result,
                                       double runtime_seconds);

// Plot-ready band table: index, x = i/n, y_fit, band_lo, band_hi.
void write_band_csv(std::ostream& out, const FitResult& result);

// Key = value text file mirroring the scenario and method fields; '#' starts
// a comment. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(std::istream& in);

nlohmann::ordered_json metric_report_json(const ExperimentConfig& config,
                                          const std::string& method,
                                          const MetricReport& report);
void write_metric_report_csv(std::ostream& out, const ExperimentConfig& config,
                             const std::string& method, const MetricReport& report,
                             bool header);

}  // namespace hsmuce

#endif  // HSMUCE_REPORT_HPP_
