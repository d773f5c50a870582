#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hsmuce/critical_values.hpp"
#include "hsmuce/estimator.hpp"
#include "hsmuce/philox.hpp"
#include "hsmuce/report.hpp"

using namespace hsmuce;

namespace {

FitResult small_fit(double alpha, std::uint64_t mc_reps = 2000) {
  const std::int64_t n = 256;
  const IntervalSystem system = IntervalSystem::build(n, SystemKind::kDyadicPartition);
  const SimulationCache cache =
      simulate_statistics(n, SystemKind::kDyadicPartition, mc_reps, 17);
  const CriticalValues cv =
      balance(cache, alpha, equal_weights(cache.scale_count(), system.scales().size()));
  std::vector<double> y(n);
  PhiloxStream stream(33, 0);
  stream.fill_normals(y);
  for (std::int64_t i = 97; i <= 176; ++i) y[i - 1] += 6.0;
  return fit(y, system, cv);
}

}  // namespace

TEST_CASE("fit report serializes losslessly and deterministically") {
  const FitResult result = small_fit(0.1);
  FitInputs inputs;
  inputs.n = 256;
  inputs.alpha = 0.1;
  inputs.weights = equal_weights(8, 8);
  inputs.system = SystemKind::kDyadicPartition;
  inputs.monte_carlo_reps = 2000;
  inputs.seed = 17;
  inputs.cache_id = "cache";

  nlohmann::ordered_json a = fit_report_json(inputs, result, 0.123);
  nlohmann::ordered_json b = fit_report_json(inputs, small_fit(0.1), 9.876);
  CHECK(a["k_hat"] == result.k_hat);
  CHECK(a["change_points"].size() == static_cast<std::size_t>(result.k_hat));
  CHECK(a["band"].size() == 256);
  a.erase("runtime_seconds");
  b.erase("runtime_seconds");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("band csv layout") {
  const FitResult result = small_fit(0.1);
  std::ostringstream out;
  write_band_csv(out, result);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "index,x,y_fit,band_lo,band_hi");
  std::string first;
  std::getline(in, first);
  long long idx;
  double x, y_fit, lo, hi;
  REQUIRE(std::sscanf(first.c_str(), "%lld,%lg,%lg,%lg,%lg", &idx, &x, &y_fit, &lo, &hi) == 5);
  CHECK(idx == 1);
  CHECK(x == doctest::Approx(1.0 / 256.0));
  CHECK(lo <= y_fit);
  CHECK(y_fit <= hi);
  int rows = 1;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 256);
}

TEST_CASE("band width shrinks as alpha grows") {
  // Same data and cache at three levels; thresholds drop with alpha, so the
  // envelope tightens (the paper-facing width scale is sqrt(log(1/alpha))).
  const FitResult a01 = small_fit(0.1);
  const FitResult a03 = small_fit(0.3);
  const FitResult a05 = small_fit(0.5);
  REQUIRE(a01.k_hat == a03.k_hat);
  REQUIRE(a03.k_hat == a05.k_hat);
  auto mean_width = [](const FitResult& r) {
    double sum = 0.0;
    int count = 0;
    for (const auto& [lo, hi] : r.band) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        sum += hi - lo;
        ++count;
      }
    }
    REQUIRE(count > 0);
    return sum / count;
  };
  const double w01 = mean_width(a01);
  const double w03 = mean_width(a03);
  const double w05 = mean_width(a05);
  CHECK(w03 < w01);
  CHECK(w05 < w03);
}

TEST_CASE("experiment config parsing") {
  std::istringstream in(R"(# scenario
n = 1000
changes = 2
difficulty = 200
min_scale_obs = 30
error_model = t3
variance_mode = paired
seed = 9

# method
alpha = 0.3
system = dyadic
weights = equal
monte_carlo_reps = 750
cv_seed = 4
repetitions = 25
)");
  const ExperimentConfig config = parse_experiment_config(in);
  CHECK(config.scenario.n == 1000);
  CHECK(config.scenario.change_count == 2);
  CHECK(config.scenario.min_scale == doctest::Approx(0.03));
  CHECK(config.scenario.error_model == ErrorModel::kScaledT3);
  CHECK(config.scenario.seed == 9);
  CHECK(config.alpha == doctest::Approx(0.3));
  CHECK(config.weights.empty());
  CHECK(config.monte_carlo_reps == 750);
  CHECK(config.critical_value_seed == 4);
  CHECK(config.repetitions == 25);

  std::istringstream bad("nonsense = 1\n");
  CHECK_THROWS_AS(parse_experiment_config(bad), std::runtime_error);
  std::istringstream bad2("n ~ 5\n");
  CHECK_THROWS_AS(parse_experiment_config(bad2), std::runtime_error);
}

TEST_CASE("metric report emission") {
  ExperimentConfig config;
  config.scenario.n = 100;
  config.scenario.change_count = 1;
  config.scenario.min_scale = 0.2;
  config.alpha = 0.1;
  MetricReport report;
  report.repetitions = 10;
  report.frac_exact = 0.9;
  report.frac_over_one = 0.1;
  report.mean_mise = 0.5;

  const nlohmann::ordered_json j = metric_report_json(config, "hsmuce", report);
  CHECK(j["method"] == "hsmuce");
  CHECK(j["k_error_distribution"]["zero"] == doctest::Approx(0.9));

  std::ostringstream csv;
  write_metric_report_csv(csv, config, "hsmuce", report, true);
  const std::string text = csv.str();
  CHECK(text.find("method,n,changes") == 0);
  CHECK(text.find("hsmuce,100,1,") != std::string::npos);
}
