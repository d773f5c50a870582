#include "hsmuce/report.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hsmuce {

namespace {

nlohmann::ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

nlohmann::ordered_json fit_report_json(const FitInputs& inputs, const FitResult& result,
                                       double runtime_seconds) {
  nlohmann::ordered_json j;
  j["inputs"] = {{"n", inputs.n},
                 {"alpha", inputs.alpha},
                 {"weights", inputs.weights},
                 {"system", to_string(inputs.system)},
                 {"monte_carlo_reps", inputs.monte_carlo_reps},
                 {"seed", inputs.seed},
                 {"cache", inputs.cache_id}};
  j["k_hat"] = result.k_hat;
  nlohmann::ordered_json cps = nlohmann::ordered_json::array();
  for (std::int64_t k = 0; k < result.k_hat; ++k) {
    nlohmann::ordered_json cp;
    cp["index"] = result.fit.boundaries[k];
    cp["location"] = result.fit.change_point_location(k + 1);
    cp["ci_lo"] = result.cis[k].first;
    cp["ci_hi"] = result.cis[k].second;
    cps.push_back(cp);
  }
  j["change_points"] = cps;
  j["segment_values"] = result.fit.values;
  nlohmann::ordered_json band = nlohmann::ordered_json::array();
  for (const auto& [lo, hi] : result.band) {
    band.push_back({finite_or_null(lo), finite_or_null(hi)});
  }
  j["band"] = band;
  j["worst_margin"] = finite_or_null(result.worst_margin);
  j["runtime_seconds"] = runtime_seconds;
  return j;
}

void write_band_csv(std::ostream& out, const FitResult& result) {
  const std::int64_t n = result.fit.n;
  out << "index,x,y_fit,band_lo,band_hi\n";
  char buf[160];
  for (std::int64_t i = 1; i <= n; ++i) {
    const auto [lo, hi] = result.band[i - 1];
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(i),
                  static_cast<double>(i) / static_cast<double>(n),
                  result.fit.value_at_index(i), lo, hi);
    out << buf;
  }
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig config;
  config.scenario.seed = 1;
  std::string line;
  int line_no = 0;
  bool min_scale_in_observations = false;
  double min_scale_obs = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n") config.scenario.n = std::stoll(value);
      else if (key == "changes") config.scenario.change_count = std::stoll(value);
      else if (key == "difficulty") config.scenario.difficulty = std::stod(value);
      else if (key == "min_scale") config.scenario.min_scale = std::stod(value);
      else if (key == "min_scale_obs") {
        min_scale_in_observations = true;
        min_scale_obs = std::stod(value);
      } else if (key == "error_model") {
        if (value == "gaussian") config.scenario.error_model = ErrorModel::kGaussian;
        else if (value == "t3") config.scenario.error_model = ErrorModel::kScaledT3;
        else throw std::runtime_error("unknown error model '" + value + "'");
      } else if (key == "variance_mode") {
        if (value == "paired") config.scenario.variance_mode = VarianceMode::kPairedWithMean;
        else if (value == "constant") config.scenario.variance_mode = VarianceMode::kConstant;
        else if (value == "list") config.scenario.variance_mode = VarianceMode::kFixedList;
        else if (value == "sinus") config.scenario.variance_mode = VarianceMode::kSinus;
        else if (value == "linear") config.scenario.variance_mode = VarianceMode::kPiecewiseLinear;
        else if (value == "blockwise") config.scenario.variance_mode = VarianceMode::kBlockwise;
        else throw std::runtime_error("unknown variance mode '" + value + "'");
      } else if (key == "constant_sd") config.scenario.constant_sd = std::stod(value);
      else if (key == "sd_list") config.scenario.sd_list = parse_double_list(value);
      else if (key == "trend_a" || key == "trend_b" || key == "trend_scaled") {
        if (!config.scenario.trend.has_value()) config.scenario.trend = TrendOptions{};
        if (key == "trend_a") config.scenario.trend->a = std::stod(value);
        else if (key == "trend_b") config.scenario.trend->b = std::stod(value);
        else config.scenario.trend->scaled_by_sd = value == "1" || value == "true";
      } else if (key == "seed") config.scenario.seed = std::stoull(value);
      else if (key == "repetitions") config.repetitions = std::stoll(value);
      else if (key == "alpha") config.alpha = std::stod(value);
      else if (key == "system") config.system = system_kind_from_string(value);
      else if (key == "weights") {
        if (value != "equal") config.weights = parse_double_list(value);
      } else if (key == "monte_carlo_reps") config.monte_carlo_reps = std::stoull(value);
      else if (key == "cv_seed") config.critical_value_seed = std::stoull(value);
      else if (key == "cache_dir") config.cache_dir = value;
      else throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": cannot parse value '" + value + "'");
    }
  }
  if (min_scale_in_observations) {
    if (config.scenario.n <= 0) {
      throw std::runtime_error("config: min_scale_obs requires n");
    }
    config.scenario.min_scale = min_scale_obs / static_cast<double>(config.scenario.n);
  }
  return config;
}

nlohmann::ordered_json metric_report_json(const ExperimentConfig& config,
                                          const std::string& method,
                                          const MetricReport& report) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["scenario"] = {{"n", config.scenario.n},
                   {"changes", config.scenario.change_count},
                   {"difficulty", config.scenario.difficulty},
                   {"min_scale", config.scenario.min_scale},
                   {"seed", config.scenario.seed}};
  j["alpha"] = config.alpha;
  j["repetitions"] = report.repetitions;
  j["k_error_distribution"] = {{"le_minus2", report.frac_under_many},
                               {"minus1", report.frac_under_one},
                               {"zero", report.frac_exact},
                               {"plus1", report.frac_over_one},
                               {"ge_plus2", report.frac_over_many}};
  j["mean_abs_k_error"] = report.mean_abs_k_error;
  j["fpsle"] = report.mean_fpsle;
  j["fnsle"] = report.mean_fnsle;
  j["mise"] = report.mean_mise;
  j["miae"] = report.mean_miae;
  return j;
}

void write_metric_report_csv(std::ostream& out, const ExperimentConfig& config,
                             const std::string& method, const MetricReport& report,
                             bool header) {
  if (header) {
    out << "method,n,changes,difficulty,min_scale,alpha,repetitions,"
           "frac_le_minus2,frac_minus1,frac_zero,frac_plus1,frac_ge_plus2,"
           "mean_abs_k_error,fpsle,fnsle,mise,miae\n";
  }
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s,%lld,%lld,%.17g,%.17g,%.17g,%lld,"
                "%.6f,%.6f,%.6f,%.6f,%.6f,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                method.c_str(), static_cast<long long>(config.scenario.n),
                static_cast<long long>(config.scenario.change_count),
                config.scenario.difficulty, config.scenario.min_scale, config.alpha,
                static_cast<long long>(report.repetitions), report.frac_under_many,
                report.frac_under_one, report.frac_exact, report.frac_over_one,
                report.frac_over_many, report.mean_abs_k_error, report.mean_fpsle,
                report.mean_fnsle, report.mean_mise, report.mean_miae);
  out << buf;
}

}  // namespace hsmuce
