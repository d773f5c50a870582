#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsmuce/benchmark.hpp"
#include "hsmuce/critical_values.hpp"
#include "hsmuce/estimator.hpp"
#include "hsmuce/philox.hpp"
#include "hsmuce/report.hpp"
#include "hsmuce/simulation.hpp"
#include "hsmuce/theory_bounds.hpp"

namespace {

// Exit codes: 2 input parse error, 3 invalid configuration, 4 cache version
// mismatch, 5 non-finite numeric input.
struct DataParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == '\t' || ch == ';' || ch == ' ') {
      if (!cur.empty()) fields.push_back(cur);
      if (ch == ',' || ch == '\t' || ch == ';') {
        if (cur.empty()) fields.emplace_back();
      }
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) fields.push_back(cur);
  return fields;
}

std::vector<double> read_observations(const std::string& path, int column) {
  std::ifstream in(path);
  if (!in) throw DataParseError("cannot open input file " + path);
  std::vector<double> y;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.empty()) continue;
    if (column >= static_cast<int>(fields.size())) {
      throw DataParseError("line " + std::to_string(line_no) + ": no column " +
                           std::to_string(column));
    }
    const std::string& cell = fields[column];
    try {
      std::size_t used = 0;
      const double value = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      if (!std::isfinite(value)) {
        throw NumericInputError("line " + std::to_string(line_no) +
                                ": non-finite observation '" + cell + "'");
      }
      y.push_back(value);
    } catch (const std::invalid_argument&) {
      if (line_no == 1 && y.empty()) continue;  // header row
      throw DataParseError("line " + std::to_string(line_no) +
                           ": cannot parse observation '" + cell + "'");
    } catch (const std::out_of_range&) {
      throw NumericInputError("line " + std::to_string(line_no) +
                              ": observation out of range '" + cell + "'");
    }
  }
  if (y.size() < 2) throw DataParseError(path + ": need at least two observations");
  return y;
}

std::vector<double> parse_weight_list(const std::string& text) {
  std::vector<double> weights;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) weights.push_back(std::stod(item));
  }
  return weights;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

int run_fit(const std::string& input, int column, double alpha,
            const std::string& weights_text, const std::string& system_name,
            std::uint64_t monte_carlo_reps, std::uint64_t seed,
            const std::string& cache_dir, const std::string& out_path,
            const std::string& band_csv_path, const std::string& format) {
  const std::vector<double> y = read_observations(input, column);
  const auto n = static_cast<std::int64_t>(y.size());
  const hsmuce::SystemKind kind = hsmuce::system_kind_from_string(system_name);

  const auto start = std::chrono::steady_clock::now();
  const hsmuce::SimulationCache cache =
      hsmuce::obtain_cache(cache_dir, n, kind, monte_carlo_reps, seed);
  const hsmuce::IntervalSystem system = hsmuce::IntervalSystem::build(n, kind);

  std::vector<double> weights;
  if (weights_text.empty()) {
    weights = hsmuce::equal_weights(cache.scale_count(), system.scales().size());
  } else {
    weights = parse_weight_list(weights_text);
    if (weights.size() > cache.scale_count()) {
      throw std::invalid_argument("more weights than scales");
    }
    weights.resize(cache.scale_count(), 0.0);
  }
  const hsmuce::CriticalValues cv = hsmuce::balance(cache, alpha, weights);
  const hsmuce::FitResult result = hsmuce::fit(y, system, cv);
  const double runtime = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start).count();

  hsmuce::FitInputs inputs;
  inputs.n = n;
  inputs.alpha = alpha;
  inputs.weights = weights;
  inputs.system = kind;
  inputs.monte_carlo_reps = monte_carlo_reps;
  inputs.seed = seed;
  inputs.cache_id =
      hsmuce::cache_file_name(kind, cache.n_sim, monte_carlo_reps, seed).string();

  if (format == "csv") {
    std::ostringstream csv;
    hsmuce::write_band_csv(csv, result);
    write_text(out_path, csv.str());
  } else {
    write_text(out_path, hsmuce::fit_report_json(inputs, result, runtime).dump(2) + "\n");
  }
  if (!band_csv_path.empty()) {
    std::ofstream csv(band_csv_path);
    if (!csv) throw std::runtime_error("cannot open " + band_csv_path);
    hsmuce::write_band_csv(csv, result);
  }
  return 0;
}

int run_bounds(std::int64_t n, double jump, double lambda, std::int64_t changes,
               double alpha, const std::string& weights_text, double gamma,
               const std::string& grid_text, const std::string& out_path) {
  const int d = hsmuce::dyadic_scale_count(n);
  std::vector<double> weights = weights_text.empty()
                                    ? hsmuce::equal_weights(d, d)
                                    : parse_weight_list(weights_text);
  hsmuce::validate_weights(weights);
  const int kn = hsmuce::detection_scale(n, lambda);
  const double beta_kn =
      (kn >= 1 && kn <= static_cast<int>(weights.size())) ? weights[kn - 1] : 0.0;

  hsmuce::ScenarioBounds scenario;
  scenario.n = n;
  scenario.min_standardized_jump = jump;
  scenario.min_segment_scale = lambda;
  scenario.change_count = changes;
  scenario.alpha = alpha;
  scenario.weight_at_detection_scale = beta_kn;

  nlohmann::ordered_json j;
  j["inputs"] = {{"n", n}, {"jump", jump}, {"lambda", lambda},
                 {"changes", changes}, {"alpha", alpha}, {"weights", weights},
                 {"detection_scale", kn}};
  j["overestimation"] = {
      {"prob_k_hat_gt_K", hsmuce::overestimation_probability_bound(0, alpha)},
      {"prob_k_hat_gt_K_plus_2", hsmuce::overestimation_probability_bound(1, alpha)},
      {"expected_excess", hsmuce::overestimation_expectation_bound(alpha)}};
  const hsmuce::UnderestimationBound under = hsmuce::underestimation_bound(scenario);
  j["underestimation"] = {{"conditions_met", under.conditions_met},
                          {"detection_probability", under.detection_probability},
                          {"miss_probability_bound", under.miss_probability_bound},
                          {"expected_misses_bound", under.expected_misses_bound}};
  nlohmann::ordered_json critvals = nlohmann::ordered_json::array();
  for (int k = 1; k <= d; ++k) {
    const auto bound = hsmuce::critval_upper_bound(n, k, alpha, weights[k - 1]);
    nlohmann::ordered_json entry;
    entry["scale"] = k;
    if (bound.has_value()) {
      entry["upper_bound"] = *bound;
    } else {
      entry["upper_bound"] = nullptr;
      entry["note"] = "condition not met";
    }
    critvals.push_back(entry);
  }
  j["critical_value_upper_bounds"] = critvals;
  if (!grid_text.empty()) {
    const std::vector<double> grid = parse_weight_list(grid_text);
    j["tuned_alpha"] = hsmuce::tune_alpha(gamma, scenario, grid);
  }
  write_text(out_path, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale change-point estimation under heterogeneous noise"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a step function to observations");
  std::string input, weights_text, system_name = "dyadic", cache_dir, out_path;
  std::string band_csv_path, format = "json";
  int column = 0;
  double alpha = 0.1;
  std::uint64_t monte_carlo_reps = 10000, seed = 27;
  bool equal_weights_flag = false;
  fit_cmd->add_option("input", input, "observation file, one value per line")->required();
  fit_cmd->add_option("--column", column, "zero-based CSV column");
  fit_cmd->add_option("--alpha", alpha, "significance level in (0,1)");
  fit_cmd->add_option("--weights", weights_text, "comma-separated scale weights");
  fit_cmd->add_flag("--equal-weights", equal_weights_flag, "equal weights (default)");
  fit_cmd->add_option("--system", system_name, "dyadic|dyadic-length|all");
  fit_cmd->add_option("--M", monte_carlo_reps, "Monte-Carlo repetitions");
  fit_cmd->add_option("--seed", seed, "Monte-Carlo seed");
  fit_cmd->add_option("--cache-dir", cache_dir, "critical-value cache directory");
  fit_cmd->add_option("--out", out_path, "report path (default stdout)");
  fit_cmd->add_option("--band-csv", band_csv_path, "also write the band as CSV");
  fit_cmd->add_option("--format", format, "json|csv report format");

  // simulate-critvals
  auto* sim_cmd = app.add_subcommand("simulate-critvals",
                                     "Simulate and store a critical-value cache");
  std::int64_t sim_n = 0;
  std::uint64_t sim_reps = 10000, sim_seed = 27;
  std::string sim_system = "dyadic", sim_out;
  sim_cmd->add_option("--n", sim_n, "sample size (rounded up to a power of two)")->required();
  sim_cmd->add_option("--M", sim_reps, "Monte-Carlo repetitions");
  sim_cmd->add_option("--seed", sim_seed, "seed");
  sim_cmd->add_option("--system", sim_system, "dyadic|dyadic-length|all");
  sim_cmd->add_option("--out", sim_out, "output cache file")->required();

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "Print the finite-sample guarantees");
  std::int64_t bounds_n = 0, bounds_changes = 1;
  double bounds_jump = 1.0, bounds_lambda = 0.5, bounds_alpha = 0.1, bounds_gamma = 0.5;
  std::string bounds_weights, bounds_grid, bounds_out;
  bounds_cmd->add_option("--n", bounds_n, "sample size")->required();
  bounds_cmd->add_option("--jump", bounds_jump, "minimal standardized jump")->required();
  bounds_cmd->add_option("--lambda", bounds_lambda, "minimal segment scale")->required();
  bounds_cmd->add_option("--changes", bounds_changes, "number of change-points");
  bounds_cmd->add_option("--alpha", bounds_alpha, "significance level");
  bounds_cmd->add_option("--weights", bounds_weights, "comma-separated scale weights");
  bounds_cmd->add_option("--gamma", bounds_gamma, "over/under weighting for tuning");
  bounds_cmd->add_option("--alpha-grid", bounds_grid, "grid for alpha tuning");
  bounds_cmd->add_option("--out", bounds_out, "output path (default stdout)");

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark", "Time the estimator");
  std::string bench_sizes = "10000,100000";
  int bench_runs = 5;
  std::uint64_t bench_reps = 2000, bench_seed = 27;
  double bench_alpha = 0.1;
  bench_cmd->add_option("--sizes", bench_sizes, "comma-separated sample sizes");
  bench_cmd->add_option("--runs", bench_runs, "runs per size (median reported)");
  bench_cmd->add_option("--M", bench_reps, "Monte-Carlo repetitions for calibration");
  bench_cmd->add_option("--seed", bench_seed, "seed");
  bench_cmd->add_option("--alpha", bench_alpha, "significance level");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Run a simulation experiment");
  std::string exp_config, exp_out, exp_format = "both";
  exp_cmd->add_option("--config", exp_config, "key = value experiment file")->required();
  exp_cmd->add_option("--out", exp_out, "output prefix (default stdout JSON)");
  exp_cmd->add_option("--format", exp_format, "json|csv|both");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (fit_cmd->parsed()) {
      if (!weights_text.empty() && equal_weights_flag) {
        throw std::invalid_argument("--weights and --equal-weights are mutually exclusive");
      }
      if (format != "json" && format != "csv") {
        throw std::invalid_argument("--format must be json or csv");
      }
      return run_fit(input, column, alpha, weights_text, system_name, monte_carlo_reps,
                     seed, cache_dir, out_path, band_csv_path, format);
    }
    if (sim_cmd->parsed()) {
      const hsmuce::SimulationCache cache = hsmuce::simulate_statistics(
          sim_n, hsmuce::system_kind_from_string(sim_system), sim_reps, sim_seed);
      hsmuce::store_cache(cache, sim_out);
      std::cout << "stored " << sim_out << " (n_sim=" << cache.n_sim
                << ", scales=" << cache.scale_count() << ")\n";
      return 0;
    }
    if (bounds_cmd->parsed()) {
      return run_bounds(bounds_n, bounds_jump, bounds_lambda, bounds_changes,
                        bounds_alpha, bounds_weights, bounds_gamma, bounds_grid,
                        bounds_out);
    }
    if (bench_cmd->parsed()) {
      double previous = 0.0;
      for (const std::string& item : split_fields(bench_sizes)) {
        const std::int64_t n = std::stoll(item);
        const hsmuce::BenchmarkResult r =
            hsmuce::benchmark_fit(n, bench_runs, bench_reps, bench_seed, bench_alpha);
        std::cout << "n=" << r.n << " median_fit_seconds=" << r.median_fit_seconds
                  << " k_hat=" << r.k_hat;
        if (previous > 0.0) std::cout << " ratio=" << r.median_fit_seconds / previous;
        std::cout << "\n";
        previous = r.median_fit_seconds;
      }
      return 0;
    }
    if (exp_cmd->parsed()) {
      std::ifstream in(exp_config);
      if (!in) throw DataParseError("cannot open config " + exp_config);
      hsmuce::ExperimentConfig config;
      try {
        config = hsmuce::parse_experiment_config(in);
      } catch (const std::runtime_error& e) {
        throw DataParseError(e.what());
      }
      const hsmuce::MetricReport report = hsmuce::run_experiment(config);
      const std::string method = "hsmuce";
      if (exp_out.empty()) {
        std::cout << hsmuce::metric_report_json(config, method, report).dump(2) << "\n";
      } else {
        if (exp_format == "json" || exp_format == "both") {
          std::ofstream out(exp_out + ".json");
          out << hsmuce::metric_report_json(config, method, report).dump(2) << "\n";
        }
        if (exp_format == "csv" || exp_format == "both") {
          std::ofstream out(exp_out + ".csv");
          hsmuce::write_metric_report_csv(out, config, method, report, true);
        }
      }
      return 0;
    }
  } catch (const hsmuce::CacheVersionError& e) {
    std::cerr << "error: cache-version: " << e.what() << "\n";
    return 4;
  } catch (const hsmuce::CacheFormatError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
    return 2;
  } catch (const NumericInputError& e) {
    std::cerr << "error: numeric-input: " << e.what() << "\n";
    return 5;
  } catch (const DataParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
