#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "kquad/dataset.hpp"
#include "kquad/kernels.hpp"
#include "kquad/quadrature.hpp"
#include "kquad/sampling.hpp"
#include "kquad/spectral.hpp"

namespace kquad {

enum class MethodKind { monte_carlo, uniform, uniform_wr, arls, f_greedy, p_greedy, fp_greedy };

struct MethodSpec {
  MethodKind kind = MethodKind::uniform;
  /// Column value in the output CSVs; the method head unless `name=` is given.
  std::string name;
  /// Sampling options (arls only; m and seed are filled per trial).
  SamplerConfig sampler;

  /// Greedy methods do not consume randomness.
  [[nodiscard]] bool deterministic() const noexcept;
};

/// `monte-carlo`, `uniform`, `uniform-wr`, `arls[:lambda=..,pilot=..,delta=..]`,
/// `f-greedy`, `p-greedy`, `fp-greedy`; any of them may carry `name=<label>`.
[[nodiscard]] MethodSpec parse_method(std::string_view text);

struct MethodRun {
  QuadratureRule rule;
  double sample_seconds = 0.0;
  double weight_seconds = 0.0;
};

/// Builds one rule of size m. monte-carlo draws m nodes uniformly with
/// replacement and weights them 1/m; the other sampling methods use optimal
/// weights; greedy methods ignore the seed.
[[nodiscard]] MethodRun run_method(const MethodSpec& method, const PointMatrix& points, const KernelSpec& kernel,
                                   const TargetMeasure& target, std::size_t m, std::uint64_t seed);

/// `uniform_cube:d=..,n=..`, `gaussian_mixture:d=..,k=..,sep=..,n=..` or
/// `csv:path=..[,standardize=true|false][,delimiter=comma|semicolon|tab|space]`.
/// Synthetic data accepts `standardize=` too (default false; csv defaults to
/// true). Relative csv paths are resolved against `base_dir`.
[[nodiscard]] Dataset load_dataset(std::string_view spec, std::uint64_t seed,
                                   const std::filesystem::path& base_dir = {});

enum class TargetKind { empirical, uniform_cube };

inline constexpr std::size_t kDefaultMaxPoints = std::size_t{1} << 14;

struct ExperimentConfig {
  std::string dataset;
  std::string kernel;
  std::vector<MethodSpec> methods;
  std::vector<std::size_t> m_grid;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  TargetKind target = TargetKind::empirical;
  std::size_t median_subset = kDefaultMedianSubset;
  std::size_t max_points = kDefaultMaxPoints;
  /// 0 = one per hardware thread. KQUAD_THREADS caps it either way.
  std::size_t workers = 0;
  /// When false all time columns are written as 0.
  bool timings = true;
  std::filesystem::path base_dir;
  std::filesystem::path output;
  std::filesystem::path summary;

  /// Throws InputError on an empty method list or m grid, a grid that is not
  /// strictly increasing, or zero trials.
  void validate() const;
};

/// Flat `key = value` text, `#` starts a comment. Keys: dataset, kernel,
/// methods (separated by whitespace or `;`), m_grid (commas or whitespace),
/// trials, seed, target, median_subset, max_n, workers, timings, output,
/// summary. Relative paths are resolved against `base_dir`.
[[nodiscard]] ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentRow {
  std::string method;
  std::size_t m = 0;
  std::size_t trial = 0;
  double error = 0.0;
  double sample_time_s = 0.0;
  double weight_time_s = 0.0;
  double total_time_s = 0.0;
};

struct ExperimentResult {
  std::string dataset_name;
  std::size_t n = 0;
  std::string kernel;
  std::vector<ExperimentRow> rows;
};

/// Worker count after applying the KQUAD_THREADS cap.
[[nodiscard]] std::size_t resolve_workers(std::size_t requested);

/// Stream for one (method, m, trial) cell, independent of scheduling.
[[nodiscard]] std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view method, std::size_t m,
                                       std::size_t trial);

/// Stream used for the median-heuristic subset.
[[nodiscard]] std::uint64_t median_seed(std::uint64_t master_seed);

/// Runs the sweep on an already loaded dataset.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& dataset);
/// Loads the configured dataset, then runs the sweep.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config);

struct SummaryRow {
  std::string method;
  std::size_t m = 0;
  std::size_t trials = 0;
  double error_median = 0.0;
  double error_std = 0.0;
  double time_median = 0.0;
};

/// Median (midpoint of the two central values for even counts) and sample
/// standard deviation; a single trial has std 0.
[[nodiscard]] double median(std::vector<double> values);
[[nodiscard]] double sample_std(const std::vector<double>& values);

[[nodiscard]] std::vector<SummaryRow> summarize(const ExperimentResult& result);

void write_raw_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);
void write_csv_file(const std::filesystem::path& path, const std::string& content);
[[nodiscard]] std::vector<SummaryRow> read_summary_csv(std::istream& in);
[[nodiscard]] std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

struct MethodRateFit {
  std::string method;
  /// exp(mean(log error - log shape(m))): the constant placing the model
  /// curve on the measurements.
  double constant = 0.0;
  /// Empty slope fit (points < 3) leaves `has_slope` false.
  bool has_slope = false;
  SlopeFit slope;
};

struct RateReport {
  std::string model;
  std::vector<MethodRateFit> fits;
  /// One entry per summary row with m >= 2, aligned with `predicted`.
  std::vector<SummaryRow> rows;
  std::vector<double> predicted;
};

[[nodiscard]] RateReport rate_report(const std::vector<SummaryRow>& summary, const RateModel& model);
/// Columns: method,m,error_median,predicted_error,model.
void write_rate_csv(std::ostream& out, const RateReport& report);

}  // namespace kquad
