#pragma once

// Experiment runner behind the command-line tool: single-dataset estimation
// and testing, the simulation studies, and shuffle-target analysis.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confound/cdtest.hpp"
#include "confound/estimator.hpp"
#include "confound/spectral.hpp"

namespace confound {

enum class Mode { Estimate, Test, Simulate, RejectionStudy, OverfitStudy, ShuffleTarget };

std::string_view to_string(Mode mode) noexcept;
Mode mode_from_string(std::string_view name);

struct ExperimentConfig {
  Mode mode = Mode::Estimate;
  std::size_t dim = 10;
  // 0 means "same as dim".
  std::size_t latent = 0;
  std::size_t samples = 10000;
  std::size_t runs = 1000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::size_t null_count = kDefaultNullCount;
  bool normalize = false;
  NullMethod method = NullMethod::SphereMonteCarlo;
  // Unset means the mode default: 0 for simulate/rejections, 1 for overfit.
  std::optional<double> noise_sd;
  std::string input_path;
  std::string output_path;
  std::string target;
  char delimiter = ',';
  std::vector<std::size_t> sample_sizes = {20, 100, 1000, 10000};
  // Shuffle-target: also run the test per column.
  bool with_test = false;
  bool record_timing = false;

  std::size_t effective_latent() const noexcept { return latent == 0 ? dim : latent; }
  double effective_noise_sd() const noexcept;
  // Throws InvalidArgument / BadDimensions on inconsistent settings.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline constexpr std::string_view kFlagBoundary = "boundary";
inline constexpr std::string_view kFlagWeakSignal = "weak_signal";

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> sample_size;
  // Target column name for real-data modes.
  std::optional<std::string> target;
  std::optional<double> true_beta;
  std::optional<double> beta_hat;
  std::optional<double> theta_hat;
  std::optional<double> t_statistic;
  std::optional<double> p_value;
  std::vector<std::string> flags;
  std::optional<std::string> error;

  bool failed() const noexcept { return error.has_value(); }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct RejectionBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  // One entry per level in Summary::alphas; empty bins hold nullopt.
  std::vector<std::optional<double>> rejection_fraction;

  friend bool operator==(const RejectionBin&, const RejectionBin&) = default;
};

struct PValueHistogram {
  std::size_t sample_size = 0;
  std::size_t runs = 0;
  // Ten equal-width bins on [0, 1].
  std::vector<std::size_t> counts;
  double fraction_below_alpha = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 0.0;

  friend bool operator==(const PValueHistogram&, const PValueHistogram&) = default;
};

struct Summary {
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::optional<double> pearson_beta;
  std::optional<double> rejection_rate;
  std::vector<double> alphas;
  std::vector<RejectionBin> beta_bins;
  std::vector<PValueHistogram> p_value_histograms;
  std::vector<std::optional<double>> beta_hat_by_column;

  friend bool operator==(const Summary&, const Summary&) = default;
};

struct Report {
  ExperimentConfig config;
  std::vector<RunRecord> records;
  Summary summary;
  std::optional<double> elapsed_seconds;

  friend bool operator==(const Report&, const Report&) = default;
};

// Fraction of runs allowed to fail before a study aborts.
inline constexpr double kMaxFailureFraction = 0.10;

Report run_experiment(const ExperimentConfig& config);

Report run_estimate(const ExperimentConfig& config, const DataMatrix& data);
Report run_test(const ExperimentConfig& config, const DataMatrix& data);
Report run_simulation_study(const ExperimentConfig& config);
Report run_rejection_study(const ExperimentConfig& config);
Report run_overfit_study(const ExperimentConfig& config);
// Uses every column of `table` in turn as the target.
Report shuffle_target_analysis(const ExperimentConfig& config, const Eigen::MatrixXd& table,
                               const std::vector<std::string>& names);

// Regenerates record `index` of a simulate / rejection / overfit study.
RunRecord simulation_run(const ExperimentConfig& config, std::size_t index);
RunRecord rejection_run(const ExperimentConfig& config, std::size_t index);
RunRecord overfit_run(const ExperimentConfig& config, std::size_t index);

// True when n R^2 of the least-squares fit stays below d + 3 sqrt(2d), i.e.
// within three standard deviations of its chi-square(d) law under X
// independent of Y.
bool weak_signal(const CovarianceModel& cov, const Eigen::VectorXd& regression);

// Index of the equal-width bin on [0, 1] containing value.
std::size_t unit_bin(double value, std::size_t bins);

}  // namespace confound
