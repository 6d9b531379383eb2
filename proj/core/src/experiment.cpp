#include "confound/experiment.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "confound/csv.hpp"
#include "confound/genmodel.hpp"
#include "confound/stats.hpp"

namespace confound {

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::Estimate: return "estimate";
    case Mode::Test: return "test";
    case Mode::Simulate: return "simulate";
    case Mode::RejectionStudy: return "rejection_study";
    case Mode::OverfitStudy: return "overfit_study";
    case Mode::ShuffleTarget: return "shuffle_target";
  }
  return "unknown";
}

Mode mode_from_string(std::string_view name) {
  if (name == "estimate") return Mode::Estimate;
  if (name == "test") return Mode::Test;
  if (name == "simulate") return Mode::Simulate;
  if (name == "rejection_study" || name == "rejections") return Mode::RejectionStudy;
  if (name == "overfit_study" || name == "overfit") return Mode::OverfitStudy;
  if (name == "shuffle_target" || name == "shuffle-target") return Mode::ShuffleTarget;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(name) + "'");
}

double ExperimentConfig::effective_noise_sd() const noexcept {
  if (noise_sd) return *noise_sd;
  return mode == Mode::OverfitStudy ? 1.0 : 0.0;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (runs == 0) fail("runs must be positive");
  if (dim == 0) fail("dimension must be positive");
  if (samples == 0) fail("sample count must be positive");
  if (!(effective_noise_sd() >= 0.0) || !std::isfinite(effective_noise_sd()))
    fail("noise sd must be finite and nonnegative");
  const bool tests = mode == Mode::Test || mode == Mode::RejectionStudy ||
                     mode == Mode::OverfitStudy || (mode == Mode::ShuffleTarget && with_test);
  if (tests && null_count < kMinNullCount)
    fail("null sample count must be at least " + std::to_string(kMinNullCount));
  switch (mode) {
    case Mode::Estimate:
    case Mode::Test:
      if (input_path.empty()) fail("an input file is required");
      if (target.empty()) fail("a target column is required");
      break;
    case Mode::ShuffleTarget:
      if (input_path.empty()) fail("an input file is required");
      break;
    case Mode::Simulate:
    case Mode::RejectionStudy:
      if (effective_latent() < dim)
        throw Error(ErrorCode::BadDimensions, "latent dimension must be >= dimension");
      break;
    case Mode::OverfitStudy:
      if (sample_sizes.empty()) fail("overfit study needs at least one sample size");
      break;
  }
}

bool weak_signal(const CovarianceModel& cov, const Eigen::VectorXd& regression) {
  if (!cov.sigma_yy() || cov.sample_count() == 0 || !(*cov.sigma_yy() > 0.0)) return false;
  const double r2 = cov.sigma_xy().dot(regression) / *cov.sigma_yy();
  const double d = static_cast<double>(cov.dim());
  return static_cast<double>(cov.sample_count()) * r2 <= d + 3.0 * std::sqrt(2.0 * d);
}

std::size_t unit_bin(double value, std::size_t bins) {
  if (!(value > 0.0)) return 0;
  const auto k = static_cast<std::size_t>(value * static_cast<double>(bins));
  return std::min(k, bins - 1);
}

namespace {

void fill_estimate(RunRecord& rec, const BetaEstimate& est) {
  rec.beta_hat = est.beta_hat;
  rec.theta_hat = est.theta_hat.value();
  if (est.boundary) rec.flags.emplace_back(kFlagBoundary);
  if (weak_signal(est.covariance, est.regression)) rec.flags.emplace_back(kFlagWeakSignal);
}

void fill_test(RunRecord& rec, const TestResult& test) {
  rec.t_statistic = test.t_observed;
  rec.p_value = test.p_value;
}

template <typename Fn>
void guarded(RunRecord& rec, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    rec.error = e.what();
  }
}

std::uint64_t run_seed(const ExperimentConfig& config, std::size_t index) {
  return derive_seed(config.seed, index);
}

SyntheticDataset protocol_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  const GroundTruth truth = sample_ground_truth(config.dim, config.effective_latent(), rng);
  return generate_samples(truth, config.samples, config.effective_noise_sd(),
                          derive_seed(seed, 1));
}

// Collects per-run records and aborts when too many of them failed.
template <typename RunFn>
std::vector<RunRecord> collect(std::size_t total, RunFn&& run) {
  std::vector<RunRecord> records;
  records.reserve(total);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < total; ++i) {
    records.push_back(run(i));
    if (records.back().failed()) ++failures;
  }
  if (static_cast<double>(failures) > kMaxFailureFraction * static_cast<double>(total)) {
    std::string first;
    for (const auto& r : records)
      if (r.failed()) {
        first = *r.error;
        break;
      }
    throw Error(ErrorCode::NumericOverflow, std::to_string(failures) + " of " +
                                                std::to_string(total) +
                                                " runs failed; first: " + first);
  }
  return records;
}

void count_outcomes(Summary& summary, const std::vector<RunRecord>& records) {
  for (const auto& r : records) (r.failed() ? summary.failed : summary.completed)++;
}

std::optional<double> beta_correlation(const std::vector<RunRecord>& records) {
  std::vector<double> truth, estimate;
  for (const auto& r : records) {
    if (r.true_beta && r.beta_hat) {
      truth.push_back(*r.true_beta);
      estimate.push_back(*r.beta_hat);
    }
  }
  if (truth.size() < 2) return std::nullopt;
  const double corr = stats::pearson(truth, estimate);
  if (std::isnan(corr)) return std::nullopt;
  return corr;
}

template <typename Fn>
Report timed(const ExperimentConfig& config, Fn&& body) {
  const auto start = std::chrono::steady_clock::now();
  Report report = body();
  if (config.record_timing) {
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return report;
}

DataMatrix load_input(const ExperimentConfig& config) {
  return ingest_csv(config.input_path, parse_column_ref(config.target), config.normalize,
                    config.delimiter);
}

}  // namespace

RunRecord simulation_run(const ExperimentConfig& config, std::size_t index) {
  RunRecord rec;
  rec.index = index;
  rec.seed = run_seed(config, index);
  guarded(rec, [&] {
    const SyntheticDataset ds = protocol_dataset(config, rec.seed);
    rec.true_beta = ds.true_beta;
    fill_estimate(rec, estimate_confounding(ds.data));
  });
  return rec;
}

RunRecord rejection_run(const ExperimentConfig& config, std::size_t index) {
  RunRecord rec;
  rec.index = index;
  rec.seed = run_seed(config, index);
  guarded(rec, [&] {
    const SyntheticDataset ds = protocol_dataset(config, rec.seed);
    rec.true_beta = ds.true_beta;
    const CovarianceModel cov = empirical_covariance(ds.data);
    fill_estimate(rec, estimate_confounding(cov));
    fill_test(rec, test_nonconfounding(cov, config.null_count, config.method,
                                       derive_seed(rec.seed, 2)));
  });
  return rec;
}

RunRecord overfit_run(const ExperimentConfig& config, std::size_t index) {
  RunRecord rec;
  rec.index = index;
  rec.seed = run_seed(config, index);
  const std::size_t n = config.sample_sizes.at(index / config.runs);
  rec.sample_size = n;
  guarded(rec, [&] {
    const SyntheticDataset ds =
        causal_dataset(config.dim, n, config.effective_noise_sd(), derive_seed(rec.seed, 1));
    rec.true_beta = ds.true_beta;
    fill_test(rec, test_nonconfounding(ds.data, config.null_count, config.method,
                                       derive_seed(rec.seed, 2)));
  });
  return rec;
}

Report run_estimate(const ExperimentConfig& config, const DataMatrix& data) {
  return timed(config, [&] {
    Report report{config, {}, {}, {}};
    RunRecord rec;
    rec.seed = config.seed;
    rec.sample_size = data.samples();
    rec.target = config.target;
    fill_estimate(rec, estimate_confounding(data));
    report.records.push_back(std::move(rec));
    count_outcomes(report.summary, report.records);
    return report;
  });
}

Report run_test(const ExperimentConfig& config, const DataMatrix& data) {
  return timed(config, [&] {
    Report report{config, {}, {}, {}};
    RunRecord rec;
    rec.seed = config.seed;
    rec.sample_size = data.samples();
    rec.target = config.target;
    const CovarianceModel cov = empirical_covariance(data);
    fill_estimate(rec, estimate_confounding(cov));
    fill_test(rec, test_nonconfounding(cov, config.null_count, config.method, config.seed));
    report.summary.alphas = {config.alpha};
    report.summary.rejection_rate = *rec.p_value <= config.alpha ? 1.0 : 0.0;
    report.records.push_back(std::move(rec));
    count_outcomes(report.summary, report.records);
    return report;
  });
}

Report run_simulation_study(const ExperimentConfig& config) {
  config.validate();
  return timed(config, [&] {
    Report report{config, {}, {}, {}};
    report.records =
        collect(config.runs, [&](std::size_t i) { return simulation_run(config, i); });
    count_outcomes(report.summary, report.records);
    report.summary.pearson_beta = beta_correlation(report.records);
    return report;
  });
}

Report run_rejection_study(const ExperimentConfig& config) {
  config.validate();
  return timed(config, [&] {
    Report report{config, {}, {}, {}};
    report.records = collect(config.runs, [&](std::size_t i) { return rejection_run(config, i); });
    Summary& summary = report.summary;
    count_outcomes(summary, report.records);
    summary.pearson_beta = beta_correlation(report.records);
    summary.alphas = {0.1, 0.05};
    if (config.alpha != 0.1 && config.alpha != 0.05) summary.alphas.push_back(config.alpha);

    constexpr std::size_t kBins = 10;
    std::vector<std::size_t> counts(kBins, 0);
    std::vector<std::vector<std::size_t>> rejected(kBins,
                                                   std::vector<std::size_t>(summary.alphas.size()));
    std::size_t tested = 0, rejected_at_alpha = 0;
    for (const auto& r : report.records) {
      if (!r.true_beta || !r.p_value) continue;
      const std::size_t bin = unit_bin(*r.true_beta, kBins);
      ++counts[bin];
      for (std::size_t a = 0; a < summary.alphas.size(); ++a)
        if (*r.p_value <= summary.alphas[a]) ++rejected[bin][a];
      ++tested;
      if (*r.p_value <= config.alpha) ++rejected_at_alpha;
    }
    for (std::size_t b = 0; b < kBins; ++b) {
      RejectionBin bin;
      bin.lower = static_cast<double>(b) / kBins;
      bin.upper = static_cast<double>(b + 1) / kBins;
      bin.count = counts[b];
      for (std::size_t a = 0; a < summary.alphas.size(); ++a) {
        if (counts[b] == 0)
          bin.rejection_fraction.emplace_back(std::nullopt);
        else
          bin.rejection_fraction.emplace_back(static_cast<double>(rejected[b][a]) /
                                              static_cast<double>(counts[b]));
      }
      summary.beta_bins.push_back(std::move(bin));
    }
    if (tested > 0)
      summary.rejection_rate =
          static_cast<double>(rejected_at_alpha) / static_cast<double>(tested);
    return report;
  });
}

Report run_overfit_study(const ExperimentConfig& config) {
  config.validate();
  return timed(config, [&] {
    Report report{config, {}, {}, {}};
    const std::size_t total = config.runs * config.sample_sizes.size();
    report.records = collect(total, [&](std::size_t i) { return overfit_run(config, i); });
    Summary& summary = report.summary;
    count_outcomes(summary, report.records);
    summary.alphas = {config.alpha};
    for (std::size_t s = 0; s < config.sample_sizes.size(); ++s) {
      PValueHistogram hist;
      hist.sample_size = config.sample_sizes[s];
      hist.counts.assign(10, 0);
      std::vector<double> ps;
      for (std::size_t r = 0; r < config.runs; ++r) {
        const auto& rec = report.records[s * config.runs + r];
        if (!rec.p_value) continue;
        ps.push_back(*rec.p_value);
        ++hist.counts[unit_bin(*rec.p_value, 10)];
      }
      hist.runs = ps.size();
      if (!ps.empty()) {
        std::size_t below = 0;
        for (double p : ps)
          if (p <= config.alpha) ++below;
        hist.fraction_below_alpha = static_cast<double>(below) / static_cast<double>(ps.size());
        const auto ks = stats::ks_uniform(ps);
        hist.ks_statistic = ks.statistic;
        hist.ks_p_value = ks.p_value;
      }
      summary.p_value_histograms.push_back(std::move(hist));
    }
    return report;
  });
}

Report shuffle_target_analysis(const ExperimentConfig& config, const Eigen::MatrixXd& table,
                               const std::vector<std::string>& names) {
  if (table.cols() < 3)
    throw Error(ErrorCode::BadDimensions, "shuffle-target analysis needs at least 3 columns");
  if (names.size() != static_cast<std::size_t>(table.cols()))
    throw Error(ErrorCode::BadDimensions, "column names do not match the table");
  return timed(config, [&] {
    Report report{config, {}, {}, {}};
    CsvTable csv{names, true, table};
    for (std::size_t j = 0; j < names.size(); ++j) {
      RunRecord rec;
      rec.index = j;
      rec.seed = derive_seed(config.seed, j);
      rec.target = names[j];
      rec.sample_size = static_cast<std::size_t>(table.rows());
      guarded(rec, [&] {
        const DataMatrix data = split_target(csv, j, config.normalize);
        const CovarianceModel cov = empirical_covariance(data);
        fill_estimate(rec, estimate_confounding(cov));
        if (config.with_test)
          fill_test(rec, test_nonconfounding(cov, config.null_count, config.method, rec.seed));
      });
      report.summary.beta_hat_by_column.push_back(rec.beta_hat);
      report.records.push_back(std::move(rec));
    }
    count_outcomes(report.summary, report.records);
    return report;
  });
}

Report run_experiment(const ExperimentConfig& config) {
  config.validate();
  switch (config.mode) {
    case Mode::Estimate: return run_estimate(config, load_input(config));
    case Mode::Test: return run_test(config, load_input(config));
    case Mode::Simulate: return run_simulation_study(config);
    case Mode::RejectionStudy: return run_rejection_study(config);
    case Mode::OverfitStudy: return run_overfit_study(config);
    case Mode::ShuffleTarget: {
      const CsvTable table = read_csv(config.input_path, config.delimiter);
      return shuffle_target_analysis(config, table.values, table.names);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unhandled mode");
}

}  // namespace confound
