// Acceptance suite. Each criterion prints exactly one PASS / FAIL / SKIP line.
//
//   confound_acceptance                 run every criterion
//   confound_acceptance --criterion N   run one (exit 77 when skipped)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "confound/cdtest.hpp"
#include "confound/csv.hpp"
#include "confound/estimator.hpp"
#include "confound/experiment.hpp"
#include "confound/genmodel.hpp"
#include "confound/rng.hpp"
#include "confound/spectral.hpp"
#include "confound/stats.hpp"

using namespace confound;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Verdict verdict(bool ok, std::string detail) {
  return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)};
}

Eigen::MatrixXd random_orthogonal(Eigen::Index d, Rng& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(rng.normal_matrix(d, d));
  return qr.householderQ();
}

Eigen::VectorXd uniform_sphere(Eigen::Index d, Rng& rng) {
  Eigen::VectorXd v = rng.normal_vector(d);
  return v / v.norm();
}

double g_stat(const Eigen::VectorXd& aprime, const CovarianceModel& cov) {
  const Eigen::VectorXd w = cov.to_eigenbasis(aprime.normalized());
  return (w.array().square() / cov.eigenvalues().array()).sum();
}

// ---------------------------------------------------------------------------

constexpr double kIdentityTolerance = 1e-12;

Verdict likelihood_identity() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index d = 2 + i % 50;
    Eigen::VectorXd lambda(d);
    for (Eigen::Index j = 0; j < d; ++j) lambda[j] = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const auto cov = CovarianceModel::from_spectrum(lambda, random_orthogonal(d, rng),
                                                    rng.normal_vector(d));
    const auto dir = UnitDirection::from_vector(rng.normal_vector(d));
    worst = std::max(worst, std::abs(log_direction_density(ThetaScale(0.0), dir, cov)));
  }
  return verdict(worst < kIdentityTolerance, fmt("max |log p_0| = %.3g over 1000 pairs", worst));
}

constexpr int kSpherePoints = 1000000;
constexpr double kMeanLow = 0.99, kMeanHigh = 1.01;
constexpr int kAngularBins = 24;
constexpr double kBinSigma = 3.0;

// Density of Phi(v) on the unit circle for A = diag(1, 2), as a function of angle.
double circle_density(double phi) {
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  return DirectionDensity(a)(Eigen::Vector2d(std::cos(phi), std::sin(phi)));
}

Verdict density_normalization() {
  Rng rng(202);
  double lo = INFINITY, hi = -INFINITY;
  for (int m = 0; m < 20; ++m) {
    const Eigen::Index d = m < 10 ? 2 : 3;
    Eigen::VectorXd sv(d);
    for (Eigen::Index j = 0; j < d; ++j) sv[j] = rng.uniform(0.5, 1.5);
    const Eigen::MatrixXd a =
        random_orthogonal(d, rng) * sv.asDiagonal() * random_orthogonal(d, rng).transpose();
    const DirectionDensity p(a);
    double sum = 0.0;
    for (int i = 0; i < kSpherePoints; ++i) sum += p(uniform_sphere(d, rng));
    const double mean = sum / kSpherePoints;
    lo = std::min(lo, mean);
    hi = std::max(hi, mean);
  }

  // Push uniform points through A = diag(1, 2) and bin by angle.
  std::vector<double> counts(kAngularBins, 0.0);
  const double width = 2.0 * std::numbers::pi / kAngularBins;
  for (int i = 0; i < kSpherePoints; ++i) {
    const Eigen::VectorXd v = uniform_sphere(2, rng);
    double phi = std::atan2(2.0 * v[1], v[0]);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    counts[std::min(kAngularBins - 1, static_cast<int>(phi / width))] += 1.0;
  }
  double worst_z = 0.0;
  for (int b = 0; b < kAngularBins; ++b) {
    // Simpson's rule on the bin; density is relative to the uniform measure.
    constexpr int kSteps = 200;
    const double h = width / kSteps;
    double integral = 0.0;
    for (int s = 0; s <= kSteps; ++s) {
      const double w = (s == 0 || s == kSteps) ? 1.0 : (s % 2 ? 4.0 : 2.0);
      integral += w * circle_density(b * width + s * h);
    }
    const double prob = integral * h / 3.0 / (2.0 * std::numbers::pi);
    const double expected = prob * kSpherePoints;
    const double se = std::sqrt(kSpherePoints * prob * (1.0 - prob));
    worst_z = std::max(worst_z, std::abs(counts[b] - expected) / se);
  }
  const bool ok = lo >= kMeanLow && hi <= kMeanHigh && worst_z <= kBinSigma;
  return verdict(ok, fmt("MC means in [%.4f, %.4f]; worst angular bin %.2f SE", lo, hi, worst_z));
}

constexpr double kKsLevel = 0.01;

Verdict source_model_equivalence() {
  Rng rng(303);
  const GroundTruth t(rng.normal_matrix(10, 10), Eigen::VectorXd::Zero(10),
                      Eigen::VectorXd::Zero(10), 1.0, 1.0);
  const CovarianceModel cov = t.population_covariance();
  std::vector<double> g1, g2;
  for (int i = 0; i < 20000; ++i) {
    g1.push_back(g_stat(sample_aprime_def1(t, rng), cov));
    g2.push_back(g_stat(sample_aprime_def2(cov, 1.0, 1.0, rng), cov));
  }
  const auto ks = stats::ks_two_sample(g1, g2);
  return verdict(ks.p_value > kKsLevel, fmt("KS D = %.4f, p = %.3f", ks.statistic, ks.p_value));
}

constexpr double kMinCorrelation = 0.6;
constexpr double kLowBetaMedianMax = 0.25;
constexpr double kHighBetaMedianMin = 0.75;

Verdict beta_recovery() {
  ExperimentConfig c;
  c.mode = Mode::Simulate;
  c.dim = 10;
  c.samples = 10000;
  c.runs = 100;
  c.seed = 1;
  const Report rep = run_simulation_study(c);
  std::vector<double> low, high;
  for (const auto& r : rep.records) {
    if (!r.beta_hat || !r.true_beta) continue;
    if (*r.true_beta < 0.1) low.push_back(*r.beta_hat);
    if (*r.true_beta > 0.9) high.push_back(*r.beta_hat);
  }
  const double corr = rep.summary.pearson_beta.value_or(NAN);
  const double med_low = low.empty() ? NAN : stats::median(low);
  const double med_high = high.empty() ? NAN : stats::median(high);
  const bool ok = corr > kMinCorrelation && med_low < kLowBetaMedianMax &&
                  med_high > kHighBetaMedianMin;
  return verdict(ok, fmt("corr = %.3f; median beta_hat %.3f (beta<0.1, %zu runs), %.3f "
                         "(beta>0.9, %zu runs); %zu failed",
                         corr, med_low, low.size(), med_high, high.size(), rep.summary.failed));
}

constexpr double kHighBinRejectMin = 0.5;
constexpr double kLowBinRejectLow = 0.02, kLowBinRejectHigh = 0.10;

Verdict rejection_bins() {
  ExperimentConfig c;
  c.mode = Mode::RejectionStudy;
  c.dim = 10;
  c.samples = 10000;
  c.runs = 1000;
  c.seed = 2;
  const Report rep = run_rejection_study(c);
  const auto& alphas = rep.summary.alphas;
  const std::size_t at05 =
      static_cast<std::size_t>(std::find(alphas.begin(), alphas.end(), 0.05) - alphas.begin());
  bool ok = true;
  std::string bins;
  for (const auto& bin : rep.summary.beta_bins) {
    const auto f = bin.rejection_fraction.at(at05);
    bins += f ? fmt(" %.2f", *f) : std::string(" -");
    if (bin.lower >= 0.6 - 1e-12 && bin.count > 0 && !(*f > kHighBinRejectMin)) ok = false;
  }
  const auto& first = rep.summary.beta_bins.front();
  const auto low = first.rejection_fraction.at(at05);
  if (!low || *low < kLowBinRejectLow || *low > kLowBinRejectHigh) ok = false;
  return verdict(ok, fmt("rejection at 0.05 per beta bin:%s (bin 0: n=%zu)", bins.c_str(),
                         first.count));
}

constexpr double kSmallSampleRejectMin = 0.5;

Verdict unconfounded_p_values() {
  ExperimentConfig c;
  c.mode = Mode::OverfitStudy;
  c.dim = 10;
  c.runs = 500;
  c.seed = 3;
  c.sample_sizes = {20, 100, 1000, 10000};
  const Report rep = run_overfit_study(c);
  std::string detail;
  double small = NAN, ks_large = NAN;
  for (const auto& h : rep.summary.p_value_histograms) {
    detail += fmt(" n=%zu: p<0.05 %.3f, KS p %.3g;", h.sample_size, h.fraction_below_alpha,
                  h.ks_p_value);
    if (h.sample_size == 20) small = h.fraction_below_alpha;
    if (h.sample_size == 10000) ks_large = h.ks_p_value;
  }
  return verdict(small > kSmallSampleRejectMin && ks_large > kKsLevel, detail);
}

constexpr double kLevelTolerance = 0.03;

Verdict calibration() {
  constexpr std::size_t kDatasets = 1000;
  std::size_t r05 = 0, r10 = 0;
  for (std::size_t i = 0; i < kDatasets; ++i) {
    const std::uint64_t seed = derive_seed(7, i);
    Rng rng(derive_seed(seed, 0));
    const GroundTruth drawn = sample_ground_truth(10, 10, rng);
    const GroundTruth causal(drawn.m(), drawn.a(), Eigen::VectorXd::Zero(10), drawn.sigma_a(), 0.0);
    const auto ds = generate_samples(causal, 10000, 0.0, derive_seed(seed, 1));
    const double p = test_nonconfounding(ds.data, kDefaultNullCount, NullMethod::SphereMonteCarlo,
                                         derive_seed(seed, 2))
                         .p_value;
    r05 += p <= 0.05;
    r10 += p <= 0.10;
  }
  const double f05 = static_cast<double>(r05) / kDatasets;
  const double f10 = static_cast<double>(r10) / kDatasets;
  const bool ok = std::abs(f05 - 0.05) <= kLevelTolerance && std::abs(f10 - 0.10) <= kLevelTolerance;
  return verdict(ok, fmt("rejection rate %.3f at 0.05, %.3f at 0.10", f05, f10));
}

constexpr double kInvarianceTolerance = 1e-6;

Verdict invariance() {
  Rng rng(808);
  double worst_scale = 0.0, worst_rot = 0.0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng truth_rng(derive_seed(808, i));
    const auto truth = sample_ground_truth(10, 10, truth_rng);
    const auto data = generate_samples(truth, 2000, 0.0, derive_seed(809, i)).data;
    const double base = estimate_confounding(data).beta_hat;
    const double c = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const double scaled = estimate_confounding(DataMatrix(c * data.x(), data.y())).beta_hat;
    const Eigen::MatrixXd u = random_orthogonal(10, rng);
    const double rotated =
        estimate_confounding(DataMatrix(data.x() * u.transpose(), data.y())).beta_hat;
    worst_scale = std::max(worst_scale, std::abs(scaled - base));
    worst_rot = std::max(worst_rot, std::abs(rotated - base));
  }
  const bool ok = worst_scale <= kInvarianceTolerance && worst_rot <= kInvarianceTolerance;
  return verdict(ok, fmt("max |delta beta_hat|: scaling %.2g, rotation %.2g", worst_scale,
                         worst_rot));
}

constexpr double kMeanSigma = 3.0;

Verdict concentration() {
  const ThetaScale theta(1.0);
  std::vector<double> sds;
  std::string detail = "SD of log p:";
  double mean_gap_se = NAN;
  for (int d : {10, 50, 200, 1000}) {
    Rng spectrum_rng(100 + d);
    Eigen::VectorXd lambda(d);
    for (int j = 0; j < d; ++j) lambda[j] = spectrum_rng.uniform(0.5, 5.0);
    const auto cov = CovarianceModel::diagonal(lambda, Eigen::VectorXd::Ones(d));
    Rng rng(200 + d);
    std::vector<double> values;
    for (int i = 0; i < 500; ++i)
      values.push_back(log_direction_density(theta, sample_direction(theta, cov, rng), cov));
    const double sd = stats::sample_sd(values);
    sds.push_back(sd);
    detail += fmt(" d=%d %.3f (per dim %.4f)", d, sd, sd / d);
    if (d == 1000) {
      const double se = sd / std::sqrt(500.0);
      mean_gap_se = std::abs(stats::mean(values) - concentrated_loglik(theta, theta, cov)) / se;
    }
  }
  bool monotone = true;
  for (std::size_t k = 1; k < sds.size(); ++k) monotone = monotone && sds[k] < sds[k - 1];
  detail += fmt("; d=1000 mean off by %.2f SE", mean_gap_se);
  return verdict(monotone && mean_gap_se <= kMeanSigma, detail);
}

Verdict overfit_equivalence() {
  constexpr std::size_t kSeeds = 5000, d = 5, n = 21;
  std::vector<double> regression, confounded;
  for (std::size_t s = 0; s < kSeeds; ++s) {
    const auto ds = overfit_dataset(d, n, derive_seed(1010, s));
    const auto cov = empirical_covariance(ds.data);
    regression.push_back(g_stat(regression_vector(cov), cov));
  }
  for (std::size_t s = 0; s < kSeeds; ++s) {
    // Pure confounding, l = n - 1, mixing taken from an independent sample.
    const auto ds = overfit_dataset(d, n, derive_seed(1011, s));
    Rng rng(derive_seed(1012, s));
    const GroundTruth truth(overfit_mixing_matrix(ds.data), Eigen::VectorXd::Zero(d),
                            rng.normal_vector(n - 1), 0.0, 1.0);
    confounded.push_back(g_stat(truth.confounding_term(), truth.population_covariance()));
  }
  const auto ks = stats::ks_two_sample(regression, confounded);
  return verdict(ks.p_value > kKsLevel, fmt("KS D = %.4f, p = %.3f", ks.statistic, ks.p_value));
}

constexpr double kOpticalConfoundedLow = 0.70, kOpticalConfoundedHigh = 0.85;
constexpr double kNearZero = 0.05;
constexpr double kWineDroppedLow = 0.5, kWineDroppedHigh = 0.75;

std::optional<std::string> env_path(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v || !std::filesystem::exists(v)) return std::nullopt;
  return std::string(v);
}

double beta_for(const CsvTable& table, std::size_t target, bool normalize,
                std::optional<std::size_t> drop = std::nullopt) {
  CsvTable t = table;
  if (drop) {
    const auto k = static_cast<Eigen::Index>(*drop);
    Eigen::MatrixXd kept(t.values.rows(), t.values.cols() - 1);
    kept << t.values.leftCols(k), t.values.rightCols(t.values.cols() - k - 1);
    t.values = kept;
    t.names.erase(t.names.begin() + k);
    if (target > *drop) --target;
  }
  return estimate_confounding(split_target(t, target, normalize)).beta_hat;
}

Verdict real_data() {
  const auto confounded = env_path("CONFOUND_OPTICAL_CONFOUNDED");
  const auto unconfounded = env_path("CONFOUND_OPTICAL_UNCONFOUNDED");
  const auto wine = env_path("CONFOUND_WINE_CSV");
  if (!confounded && !unconfounded && !wine)
    return {Outcome::Skip, "no real-data files (set CONFOUND_OPTICAL_CONFOUNDED, "
                           "CONFOUND_OPTICAL_UNCONFOUNDED, CONFOUND_WINE_CSV)"};
  bool ok = true;
  std::string detail;
  // Optical-device files: the target is the last column.
  if (confounded) {
    const auto t = read_csv(*confounded);
    const double b = beta_for(t, static_cast<std::size_t>(t.values.cols() - 1), false);
    ok = ok && b >= kOpticalConfoundedLow && b <= kOpticalConfoundedHigh;
    detail += fmt("optical confounded beta_hat %.3f; ", b);
  }
  if (unconfounded) {
    const auto t = read_csv(*unconfounded);
    const double b = beta_for(t, static_cast<std::size_t>(t.values.cols() - 1), false);
    ok = ok && b <= kNearZero;
    detail += fmt("optical unconfounded beta_hat %.3f; ", b);
  }
  if (wine) {
    const auto t = read_csv(*wine, ';');
    const std::size_t target = resolve_column(t, ColumnRef{std::string("quality")});
    const std::size_t alcohol = resolve_column(t, ColumnRef{std::string("alcohol")});
    const double full = beta_for(t, target, true);
    const double dropped = beta_for(t, target, true, alcohol);
    ok = ok && full <= kNearZero && dropped >= kWineDroppedLow && dropped <= kWineDroppedHigh;
    detail += fmt("wine beta_hat %.3f, without alcohol %.3f", full, dropped);
  }
  return verdict(ok, detail);
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "likelihood identity at theta = 0", likelihood_identity},
      {2, "direction density normalization and shape", density_normalization},
      {3, "equivalence of the two source models", source_model_equivalence},
      {4, "true versus estimated beta (d = 10)", beta_recovery},
      {5, "rejection fractions by beta bin", rejection_bins},
      {6, "p-values on unconfounded data by sample size", unconfounded_p_values},
      {7, "test level calibration", calibration},
      {8, "scale and rotation invariance of beta_hat", invariance},
      {9, "concentration of the log density", concentration},
      {10, "overfitting equivalence", overfit_equivalence},
      {11, "real-data checks", real_data},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  bool any_fail = false, all_skipped = true;
  for (const auto& c : criteria()) {
    if (only && *only != c.id) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {Outcome::Fail, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    std::printf("[%s] criterion %2d  %s: %s (%.1fs)\n", tag, c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    any_fail = any_fail || v.outcome == Outcome::Fail;
    all_skipped = all_skipped && v.outcome == Outcome::Skip;
  }
  if (any_fail) return 1;
  if (only && all_skipped) return 77;
  return 0;
}
