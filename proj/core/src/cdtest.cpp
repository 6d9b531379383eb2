#include "confound/cdtest.hpp"

#include <cmath>
#include <string>

namespace confound {

std::string_view to_string(NullMethod method) noexcept {
  switch (method) {
    case NullMethod::SphereMonteCarlo: return "sphere_monte_carlo";
    case NullMethod::MixedChi2: return "mixed_chi2";
  }
  return "unknown";
}

NullMethod null_method_from_string(std::string_view name) {
  if (name == "sphere" || name == "sphere_monte_carlo") return NullMethod::SphereMonteCarlo;
  if (name == "chi2" || name == "mixed_chi2") return NullMethod::MixedChi2;
  throw Error(ErrorCode::InvalidArgument, "unknown null method '" + std::string(name) + "'");
}

double statistic_T_coords(const Eigen::VectorXd& coords, const Eigen::VectorXd& eigenvalues) {
  const Eigen::ArrayXd inv = eigenvalues.array().inverse();
  const double tau = inv.mean();
  const Eigen::ArrayXd w2 = coords.array().square();
  const double norm2 = w2.sum();
  if (!(norm2 > 0.0)) throw Error(ErrorCode::ZeroSignal, "direction has zero length");
  // Centered form: sum w^2 (s - tau) / sum w^2 vanishes exactly for a flat
  // spectrum, and equals <v, S v> - tau for unit v.
  const double centered = (w2 * (inv - tau)).sum() / norm2;
  return centered / std::sqrt(static_cast<double>(eigenvalues.size()));
}

double statistic_T(const UnitDirection& dir, const CovarianceModel& cov) {
  return statistic_T_coords(dir.coordinates_in(cov), cov.eigenvalues());
}

namespace {

void check_count(std::size_t count) {
  if (count < kMinNullCount)
    throw Error(ErrorCode::InvalidArgument,
                "null sample count must be at least " + std::to_string(kMinNullCount));
}

}  // namespace

std::vector<double> null_samples_sphere(const CovarianceModel& cov, std::size_t count, Rng& rng) {
  check_count(count);
  const auto d = static_cast<Eigen::Index>(cov.dim());
  std::vector<double> out;
  out.reserve(count);
  // The uniform law on the sphere is rotation invariant, so coordinates are
  // drawn directly in the eigenbasis.
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(statistic_T_coords(rng.normal_vector(d), cov.eigenvalues()));
  return out;
}

std::vector<double> null_samples_mixed_chi2(const CovarianceModel& cov, std::size_t count,
                                            Rng& rng) {
  check_count(count);
  const Eigen::ArrayXd s = cov.eigenvalues().array().inverse();
  const double tau = s.mean();
  const double d = static_cast<double>(s.size());
  const double sd = 1.0 / std::sqrt(d);  // variance 1/d per coefficient
  const double scale = 1.0 / std::sqrt(d);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      const double a = sd * rng.normal();
      sum += a * a * s[j];
    }
    out.push_back(scale * (sum - tau));
  }
  return out;
}

double upper_tail_p_value(double observed, const std::vector<double>& null_samples) {
  std::size_t exceed = 0;
  for (double t : null_samples)
    if (t >= observed) ++exceed;
  return static_cast<double>(1 + exceed) / static_cast<double>(1 + null_samples.size());
}

TestResult test_nonconfounding(const CovarianceModel& cov, std::size_t null_count,
                               NullMethod method, std::uint64_t seed) {
  check_count(null_count);
  const Eigen::VectorXd regression = regression_vector(cov);
  const UnitDirection dir = unit_direction(regression, cov);
  const double observed = statistic_T(dir, cov);
  Rng rng(seed);
  std::vector<double> null = method == NullMethod::SphereMonteCarlo
                                 ? null_samples_sphere(cov, null_count, rng)
                                 : null_samples_mixed_chi2(cov, null_count, rng);
  const double p = upper_tail_p_value(observed, null);
  return TestResult{observed, p, std::move(null), method, null_count, seed};
}

TestResult test_nonconfounding(const DataMatrix& data, std::size_t null_count, NullMethod method,
                               std::uint64_t seed) {
  return test_nonconfounding(empirical_covariance(data), null_count, method, seed);
}

}  // namespace confound
