#pragma once

// One-sided test of "no confounding" (theta = 0). Confounding pushes the
// regression direction into low-eigenvalue eigenspaces, which raises
//
//   T(v) = (1/sqrt(d)) ( <v, Sigma^{-1} v> - tau(Sigma^{-1}) ).

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "confound/rng.hpp"
#include "confound/spectral.hpp"

namespace confound {

inline constexpr std::size_t kMinNullCount = 100;
inline constexpr std::size_t kDefaultNullCount = 1000;

enum class NullMethod {
  // Exact: T of uniformly random directions.
  SphereMonteCarlo,
  // Weighted sum of squared Gaussians approximation.
  MixedChi2,
};

std::string_view to_string(NullMethod method) noexcept;
NullMethod null_method_from_string(std::string_view name);

struct TestResult {
  double t_observed;
  double p_value;
  std::vector<double> null_samples;
  NullMethod method;
  std::size_t null_count;
  std::uint64_t seed;
};

double statistic_T(const UnitDirection& dir, const CovarianceModel& cov);
double statistic_T_coords(const Eigen::VectorXd& coords, const Eigen::VectorXd& eigenvalues);

std::vector<double> null_samples_sphere(const CovarianceModel& cov, std::size_t count, Rng& rng);
std::vector<double> null_samples_mixed_chi2(const CovarianceModel& cov, std::size_t count,
                                            Rng& rng);

// (1 + #{null >= observed}) / (1 + N).
double upper_tail_p_value(double observed, const std::vector<double>& null_samples);

TestResult test_nonconfounding(const DataMatrix& data, std::size_t null_count, NullMethod method,
                               std::uint64_t seed);
TestResult test_nonconfounding(const CovarianceModel& cov, std::size_t null_count,
                               NullMethod method, std::uint64_t seed);

}  // namespace confound
