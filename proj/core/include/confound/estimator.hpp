#pragma once

// Maximum-likelihood estimation of the confounding strength from the
// orientation of the regression vector relative to the spectrum of Sigma_XX.
//
// Under the source model the regression vector is sqrt(R_theta) b with b
// isotropic, R_theta = I + theta Sigma_XX^{-1} and theta = sigma_c^2 / sigma_a^2.
// Its direction v therefore has, relative to the uniform measure on the
// sphere, the density 1 / (sqrt(det R_theta) <v, R_theta^{-1} v>^{d/2}):
//
//   log p_theta(v) = -1/2 [ log det R_theta + d log <v, R_theta^{-1} v> ].
// All evaluations below run in the
// eigenbasis of Sigma_XX, O(d) each; R_theta is never formed.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "confound/rng.hpp"
#include "confound/spectral.hpp"

namespace confound {

// theta = sigma_c^2 / sigma_a^2: finite and nonnegative.
class ThetaScale {
 public:
  explicit ThetaScale(double value);

  double value() const noexcept { return value_; }

  friend bool operator==(const ThetaScale&, const ThetaScale&) = default;

 private:
  double value_;
};

struct LogLikPoint {
  double theta;
  double loglik;

  friend bool operator==(const LogLikPoint&, const LogLikPoint&) = default;
};

struct ThetaSearchOptions {
  std::size_t grid_points = 200;
  // Grid spans [10^-decades, 10^decades] times the median eigenvalue.
  double span_decades = 6.0;
  double relative_tolerance = 1e-6;
  std::size_t max_refine_iterations = 200;
};

struct ThetaFit {
  ThetaScale theta;
  double loglik;
  std::vector<LogLikPoint> profile;
  // Coarse maximum sat on the upper end of the grid.
  bool boundary = false;
};

struct BetaEstimate {
  ThetaScale theta_hat;
  double beta_hat;
  double tau_inv;
  std::vector<LogLikPoint> loglik_profile;
  UnitDirection direction;
  bool boundary;
  CovarianceModel covariance;
  Eigen::VectorXd regression;
};

// Density of Phi(v) = Av / ||Av|| for v uniform on the sphere, relative to
// the uniform measure: 1 / (|det A| ||A^{-1} v||^d). A is factored once.
class DirectionDensity {
 public:
  explicit DirectionDensity(const Eigen::MatrixXd& a_matrix);

  double operator()(const Eigen::VectorXd& unit) const;
  double log_density(const Eigen::VectorXd& unit) const;
  std::size_t dim() const noexcept { return static_cast<std::size_t>(inverse_.rows()); }

 private:
  Eigen::MatrixXd inverse_;
  double log_abs_det_;
};

double direction_density(const Eigen::MatrixXd& a_matrix, const UnitDirection& dir);

double log_direction_density(ThetaScale theta, const UnitDirection& dir,
                             const CovarianceModel& cov);
// Same, with the eigenbasis coordinates of the direction given directly. The
// coordinates need not be normalized; the value is scale-free in them.
double log_direction_density_coords(double theta, const Eigen::VectorXd& coords,
                                    const Eigen::VectorXd& eigenvalues);

ThetaFit estimate_theta(const UnitDirection& dir, const CovarianceModel& cov,
                        const ThetaSearchOptions& options = {});

// tau(Sigma^{-1}) theta / (tau(Sigma^{-1}) theta + 1).
double beta_from_theta(ThetaScale theta, const CovarianceModel& cov);

// Full pipeline: covariance, regression vector, direction, theta, beta.
// Errors carry the failing stage name.
BetaEstimate estimate_confounding(const DataMatrix& data,
                                  const ThetaSearchOptions& options = {});
// Pipeline from precomputed moments.
BetaEstimate estimate_confounding(const CovarianceModel& cov,
                                  const ThetaSearchOptions& options = {});

// Value log p_theta(v) settles near for v ~ p_theta' and large d:
//   -1/2 [ log det R_theta + d log( tau(R_theta' R_theta^{-1}) / tau(R_theta') ) ].
double concentrated_loglik(ThetaScale theta, ThetaScale theta_prime, const CovarianceModel& cov);

enum class BoundVariant {
  // 1 - 1/(d eps^2) (tau(R^2 R'^-2)/tau(R R')^2 + tau(R'^2)/tau(R')^2)
  Statement,
  // 1 - 4/(d eps^2) (tau(R'^2 R^-2)/tau(R' R)^2 + tau(R'^2)/tau(R')^2)
  Derivation,
};

// Lower bound on the probability that log p_theta(v), v ~ p_theta', lies
// within epsilon of concentrated_loglik. Returned raw; may be negative.
double concentration_bound(ThetaScale theta, ThetaScale theta_prime, const CovarianceModel& cov,
                           double epsilon, BoundVariant variant = BoundVariant::Statement);

struct ConcentrationDiagnostic {
  ThetaScale theta;
  ThetaScale theta_prime;
  double concentrated_value;
  double epsilon;
  double probability_lower_bound;

  // Bound clamped to [0, 1] for display.
  double reported_probability() const;
};

ConcentrationDiagnostic concentration_diagnostic(ThetaScale theta, ThetaScale theta_prime,
                                                 const CovarianceModel& cov, double epsilon,
                                                 BoundVariant variant = BoundVariant::Statement);

// Direction drawn from p_theta: sqrt(R_theta) b / ||sqrt(R_theta) b||, b
// standard Gaussian.
UnitDirection sample_direction(ThetaScale theta, const CovarianceModel& cov, Rng& rng);

}  // namespace confound
