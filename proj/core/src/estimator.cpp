#include "confound/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

namespace confound {

ThetaScale::ThetaScale(double value) : value_(value) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw Error(ErrorCode::InvalidArgument,
                "theta must be finite and nonnegative, got " + std::to_string(value));
}

DirectionDensity::DirectionDensity(const Eigen::MatrixXd& a_matrix) {
  if (a_matrix.rows() != a_matrix.cols() || a_matrix.rows() < 1)
    throw Error(ErrorCode::BadDimensions, "direction density needs a square matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smallest = s[s.size() - 1];
  if (!(smallest > 0.0) || s[0] / smallest >= 1e12)
    throw Error(ErrorCode::SingularMatrix, "matrix is singular or condition number >= 1e12");
  inverse_ = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  log_abs_det_ = s.array().log().sum();
}

double DirectionDensity::log_density(const Eigen::VectorXd& unit) const {
  if (unit.size() != inverse_.rows())
    throw Error(ErrorCode::BadDimensions, "direction length does not match matrix");
  const double d = static_cast<double>(unit.size());
  return -log_abs_det_ - d * std::log((inverse_ * unit).norm());
}

double DirectionDensity::operator()(const Eigen::VectorXd& unit) const {
  return std::exp(log_density(unit));
}

double direction_density(const Eigen::MatrixXd& a_matrix, const UnitDirection& dir) {
  return DirectionDensity(a_matrix)(dir.v());
}

double log_direction_density_coords(double theta, const Eigen::VectorXd& coords,
                                    const Eigen::VectorXd& eigenvalues) {
  double log_det = 0.0;
  double quad = 0.0;
  double norm2 = 0.0;
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
    const double ratio = theta / eigenvalues[j];
    if (!std::isfinite(ratio))
      throw Error(ErrorCode::NumericOverflow, "theta / lambda overflows");
    const double w2 = coords[j] * coords[j];
    log_det += std::log1p(ratio);
    quad += w2 / (1.0 + ratio);
    norm2 += w2;
  }
  if (!(norm2 > 0.0)) throw Error(ErrorCode::ZeroSignal, "direction has zero length");
  const double d = static_cast<double>(eigenvalues.size());
  const double out = -0.5 * (log_det + d * std::log(quad / norm2));
  if (!std::isfinite(out)) throw Error(ErrorCode::NumericOverflow, "log density is not finite");
  return out;
}

double log_direction_density(ThetaScale theta, const UnitDirection& dir,
                             const CovarianceModel& cov) {
  return log_direction_density_coords(theta.value(), dir.coordinates_in(cov), cov.eigenvalues());
}

ThetaFit estimate_theta(const UnitDirection& dir, const CovarianceModel& cov,
                        const ThetaSearchOptions& options) {
  if (options.grid_points < 2)
    throw Error(ErrorCode::InvalidArgument, "theta grid needs at least 2 points");
  const Eigen::VectorXd coords = dir.coordinates_in(cov);
  const Eigen::VectorXd& lambda = cov.eigenvalues();

  std::vector<LogLikPoint> profile;
  profile.reserve(options.grid_points + 1 + 2 * options.max_refine_iterations);
  auto evaluate = [&](double theta) {
    const double value = log_direction_density_coords(theta, coords, lambda);
    profile.push_back({theta, value});
    return value;
  };

  // Coarse scan: 0 plus a log grid scaled by the median eigenvalue.
  const double scale = cov.median_eigenvalue();
  const std::size_t count = options.grid_points;
  std::vector<double> grid(count + 1);
  grid[0] = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double exponent = -options.span_decades + 2.0 * options.span_decades *
                                                        static_cast<double>(k) /
                                                        static_cast<double>(count - 1);
    grid[k + 1] = scale * std::pow(10.0, exponent);
  }
  std::size_t best = 0;
  double best_value = evaluate(grid[0]);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    // Strict comparison keeps the smaller theta on ties.
    const double value = evaluate(grid[k]);
    if (value > best_value) {
      best_value = value;
      best = k;
    }
  }
  const bool boundary = best == grid.size() - 1;

  // Golden-section refinement on the cell pair around the coarse maximum.
  double lo = grid[best == 0 ? 0 : best - 1];
  double hi = grid[std::min(best + 1, grid.size() - 1)];
  const double floor_scale = grid[1];
  constexpr double kInvPhi = 0.6180339887498949;
  double left = hi - kInvPhi * (hi - lo);
  double right = lo + kInvPhi * (hi - lo);
  double f_left = evaluate(left);
  double f_right = evaluate(right);
  for (std::size_t it = 0; it < options.max_refine_iterations; ++it) {
    const double tol =
        options.relative_tolerance * std::max(0.5 * (lo + hi), floor_scale);
    if (hi - lo <= tol) break;
    if (f_left >= f_right) {
      hi = right;
      right = left;
      f_right = f_left;
      left = hi - kInvPhi * (hi - lo);
      f_left = evaluate(left);
    } else {
      lo = left;
      left = right;
      f_left = f_right;
      right = lo + kInvPhi * (hi - lo);
      f_right = evaluate(right);
    }
  }

  LogLikPoint winner = profile.front();
  for (const LogLikPoint& p : profile) {
    if (p.loglik > winner.loglik || (p.loglik == winner.loglik && p.theta < winner.theta))
      winner = p;
  }
  return ThetaFit{ThetaScale(winner.theta), winner.loglik, std::move(profile), boundary};
}

double beta_from_theta(ThetaScale theta, const CovarianceModel& cov) {
  const double scaled = tau_inverse(cov) * theta.value();
  return scaled / (scaled + 1.0);
}

namespace {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

}  // namespace

BetaEstimate estimate_confounding(const CovarianceModel& cov, const ThetaSearchOptions& options) {
  Eigen::VectorXd regression = run_stage("regression", [&] { return regression_vector(cov); });
  UnitDirection direction = run_stage("direction", [&] { return unit_direction(regression, cov); });
  ThetaFit fit = run_stage("theta", [&] { return estimate_theta(direction, cov, options); });
  const double tau = run_stage("beta", [&] { return tau_inverse(cov); });
  const double scaled = tau * fit.theta.value();
  const double beta = scaled / (scaled + 1.0);
  return BetaEstimate{fit.theta,       beta, tau, std::move(fit.profile), std::move(direction),
                      fit.boundary,    cov,  std::move(regression)};
}

BetaEstimate estimate_confounding(const DataMatrix& data, const ThetaSearchOptions& options) {
  const CovarianceModel cov = run_stage("covariance", [&] { return empirical_covariance(data); });
  return estimate_confounding(cov, options);
}

namespace {

// r_j = 1 + theta / lambda_j, the spectrum of R_theta.
Eigen::ArrayXd r_spectrum(double theta, const CovarianceModel& cov) {
  return 1.0 + theta * cov.eigenvalues().array().inverse();
}

}  // namespace

double concentrated_loglik(ThetaScale theta, ThetaScale theta_prime, const CovarianceModel& cov) {
  const Eigen::ArrayXd r = r_spectrum(theta.value(), cov);
  const Eigen::ArrayXd rp = r_spectrum(theta_prime.value(), cov);
  const double log_det = r.log().sum();
  const double d = static_cast<double>(cov.dim());
  const double out = -0.5 * (log_det + d * std::log((rp / r).mean() / rp.mean()));
  if (!std::isfinite(out))
    throw Error(ErrorCode::NumericOverflow, "concentrated log-likelihood is not finite");
  return out;
}

double concentration_bound(ThetaScale theta, ThetaScale theta_prime, const CovarianceModel& cov,
                           double epsilon, BoundVariant variant) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  const Eigen::ArrayXd r = r_spectrum(theta.value(), cov);
  const Eigen::ArrayXd rp = r_spectrum(theta_prime.value(), cov);
  const double d = static_cast<double>(cov.dim());
  const double second = rp.square().mean() / (rp.mean() * rp.mean());
  const double mixed = (r * rp).mean();
  if (variant == BoundVariant::Statement) {
    const double first = (r.square() / rp.square()).mean() / (mixed * mixed);
    return 1.0 - (first + second) / (d * epsilon * epsilon);
  }
  const double first = (rp.square() / r.square()).mean() / (mixed * mixed);
  return 1.0 - 4.0 * (first + second) / (d * epsilon * epsilon);
}

double ConcentrationDiagnostic::reported_probability() const {
  return std::clamp(probability_lower_bound, 0.0, 1.0);
}

ConcentrationDiagnostic concentration_diagnostic(ThetaScale theta, ThetaScale theta_prime,
                                                 const CovarianceModel& cov, double epsilon,
                                                 BoundVariant variant) {
  return ConcentrationDiagnostic{theta, theta_prime, concentrated_loglik(theta, theta_prime, cov),
                                 epsilon,
                                 concentration_bound(theta, theta_prime, cov, epsilon, variant)};
}

UnitDirection sample_direction(ThetaScale theta, const CovarianceModel& cov, Rng& rng) {
  const Eigen::ArrayXd r = r_spectrum(theta.value(), cov);
  const Eigen::VectorXd b = rng.normal_vector(static_cast<Eigen::Index>(cov.dim()));
  // b is isotropic, so drawing it directly in eigen-coordinates is exact.
  return UnitDirection::from_coordinates((r.sqrt() * b.array()).matrix(), cov);
}

}  // namespace confound
