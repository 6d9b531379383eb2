#pragma once

// Dense symmetric linear algebra shared by every other module: sample
// covariances, their eigendecomposition, and regression directions.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "confound/error.hpp"

namespace confound {

// Smallest admissible eigenvalue, relative to the largest.
inline constexpr double kRankTolerance = 1e-10;

// n x d predictor samples (rows are observations) plus the n targets.
class DataMatrix {
 public:
  DataMatrix(Eigen::MatrixXd x, Eigen::VectorXd y,
             std::vector<std::string> column_names = {});

  const Eigen::MatrixXd& x() const noexcept { return x_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  const std::vector<std::string>& column_names() const noexcept {
    return column_names_;
  }
  std::size_t samples() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x_.cols()); }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<std::string> column_names_;
};

// Second moments of (X, Y) together with the spectrum of Sigma_XX.
// Eigenvalues are sorted in descending order; column j of eigenvectors()
// belongs to eigenvalues()[j].
class CovarianceModel {
 public:
  // Symmetrizes sigma_xx, decomposes it and rejects (near-)singular input.
  // sample_count is 0 for analytically specified models.
  static CovarianceModel from_matrices(const Eigen::MatrixXd& sigma_xx,
                                       Eigen::VectorXd sigma_xy,
                                       std::size_t sample_count = 0,
                                       std::optional<double> sigma_yy = {});

  // Builds Sigma_XX = V diag(lambda) V^T from a known orthogonal V.
  static CovarianceModel from_spectrum(Eigen::VectorXd eigenvalues,
                                       Eigen::MatrixXd eigenvectors,
                                       Eigen::VectorXd sigma_xy,
                                       std::size_t sample_count = 0);

  // Diagonal Sigma_XX with the standard basis as eigenvectors. The values
  // need not be sorted; the stored spectrum is.
  static CovarianceModel diagonal(const Eigen::VectorXd& variances,
                                  Eigen::VectorXd sigma_xy);

  const Eigen::MatrixXd& sigma_xx() const noexcept { return sigma_xx_; }
  const Eigen::VectorXd& sigma_xy() const noexcept { return sigma_xy_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
  // Variance of the target, known only for empirical models.
  const std::optional<double>& sigma_yy() const noexcept { return sigma_yy_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }
  std::size_t sample_count() const noexcept { return sample_count_; }

  // Coordinates of v with respect to the eigenbasis.
  Eigen::VectorXd to_eigenbasis(const Eigen::VectorXd& v) const;
  double median_eigenvalue() const;

 private:
  CovarianceModel() = default;
  void validate_spectrum() const;

  Eigen::MatrixXd sigma_xx_;
  Eigen::VectorXd sigma_xy_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  std::optional<double> sigma_yy_;
  std::size_t sample_count_ = 0;
};

// A unit vector, optionally carrying its coordinates in the eigenbasis of the
// CovarianceModel it was created against.
class UnitDirection {
 public:
  // Normalizes v; throws ZeroSignal for the zero vector.
  static UnitDirection from_vector(const Eigen::VectorXd& v);
  // Direction given by (unnormalized) coordinates in the eigenbasis of cov;
  // the normalized coordinates are cached.
  static UnitDirection from_coordinates(const Eigen::VectorXd& coords,
                                        const CovarianceModel& cov);

  const Eigen::VectorXd& v() const noexcept { return v_; }
  const std::optional<Eigen::VectorXd>& basis_coords() const noexcept {
    return basis_coords_;
  }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(v_.size()); }

  // Cached coordinates when present, otherwise V^T v computed on the spot.
  // The cache is only meaningful for the model passed to unit_direction().
  Eigen::VectorXd coordinates_in(const CovarianceModel& cov) const;

 private:
  friend UnitDirection unit_direction(const Eigen::VectorXd&, const CovarianceModel&);
  explicit UnitDirection(Eigen::VectorXd v) : v_(std::move(v)) {}

  Eigen::VectorXd v_;
  std::optional<Eigen::VectorXd> basis_coords_;
};

// (1/n) Xc^T Xc and (1/n) Xc^T yc on column-centered data.
CovarianceModel empirical_covariance(const DataMatrix& data);

// Sigma_XX^{-1} Sigma_XY evaluated through the eigendecomposition.
Eigen::VectorXd regression_vector(const CovarianceModel& cov);

UnitDirection unit_direction(const Eigen::VectorXd& v, const CovarianceModel& cov);

// (1/d) sum_j f(lambda_j).
template <std::invocable<double> F>
double renormalized_trace(F&& f, const CovarianceModel& cov) {
  const auto& lambda = cov.eigenvalues();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) sum += f(lambda[j]);
  const double out = sum / static_cast<double>(lambda.size());
  if (!std::isfinite(out))
    throw Error(ErrorCode::NumericOverflow, "renormalized trace is not finite");
  return out;
}

// tau(Sigma_XX^{-1}).
double tau_inverse(const CovarianceModel& cov);

}  // namespace confound
