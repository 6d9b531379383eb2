#include "confound/spectral.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace confound {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// Descending order of the eigenvalues, carrying eigenvector columns along.
void sort_descending(Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index d = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values[a] > values[b];
  });
  Eigen::VectorXd sorted_values(d);
  Eigen::MatrixXd sorted_vectors(vectors.rows(), d);
  for (Eigen::Index j = 0; j < d; ++j) {
    sorted_values[j] = values[order[static_cast<std::size_t>(j)]];
    sorted_vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
}

}  // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd x, Eigen::VectorXd y,
                       std::vector<std::string> column_names)
    : x_(std::move(x)), y_(std::move(y)), column_names_(std::move(column_names)) {
  if (x_.rows() < 2)
    throw Error(ErrorCode::TooFewSamples, "need at least 2 samples");
  if (x_.cols() < 1)
    throw Error(ErrorCode::BadDimensions, "need at least one predictor column");
  if (y_.size() != x_.rows())
    throw Error(ErrorCode::BadDimensions, "target length " + std::to_string(y_.size()) +
                                              " does not match " +
                                              std::to_string(x_.rows()) + " samples");
  if (!column_names_.empty() &&
      column_names_.size() != static_cast<std::size_t>(x_.cols()))
    throw Error(ErrorCode::BadDimensions, "column name count does not match predictors");
  if (!all_finite(x_) || !y_.allFinite())
    throw Error(ErrorCode::InvalidArgument, "data contains non-finite entries");
}

CovarianceModel CovarianceModel::from_matrices(const Eigen::MatrixXd& sigma_xx,
                                               Eigen::VectorXd sigma_xy,
                                               std::size_t sample_count,
                                               std::optional<double> sigma_yy) {
  if (sigma_xx.rows() != sigma_xx.cols() || sigma_xx.rows() < 1)
    throw Error(ErrorCode::BadDimensions, "sigma_xx must be square and non-empty");
  if (sigma_xy.size() != sigma_xx.rows())
    throw Error(ErrorCode::BadDimensions, "sigma_xy length does not match sigma_xx");
  if (!all_finite(sigma_xx) || !sigma_xy.allFinite())
    throw Error(ErrorCode::InvalidArgument, "covariance contains non-finite entries");

  CovarianceModel out;
  out.sigma_xx_ = 0.5 * (sigma_xx + sigma_xx.transpose());
  out.sigma_xy_ = std::move(sigma_xy);
  out.sample_count_ = sample_count;
  out.sigma_yy_ = sigma_yy;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.sigma_xx_);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NumericOverflow, "symmetric eigensolver did not converge");
  out.eigenvalues_ = solver.eigenvalues();
  out.eigenvectors_ = solver.eigenvectors();
  sort_descending(out.eigenvalues_, out.eigenvectors_);
  out.validate_spectrum();
  return out;
}

CovarianceModel CovarianceModel::from_spectrum(Eigen::VectorXd eigenvalues,
                                               Eigen::MatrixXd eigenvectors,
                                               Eigen::VectorXd sigma_xy,
                                               std::size_t sample_count) {
  const Eigen::Index d = eigenvalues.size();
  if (d < 1 || eigenvectors.rows() != d || eigenvectors.cols() != d || sigma_xy.size() != d)
    throw Error(ErrorCode::BadDimensions, "spectrum, basis and sigma_xy sizes disagree");
  if (!eigenvalues.allFinite() || !all_finite(eigenvectors) || !sigma_xy.allFinite())
    throw Error(ErrorCode::InvalidArgument, "spectrum contains non-finite entries");
  const double orth_err =
      (eigenvectors.transpose() * eigenvectors - Eigen::MatrixXd::Identity(d, d))
          .cwiseAbs()
          .maxCoeff();
  if (orth_err > 1e-10)
    throw Error(ErrorCode::InvalidArgument, "eigenvector matrix is not orthogonal");

  CovarianceModel out;
  sort_descending(eigenvalues, eigenvectors);
  out.eigenvalues_ = std::move(eigenvalues);
  out.eigenvectors_ = std::move(eigenvectors);
  out.validate_spectrum();
  const Eigen::MatrixXd s =
      out.eigenvectors_ * out.eigenvalues_.asDiagonal() * out.eigenvectors_.transpose();
  out.sigma_xx_ = 0.5 * (s + s.transpose());
  out.sigma_xy_ = std::move(sigma_xy);
  out.sample_count_ = sample_count;
  return out;
}

CovarianceModel CovarianceModel::diagonal(const Eigen::VectorXd& variances,
                                          Eigen::VectorXd sigma_xy) {
  const Eigen::Index d = variances.size();
  return from_spectrum(variances, Eigen::MatrixXd::Identity(d, d), std::move(sigma_xy));
}

void CovarianceModel::validate_spectrum() const {
  const double largest = eigenvalues_[0];
  const double smallest = eigenvalues_[eigenvalues_.size() - 1];
  if (!(largest > 0.0) || smallest <= kRankTolerance * largest)
    throw Error(ErrorCode::RankDeficient,
                "smallest eigenvalue " + std::to_string(smallest) +
                    " is not above 1e-10 times the largest " + std::to_string(largest));
}

Eigen::VectorXd CovarianceModel::to_eigenbasis(const Eigen::VectorXd& v) const {
  if (v.size() != eigenvalues_.size())
    throw Error(ErrorCode::BadDimensions, "vector length does not match covariance dimension");
  return eigenvectors_.transpose() * v;
}

double CovarianceModel::median_eigenvalue() const {
  // Sorted descending, so the median is read off directly.
  const Eigen::Index d = eigenvalues_.size();
  if (d % 2 == 1) return eigenvalues_[d / 2];
  return 0.5 * (eigenvalues_[d / 2 - 1] + eigenvalues_[d / 2]);
}

UnitDirection UnitDirection::from_vector(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (!(norm > 0.0))
    throw Error(ErrorCode::ZeroSignal, "cannot normalize the zero vector");
  if (!std::isfinite(norm))
    throw Error(ErrorCode::NumericOverflow, "vector norm is not finite");
  return UnitDirection(v / norm);
}

UnitDirection UnitDirection::from_coordinates(const Eigen::VectorXd& coords,
                                              const CovarianceModel& cov) {
  if (coords.size() != static_cast<Eigen::Index>(cov.dim()))
    throw Error(ErrorCode::BadDimensions, "coordinate length does not match covariance dimension");
  const double norm = coords.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::ZeroSignal, "cannot normalize the zero vector");
  UnitDirection out(cov.eigenvectors() * (coords / norm));
  out.basis_coords_ = coords / norm;
  return out;
}

Eigen::VectorXd UnitDirection::coordinates_in(const CovarianceModel& cov) const {
  if (basis_coords_ && basis_coords_->size() == static_cast<Eigen::Index>(cov.dim()))
    return *basis_coords_;
  return cov.to_eigenbasis(v_);
}

CovarianceModel empirical_covariance(const DataMatrix& data) {
  const auto n = static_cast<Eigen::Index>(data.samples());
  const auto d = static_cast<Eigen::Index>(data.dim());
  if (n <= d)
    throw Error(ErrorCode::TooFewSamples, std::to_string(n) + " samples for " +
                                              std::to_string(d) + " predictors");

  const Eigen::RowVectorXd x_mean = data.x().colwise().mean();
  const Eigen::MatrixXd xc = data.x().rowwise() - x_mean;
  const Eigen::VectorXd yc = data.y().array() - data.y().mean();
  const double inv_n = 1.0 / static_cast<double>(n);

  const Eigen::MatrixXd sigma_xx = inv_n * (xc.transpose() * xc);
  Eigen::VectorXd sigma_xy = inv_n * (xc.transpose() * yc);
  const double sigma_yy = inv_n * yc.squaredNorm();
  return CovarianceModel::from_matrices(sigma_xx, std::move(sigma_xy), data.samples(),
                                        sigma_yy);
}

Eigen::VectorXd regression_vector(const CovarianceModel& cov) {
  if ((cov.sigma_xy().array() == 0.0).all())
    throw Error(ErrorCode::ZeroSignal, "sigma_xy is exactly zero");
  const Eigen::VectorXd coords = cov.to_eigenbasis(cov.sigma_xy());
  return cov.eigenvectors() * coords.cwiseQuotient(cov.eigenvalues());
}

UnitDirection unit_direction(const Eigen::VectorXd& v, const CovarianceModel& cov) {
  UnitDirection out = UnitDirection::from_vector(v);
  out.basis_coords_ = cov.to_eigenbasis(out.v_);
  return out;
}

double tau_inverse(const CovarianceModel& cov) {
  return renormalized_trace([](double lambda) { return 1.0 / lambda; }, cov);
}

}  // namespace confound
