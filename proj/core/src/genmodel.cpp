#include "confound/genmodel.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

namespace confound {

GroundTruth::GroundTruth(Eigen::MatrixXd m, Eigen::VectorXd a, Eigen::VectorXd c,
                         double sigma_a, double sigma_c)
    : m_(std::move(m)), a_(std::move(a)), c_(std::move(c)), sigma_a_(sigma_a), sigma_c_(sigma_c) {
  if (m_.rows() < 1 || m_.cols() < m_.rows())
    throw Error(ErrorCode::BadDimensions, "mixing matrix must be d x l with l >= d >= 1, got " +
                                              std::to_string(m_.rows()) + " x " +
                                              std::to_string(m_.cols()));
  if (a_.size() != m_.rows() || c_.size() != m_.cols())
    throw Error(ErrorCode::BadDimensions, "coefficient vectors do not match the mixing matrix");
  if (!(sigma_a_ >= 0.0) || !(sigma_c_ >= 0.0) || !std::isfinite(sigma_a_) ||
      !std::isfinite(sigma_c_))
    throw Error(ErrorCode::InvalidArgument, "scales must be finite and nonnegative");
  if (!m_.allFinite() || !a_.allFinite() || !c_.allFinite())
    throw Error(ErrorCode::InvalidArgument, "model contains non-finite entries");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double largest = s[0];
  if (!(largest > 0.0) || s[s.size() - 1] <= 1e-10 * largest)
    throw Error(ErrorCode::RankDeficient, "mixing matrix does not have full row rank");

  Eigen::VectorXd inv_s(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    inv_s[i] = s[i] > kPseudoInverseCutoff * largest ? 1.0 / s[i] : 0.0;
  // pinv(M) = V S^+ U^T, so pinv(M)^T = U S^+ V^T.
  pinv_t_ = svd.matrixU() * inv_s.asDiagonal() * svd.matrixV().transpose();
}

CovarianceModel GroundTruth::population_covariance() const {
  const Eigen::MatrixXd sigma_xx = m_ * m_.transpose();
  Eigen::VectorXd sigma_xy = sigma_xx * a_ + m_ * c_;
  return CovarianceModel::from_matrices(sigma_xx, std::move(sigma_xy));
}

GroundTruth sample_ground_truth(std::size_t d, std::size_t latent, Rng& rng) {
  if (d < 1 || latent < d)
    throw Error(ErrorCode::BadDimensions, "need latent >= d >= 1, got d = " + std::to_string(d) +
                                              ", latent = " + std::to_string(latent));
  const auto rows = static_cast<Eigen::Index>(d);
  const auto cols = static_cast<Eigen::Index>(latent);
  Eigen::MatrixXd m = rng.normal_matrix(rows, cols);
  const double sigma_a = rng.uniform();
  const double sigma_c = rng.uniform();
  Eigen::VectorXd a = sigma_a * rng.normal_vector(rows);
  Eigen::VectorXd c = sigma_c * rng.normal_vector(cols);
  return GroundTruth(std::move(m), std::move(a), std::move(c), sigma_a, sigma_c);
}

SyntheticDataset generate_samples(const GroundTruth& truth, std::size_t n, double noise_sd,
                                  std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
    throw Error(ErrorCode::InvalidArgument, "noise_sd must be finite and nonnegative");

  Rng rng(seed);
  const auto rows = static_cast<Eigen::Index>(n);
  const auto latent = static_cast<Eigen::Index>(truth.latent_dim());
  // One row of sources per sample, drawn sample by sample.
  Eigen::MatrixXd z(rows, latent);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < latent; ++k) z(i, k) = rng.normal();
  const Eigen::VectorXd noise = rng.normal_vector(rows);

  Eigen::MatrixXd x = z * truth.m().transpose();
  Eigen::VectorXd y = x * truth.a() + z * truth.c() + noise_sd * noise;

  const bool structural = !(truth.c().array() == 0.0).all() || !(truth.a().array() == 0.0).all();
  const double beta = structural ? true_beta(truth) : 0.0;
  return SyntheticDataset{DataMatrix(std::move(x), std::move(y)), truth, beta, seed};
}

double true_beta(const GroundTruth& truth) {
  const double confounded = truth.confounding_term().squaredNorm();
  const double causal = truth.a().squaredNorm();
  const double total = causal + confounded;
  if (!(total > 0.0))
    throw Error(ErrorCode::DegenerateModel, "both causal and confounding terms vanish");
  return confounded / total;
}

Eigen::VectorXd sample_aprime_def1(const GroundTruth& truth, Rng& rng) {
  const Eigen::VectorXd a =
      truth.sigma_a() * rng.normal_vector(static_cast<Eigen::Index>(truth.dim()));
  const Eigen::VectorXd c =
      truth.sigma_c() * rng.normal_vector(static_cast<Eigen::Index>(truth.latent_dim()));
  return a + truth.pinv_transpose() * c;
}

Eigen::VectorXd sample_aprime_def2(const CovarianceModel& cov, double sigma_a, double sigma_c,
                                   Rng& rng) {
  const Eigen::VectorXd b = rng.normal_vector(static_cast<Eigen::Index>(cov.dim()));
  const Eigen::VectorXd scale =
      (sigma_a * sigma_a + sigma_c * sigma_c * cov.eigenvalues().array().inverse()).sqrt();
  return cov.eigenvectors() * scale.cwiseProduct(cov.to_eigenbasis(b));
}

SyntheticDataset overfit_dataset(std::size_t d, std::size_t n, std::uint64_t seed) {
  if (d < 1 || n <= d + 1)
    throw Error(ErrorCode::TooFewSamples, "overfit dataset needs n > d + 1");
  Rng rng(seed);
  const auto dim = static_cast<Eigen::Index>(d);
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m = rng.normal_matrix(dim, dim);
  Eigen::MatrixXd z(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < dim; ++k) z(i, k) = rng.normal();
  Eigen::VectorXd y = rng.normal_vector(rows);
  Eigen::MatrixXd x = z * m.transpose();

  GroundTruth truth(std::move(m), Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim), 0.0,
                    0.0);
  return SyntheticDataset{DataMatrix(std::move(x), std::move(y)), std::move(truth), 0.0, seed};
}

SyntheticDataset causal_dataset(std::size_t d, std::size_t n, double noise_sd,
                                std::uint64_t seed) {
  if (d < 1) throw Error(ErrorCode::BadDimensions, "need d >= 1");
  Rng rng(seed);
  const auto dim = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd m = rng.normal_matrix(dim, dim);
  Eigen::VectorXd a = rng.normal_vector(dim);
  GroundTruth truth(std::move(m), std::move(a), Eigen::VectorXd::Zero(dim), 1.0, 0.0);
  return generate_samples(truth, n, noise_sd, derive_seed(seed, 1));
}

Eigen::MatrixXd helmert_basis(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::BadDimensions, "Helmert basis needs n >= 2");
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(size - 1, size);
  for (Eigen::Index k = 0; k + 1 < size; ++k) {
    const double kk = static_cast<double>(k + 1);
    const double norm = std::sqrt(kk * (kk + 1.0));
    v.row(k).head(k + 1).setConstant(1.0 / norm);
    v(k, k + 1) = -kk / norm;
  }
  return v;
}

Eigen::MatrixXd overfit_mixing_matrix(const DataMatrix& data) {
  const auto n = static_cast<Eigen::Index>(data.samples());
  const auto d = static_cast<Eigen::Index>(data.dim());
  const Eigen::RowVectorXd mean = data.x().colwise().mean();
  const Eigen::MatrixXd xc = data.x().rowwise() - mean;

  // Rows of V xc via running sums, avoiding the dense (n-1) x n product.
  Eigen::MatrixXd vx(n - 1, d);
  Eigen::RowVectorXd running = Eigen::RowVectorXd::Zero(d);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    running += xc.row(k);
    const double kk = static_cast<double>(k + 1);
    vx.row(k) = (running - kk * xc.row(k + 1)) / std::sqrt(kk * (kk + 1.0));
  }
  return vx.transpose() / std::sqrt(static_cast<double>(n));
}

}  // namespace confound
