#pragma once

// Synthetic linear models with a known amount of hidden confounding.
//
// Sources Z (l of them, unit variance, uncorrelated) drive the predictors
// through a mixing matrix and the target through a confounding vector:
//
//   X = M Z,     Y = a^T X + c^T Z + E.
//
// Regressing Y on X recovers a' = a + M^{-T} c instead of the causal a.

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "confound/rng.hpp"
#include "confound/spectral.hpp"

namespace confound {

// Singular values below this fraction of the largest are dropped when
// forming the pseudo-inverse of the mixing matrix.
inline constexpr double kPseudoInverseCutoff = 1e-12;

class GroundTruth {
 public:
  // m is d x l with l >= d and full row rank; a has length d, c length l.
  GroundTruth(Eigen::MatrixXd m, Eigen::VectorXd a, Eigen::VectorXd c, double sigma_a,
              double sigma_c);

  const Eigen::MatrixXd& m() const noexcept { return m_; }
  const Eigen::VectorXd& a() const noexcept { return a_; }
  const Eigen::VectorXd& c() const noexcept { return c_; }
  double sigma_a() const noexcept { return sigma_a_; }
  double sigma_c() const noexcept { return sigma_c_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  std::size_t latent_dim() const noexcept { return static_cast<std::size_t>(m_.cols()); }

  // M^{-T}: transpose of the pseudo-inverse, d x l.
  const Eigen::MatrixXd& pinv_transpose() const noexcept { return pinv_t_; }
  Eigen::VectorXd confounding_term() const { return pinv_t_ * c_; }
  // a' = a + M^{-T} c.
  Eigen::VectorXd regression_vector() const { return a_ + confounding_term(); }
  // Population moments: Sigma_XX = M M^T, Sigma_XY = M M^T a + M c.
  CovarianceModel population_covariance() const;

 private:
  Eigen::MatrixXd m_;
  Eigen::VectorXd a_;
  Eigen::VectorXd c_;
  double sigma_a_;
  double sigma_c_;
  Eigen::MatrixXd pinv_t_;
};

struct SyntheticDataset {
  DataMatrix data;
  GroundTruth truth;
  // Structural confounding strength; 0 when the model has no confounder.
  double true_beta;
  std::uint64_t seed;
};

// Random model: M_ij ~ N(0,1), sigma_a, sigma_c ~ U[0,1],
// a_j ~ N(0, sigma_a^2), c_k ~ N(0, sigma_c^2).
GroundTruth sample_ground_truth(std::size_t d, std::size_t latent, Rng& rng);

// Draws n samples from the structural equations with E ~ N(0, noise_sd^2).
// The output depends only on (truth, n, noise_sd, seed).
SyntheticDataset generate_samples(const GroundTruth& truth, std::size_t n, double noise_sd,
                                  std::uint64_t seed);

// ||M^{-T} c||^2 / (||a||^2 + ||M^{-T} c||^2).
double true_beta(const GroundTruth& truth);

// Fresh a, c with the model's scales; returns a + M^{-T} c.
Eigen::VectorXd sample_aprime_def1(const GroundTruth& truth, Rng& rng);

// sqrt(sigma_a^2 I + sigma_c^2 Sigma_XX^{-1}) b with b standard Gaussian.
Eigen::VectorXd sample_aprime_def2(const CovarianceModel& cov, double sigma_a, double sigma_c,
                                   Rng& rng);

// X from a random square mixing of Gaussian sources, Y ~ N(0,1) independent
// of X. Requires n > d + 1.
SyntheticDataset overfit_dataset(std::size_t d, std::size_t n, std::uint64_t seed);

// Unconfounded X -> Y: random square mixing, a_j ~ N(0,1), c = 0, and
// Y = a^T X + E with E ~ N(0, noise_sd^2).
SyntheticDataset causal_dataset(std::size_t d, std::size_t n, double noise_sd,
                                std::uint64_t seed);

// (n-1) x n matrix with orthonormal rows spanning the complement of (1,...,1).
Eigen::MatrixXd helmert_basis(std::size_t n);

// The d x (n-1) mixing matrix under which least squares on `data` is a
// pure-confounding model with l = n - 1: (V xc)^T / sqrt(n), where xc is the
// centered predictor matrix and V = helmert_basis(n). Its Gram matrix equals
// the empirical Sigma_XX.
Eigen::MatrixXd overfit_mixing_matrix(const DataMatrix& data);

}  // namespace confound
