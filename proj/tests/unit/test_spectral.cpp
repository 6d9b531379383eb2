#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "confound/error.hpp"
#include "confound/rng.hpp"
#include "confound/spectral.hpp"
#include "test_support.hpp"

using namespace confound;
using confound::testing::random_orthogonal;
using confound::testing::rel_err;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no confound::Error thrown";
  return ErrorCode::InvalidArgument;
}

DataMatrix gaussian_data(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd mix = rng.normal_matrix(d, d);
  Eigen::MatrixXd x = rng.normal_matrix(n, d) * mix.transpose();
  Eigen::VectorXd y = x * rng.normal_vector(d) + rng.normal_vector(n);
  return DataMatrix(x, y);
}

}  // namespace

TEST(DataMatrix, RejectsNonFinite) {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, std::nan("");
  EXPECT_EQ(code_of([&] { DataMatrix(x, Eigen::VectorXd::Zero(2)); }), ErrorCode::InvalidArgument);
}

TEST(DataMatrix, RejectsSizeMismatch) {
  EXPECT_THROW(DataMatrix(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2)), Error);
}

TEST(DataMatrix, RejectsSingleSample) {
  EXPECT_THROW(DataMatrix(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1)), Error);
}

TEST(EmpiricalCovariance, TwoCenteredPoints) {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, -1.0;
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  const auto cov = empirical_covariance(DataMatrix(x, y));
  EXPECT_DOUBLE_EQ(cov.sigma_xx()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(cov.sigma_xy()[0], 1.0);
  EXPECT_EQ(cov.sample_count(), 2u);
}

TEST(EmpiricalCovariance, LawOfLargeNumbers) {
  Rng rng(2024);
  const Eigen::MatrixXd x = rng.normal_matrix(100000, 3);
  const auto cov = empirical_covariance(DataMatrix(x, rng.normal_vector(100000)));
  EXPECT_LT((cov.sigma_xx() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(EmpiricalCovariance, TooFewSamples) {
  Rng rng(1);
  const DataMatrix data(rng.normal_matrix(5, 10), rng.normal_vector(5));
  EXPECT_EQ(code_of([&] { empirical_covariance(data); }), ErrorCode::TooFewSamples);
}

TEST(EmpiricalCovariance, RankDeficient) {
  Rng rng(1);
  Eigen::MatrixXd x = rng.normal_matrix(50, 3);
  x.col(2) = x.col(0) + x.col(1);
  EXPECT_EQ(code_of([&] { empirical_covariance(DataMatrix(x, rng.normal_vector(50))); }),
            ErrorCode::RankDeficient);
}

TEST(EmpiricalCovariance, MatchesDirectFormula) {
  const auto data = gaussian_data(300, 4, 5);
  const Eigen::MatrixXd xc = data.x().rowwise() - data.x().colwise().mean();
  const Eigen::VectorXd yc = data.y().array() - data.y().mean();
  const auto cov = empirical_covariance(data);
  EXPECT_LT(rel_err(cov.sigma_xx(), xc.transpose() * xc / 300.0), 1e-12);
  EXPECT_LT(rel_err(cov.sigma_xy(), xc.transpose() * yc / 300.0), 1e-12);
}

TEST(CovarianceModel, ReconstructionProperty) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 2 + trial % 30;
    const Eigen::MatrixXd b = rng.normal_matrix(d, d);
    const Eigen::MatrixXd s = b * b.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
    const auto cov = CovarianceModel::from_matrices(s, rng.normal_vector(d));
    const auto& v = cov.eigenvectors();
    const Eigen::MatrixXd rebuilt = v * cov.eigenvalues().asDiagonal() * v.transpose();
    EXPECT_LE(rel_err(rebuilt, s), 1e-10);
    for (Eigen::Index j = 1; j < d; ++j) EXPECT_GE(cov.eigenvalues()[j - 1], cov.eigenvalues()[j]);
    EXPECT_GT(cov.eigenvalues().minCoeff(), 0.0);
    EXPECT_LE((cov.sigma_xx() - cov.sigma_xx().transpose()).norm(), 1e-12 * s.norm());
  }
}

TEST(CovarianceModel, SymmetrizesInput) {
  Eigen::MatrixXd s(2, 2);
  s << 2.0, 0.5 + 1e-14, 0.5, 1.0;
  const auto cov = CovarianceModel::from_matrices(s, Eigen::VectorXd::Ones(2));
  EXPECT_EQ(cov.sigma_xx()(0, 1), cov.sigma_xx()(1, 0));
}

TEST(CovarianceModel, DiagonalSortsSpectrum) {
  Eigen::VectorXd var(3);
  var << 1.0, 9.0, 4.0;
  const auto cov = CovarianceModel::diagonal(var, Eigen::VectorXd::Ones(3));
  EXPECT_DOUBLE_EQ(cov.eigenvalues()[0], 9.0);
  EXPECT_DOUBLE_EQ(cov.eigenvalues()[2], 1.0);
  EXPECT_DOUBLE_EQ(std::abs(cov.eigenvectors()(1, 0)), 1.0);
  EXPECT_DOUBLE_EQ(cov.median_eigenvalue(), 4.0);
}

TEST(CovarianceModel, RejectsSingular) {
  Eigen::VectorXd var(2);
  var << 1.0, 0.0;
  EXPECT_EQ(code_of([&] { CovarianceModel::diagonal(var, Eigen::VectorXd::Ones(2)); }),
            ErrorCode::RankDeficient);
}

TEST(RegressionVector, IdentityCovariance) {
  Eigen::VectorXd sxy(2);
  sxy << 3.0, 4.0;
  const auto a = regression_vector(CovarianceModel::diagonal(Eigen::VectorXd::Ones(2), sxy));
  EXPECT_NEAR(a[0], 3.0, 1e-15);
  EXPECT_NEAR(a[1], 4.0, 1e-15);
}

TEST(RegressionVector, DiagonalInverse) {
  Eigen::VectorXd var(2);
  var << 1.0, 4.0;
  const auto a = regression_vector(CovarianceModel::diagonal(var, Eigen::VectorXd::Ones(2)));
  EXPECT_NEAR(a[0], 1.0, 1e-15);
  EXPECT_NEAR(a[1], 0.25, 1e-15);
}

TEST(RegressionVector, ZeroSignal) {
  const auto cov = CovarianceModel::diagonal(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Zero(3));
  EXPECT_EQ(code_of([&] { regression_vector(cov); }), ErrorCode::ZeroSignal);
}

TEST(RegressionVector, AgreesWithLeastSquares) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::Index d = 3 + static_cast<Eigen::Index>(seed);
    const auto data = gaussian_data(20 * d, d, seed);
    const Eigen::MatrixXd xc = data.x().rowwise() - data.x().colwise().mean();
    const Eigen::VectorXd yc = data.y().array() - data.y().mean();
    const Eigen::VectorXd oracle = xc.colPivHouseholderQr().solve(yc);
    const Eigen::VectorXd a = regression_vector(empirical_covariance(data));
    EXPECT_LE((a - oracle).norm() / oracle.norm(), 1e-8);
  }
}

TEST(RegressionVector, RotationEquivariance) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = gaussian_data(200, 5, 100 + trial);
    const Eigen::MatrixXd u = random_orthogonal(5, rng);
    const auto cov = empirical_covariance(data);
    const auto rot = empirical_covariance(DataMatrix(data.x() * u.transpose(), data.y()));
    EXPECT_LE(rel_err(rot.sigma_xx(), u * cov.sigma_xx() * u.transpose()), 1e-10);
    EXPECT_LE(rel_err(regression_vector(rot), u * regression_vector(cov)), 1e-10);
  }
}

TEST(RegressionVector, ScaleCovariance) {
  const auto data = gaussian_data(200, 4, 3);
  const double c = 3.7;
  const auto cov = empirical_covariance(data);
  const auto scaled = empirical_covariance(DataMatrix(c * data.x(), data.y()));
  EXPECT_LE(rel_err(scaled.sigma_xx(), c * c * cov.sigma_xx()), 1e-10);
  EXPECT_LE(rel_err(scaled.sigma_xy(), c * cov.sigma_xy()), 1e-10);
  EXPECT_LE(rel_err(regression_vector(scaled), regression_vector(cov) / c), 1e-10);
}

TEST(UnitDirection, Normalizes) {
  Eigen::VectorXd v(2);
  v << 3.0, 4.0;
  const auto dir = UnitDirection::from_vector(v);
  EXPECT_NEAR(dir.v()[0], 0.6, 1e-15);
  EXPECT_NEAR(dir.v()[1], 0.8, 1e-15);
  EXPECT_LE(std::abs(dir.v().norm() - 1.0), 1e-12);
}

TEST(UnitDirection, ZeroInput) {
  EXPECT_EQ(code_of([] { UnitDirection::from_vector(Eigen::VectorXd::Zero(2)); }),
            ErrorCode::ZeroSignal);
  const auto cov = CovarianceModel::diagonal(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2));
  EXPECT_EQ(code_of([&] { unit_direction(Eigen::VectorXd::Zero(2), cov); }), ErrorCode::ZeroSignal);
}

TEST(UnitDirection, CachesEigenbasisCoordinates) {
  Eigen::MatrixXd swap13 = Eigen::MatrixXd::Zero(3, 3);
  swap13(0, 2) = swap13(1, 1) = swap13(2, 0) = 1.0;
  Eigen::VectorXd lambda(3);
  lambda << 3.0, 2.0, 1.0;
  const auto cov = CovarianceModel::from_spectrum(lambda, swap13, Eigen::VectorXd::Ones(3));
  Eigen::VectorXd v(3);
  v << 5.0, 0.0, 0.0;
  const auto dir = unit_direction(v, cov);
  ASSERT_TRUE(dir.basis_coords().has_value());
  EXPECT_NEAR((*dir.basis_coords())[0], 0.0, 1e-15);
  EXPECT_NEAR((*dir.basis_coords())[1], 0.0, 1e-15);
  EXPECT_NEAR((*dir.basis_coords())[2], 1.0, 1e-15);
}

TEST(RenormalizedTrace, Examples) {
  Eigen::VectorXd var(2);
  var << 1.0, 4.0;
  const auto cov = CovarianceModel::diagonal(var, Eigen::VectorXd::Ones(2));
  EXPECT_DOUBLE_EQ(renormalized_trace([](double l) { return l; }, cov), 2.5);
  EXPECT_DOUBLE_EQ(renormalized_trace([](double l) { return 1.0 / l; }, cov), 0.625);
  EXPECT_DOUBLE_EQ(renormalized_trace([](double) { return 1.0; }, cov), 1.0);
  EXPECT_DOUBLE_EQ(tau_inverse(cov), 0.625);
}

TEST(RenormalizedTrace, NonFiniteIsOverflow) {
  const auto cov = CovarianceModel::diagonal(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2));
  EXPECT_EQ(code_of([&] { renormalized_trace([](double) { return HUGE_VAL; }, cov); }),
            ErrorCode::NumericOverflow);
}
