#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "confound/cdtest.hpp"
#include "confound/estimator.hpp"
#include "confound/genmodel.hpp"
#include "confound/rng.hpp"
#include "confound/spectral.hpp"

namespace {

confound::CovarianceModel spread_spectrum(Eigen::Index d, confound::Rng& rng) {
  Eigen::VectorXd lambda(d);
  for (Eigen::Index j = 0; j < d; ++j) lambda[j] = std::pow(10.0, rng.uniform(-2.0, 2.0));
  return confound::CovarianceModel::diagonal(lambda, Eigen::VectorXd::Ones(d));
}

void BM_EstimateTheta(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  confound::Rng rng(11);
  const auto cov = spread_spectrum(d, rng);
  const auto dir = confound::sample_direction(confound::ThetaScale(1.0), cov, rng);
  for (auto _ : state) benchmark::DoNotOptimize(confound::estimate_theta(dir, cov));
}
BENCHMARK(BM_EstimateTheta)->Arg(10)->Arg(100)->Arg(1000);

void BM_EmpiricalCovariance(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  confound::Rng rng(3);
  const auto truth = confound::sample_ground_truth(d, d, rng);
  const auto ds = confound::generate_samples(truth, 10000, 0.0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(confound::empirical_covariance(ds.data));
}
BENCHMARK(BM_EmpiricalCovariance)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_NullSphere(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  confound::Rng rng(5);
  const auto cov = spread_spectrum(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(confound::null_samples_sphere(cov, 1000, rng));
}
BENCHMARK(BM_NullSphere)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_NullMixedChi2(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  confound::Rng rng(5);
  const auto cov = spread_spectrum(d, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(confound::null_samples_mixed_chi2(cov, 1000, rng));
}
BENCHMARK(BM_NullMixedChi2)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_EstimateConfounding(benchmark::State& state) {
  confound::Rng rng(8);
  const auto truth = confound::sample_ground_truth(10, 10, rng);
  const auto ds = confound::generate_samples(truth, 10000, 0.0, 9);
  for (auto _ : state) benchmark::DoNotOptimize(confound::estimate_confounding(ds.data));
}
BENCHMARK(BM_EstimateConfounding)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
