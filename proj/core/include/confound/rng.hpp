#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Core>

namespace confound {

// Seedable generator used by every stochastic routine in the library.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Uniform and Gaussian variates are produced by explicit transforms
// (53-bit mantissa fill, Box-Muller) instead of the <random> distributions,
// whose algorithms are implementation-defined. Same seed, same stream, on
// every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  Eigen::VectorXd normal_vector(Eigen::Index size);
  // Entries filled column by column.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// SplitMix64 finalizer applied to (seed, stream); gives statistically
// independent child seeds for per-run and per-stage generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace confound
