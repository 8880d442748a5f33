#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bagoft {

/// Deterministic random stream: xoshiro256** seeded through splitmix64.
///
/// The algorithm is frozen so that every draw sequence is identical across
/// platforms and compilers. Child streams are derived from (seed, label), so a
/// replication or split can be regenerated in isolation without replaying its
/// siblings. A RandomSource is single-owner; give each thread its own child.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream keyed by an integer label (e.g. replication index).
  RandomSource child(std::uint64_t label) const;
  /// Independent stream keyed by a string label (e.g. setting name).
  RandomSource child(std::string_view label) const;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound); unbiased (rejection sampling).
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;

  /// Standard Gaussian via inverse CDF of uniform_open().
  double gaussian() noexcept;
  double gaussian(double mean, double sd) noexcept { return mean + sd * gaussian(); }
  /// Chi-squared with integer df, as a sum of df squared standard Gaussians.
  double chi_squared(unsigned df) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n) noexcept;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

/// splitmix64 finalizer; exposed for hashing labels and configs.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace bagoft
