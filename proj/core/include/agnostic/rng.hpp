#pragma once

#include <cstdint>
#include <random>

namespace agnostic {

/// Seeded generator passed by value. Only the raw mt19937_64 stream (which the
/// standard pins down exactly) is used; all derived variates are computed here
/// so that results are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via the Marsaglia polar method (no cached second variate).
  double normal();

  /// Student t with `dof` degrees of freedom (integer dof, sum-of-squares construction).
  double student_t(int dof);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 mix of (seed, stream); gives independent per-replicate seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace agnostic
