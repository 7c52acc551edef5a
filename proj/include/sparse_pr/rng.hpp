#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace spr {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-trial stream seed H(master, axis_index, trial_index).
///
/// H = mix64(mix64(mix64(master) ^ axis_index) ^ trial_index). Each trial owns
/// an independent generator seeded from H, so results do not depend on which
/// worker thread runs which trial or in what order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t axis_index,
                                    std::uint64_t trial_index) noexcept {
  return mix64(mix64(mix64(master) ^ axis_index) ^ trial_index);
}

/// Seeded generator used for every random draw in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform and normal variates are produced here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), rejection-sampled so there is no modulo bias.
  std::size_t below(std::size_t bound);

  /// Standard normal via the Box-Muller transform; values are produced in pairs.
  double normal();

  /// +1 or -1 with equal probability.
  double sign() { return (engine_() >> 63) != 0 ? -1.0 : 1.0; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spr
