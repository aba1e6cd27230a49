#pragma once

#include <cstdint>
#include <vector>

namespace hadaq {

/// Deterministic counter-based random stream.
///
/// The k-th raw output is mix64(seed + (k+1) * 0x9E3779B97F4A7C15), where
/// mix64 is the SplitMix64 finalizer. Every draw is a pure function of
/// (seed, counter), so streams can be replayed, split and compared across
/// implementations. Gaussians come from Box-Muller:
///   u1 in (0,1]  from ((bits >> 11) + 1) * 2^-53,
///   u2 in [0,1)  from  (bits >> 11)      * 2^-53,
///   z1 = sqrt(-2 ln u1) cos(2 pi u2),  z2 = sqrt(-2 ln u1) sin(2 pi u2),
/// with the pair consumed in order (z1 first).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent substream: stream index folded into the seed.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix64(seed ^ mix64(stream + 0x6A09E667F3BCC909ULL)));
  }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform double in (0, 1].
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; draws are consumed in pairs.
  double normal();

  /// Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle of index order i = n-1 .. 1, j = below(i+1).
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hadaq
