#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace coralign {

/// Deterministic pseudo-random stream. The engine is std::mt19937_64, whose
/// output sequence is fixed by the C++ standard, and every derived value
/// (uniform doubles, normals, bounded integers, shuffles) is computed here
/// with explicit transforms rather than the implementation-defined standard
/// distributions. Identical seed therefore means identical stream on every
/// platform and standard library.
///
/// Transforms:
///   uniform():  top 53 bits of the next word, scaled by 2^-53 -> [0, 1)
///   normal():   Box-Muller, cosine branch only (two words per draw)
///   below(n):   rejection sampling, unbiased
///   shuffle():  Fisher-Yates driven by below()
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Mixes a base seed with a stream id (splitmix64 finalizer) so that one
  /// configuration seed can feed several independent streams.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  /// Unbiased draw from {0, 1, ..., n-1}.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coralign
