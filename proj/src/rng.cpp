#include "coralign/rng.hpp"

#include <cmath>
#include <numbers>

namespace coralign {

double Rng::normal() {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t threshold = (0ull - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v >= threshold) return v % n;
  }
}

}  // namespace coralign
