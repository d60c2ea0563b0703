#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace transa {

// All randomized operations draw from std::mt19937_64 through the helpers
// below. The mappings are fixed by hand (no std:: distributions) so that a
// seed fully determines every sample sequence across standard libraries.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// One engine draw reduced modulo n. n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return rng() % n;
}

// In-place Fisher-Yates, one uniform_index draw per position from the back.
template <typename T>
void shuffle_in_place(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace transa
