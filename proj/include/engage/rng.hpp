#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace engage {

//! splitmix64 finalizer: a bijective 64-bit mix used to derive independent
//! stream seeds from a base seed plus a stream tag.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Fisher-Yates with draws taken directly from the engine.  std::shuffle
//! leaves the draw sequence implementation-defined; this keeps shuffles
//! identical across standard libraries so seeded artifacts are portable.
template <typename T, typename Rng>
void portable_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[static_cast<std::size_t>(rng() % i)]);
}

//! Uniform double in [0, 1) using the top 53 engine bits.
template <typename Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

//! Standard normal via Box-Muller; like portable_shuffle this avoids the
//! implementation-defined draw sequence of std::normal_distribution.
template <typename Rng>
double gaussian(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace engage
