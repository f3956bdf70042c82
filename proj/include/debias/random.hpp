#pragma once

#include <cstdint>
#include <random>

namespace debias {

/// Random stream owned by a single replicate.
using Stream = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Stream for replicate `index` under master seed `seed`.
///
/// The engine seed is splitmix64(splitmix64(seed) ^ splitmix64(index + golden)),
/// a bijective mix of each input, so distinct (seed, index) pairs land on
/// unrelated Mersenne Twister states. Serial and parallel runs draw replicate
/// i from the same stream.
inline Stream replicate_stream(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t mixed =
      detail::splitmix64(detail::splitmix64(seed) ^
                         detail::splitmix64(index + 0x632be59bd9b4e019ULL));
  return Stream(mixed);
}

/// Uniform draw on (0, 1].
inline double uniform_open_closed(Stream& stream) {
  return 1.0 - std::generate_canonical<double, 53>(stream);
}

/// Uniform draw on [0, 1).
inline double uniform01(Stream& stream) {
  return std::generate_canonical<double, 53>(stream);
}

}  // namespace debias
