#pragma once

// Reproducible random streams. The generator algorithm is part of the
// external contract: drafts produced for a given seed must be identical
// across builds and platforms, so nothing here may defer to <random>.
//
//   seeding     state[i] = splitmix64 outputs 1..4 starting from the seed
//   generator   xoshiro256** (Blackman & Vigna, 2018)
//   streams     stream n of base seed s is seeded with mix64(s + n * gamma)
//   bounded     uniform_below(n) draws ceil(b/64) words, b = bit length of
//               n - 1, least significant word first, masks the top word to
//               b bits and rejects values >= n

#include <array>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace examforge {

using BigCount = boost::multiprecision::cpp_int;

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}
  constexpr std::uint64_t next() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// Seed of the n-th independent stream derived from `base`. Distinct n give
// distinct seeds because mix64 is a bijection.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base + stream * kGoldenGamma);
}

class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n);
  BigCount uniform_below(const BigCount& n);

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace examforge
