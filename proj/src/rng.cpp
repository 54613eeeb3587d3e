#include "examforge/rng.hpp"

#include <bit>

#include "examforge/error.hpp"

namespace examforge {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  SplitMix64 sm(seed);
  for (auto& word : s_) word = sm.next();
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Xoshiro256::uniform_below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "uniform_below(0)");
  const std::uint64_t max = n - 1;
  if (max == 0) return 0;
  const int bits = std::bit_width(max);
  const std::uint64_t mask = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
  for (;;) {
    const std::uint64_t x = next() & mask;
    if (x < n) return x;
  }
}

BigCount Xoshiro256::uniform_below(const BigCount& n) {
  if (n <= 0) throw Error(ErrorCode::kInvalidArgument, "uniform_below on non-positive bound");
  if (n <= BigCount(std::numeric_limits<std::uint64_t>::max())) {
    return BigCount(uniform_below(static_cast<std::uint64_t>(n)));
  }
  const BigCount max = n - 1;
  const unsigned bits = boost::multiprecision::msb(max) + 1;
  const unsigned words = (bits + 63) / 64;
  const unsigned top_bits = bits - 64 * (words - 1);
  const std::uint64_t top_mask =
      top_bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << top_bits) - 1;
  for (;;) {
    BigCount x = 0;
    for (unsigned w = 0; w < words; ++w) {
      std::uint64_t word = next();
      if (w + 1 == words) word &= top_mask;
      x |= BigCount(word) << (64 * w);
    }
    if (x < n) return x;
  }
}

}  // namespace examforge
