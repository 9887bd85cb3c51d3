#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace oica {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/**
 * Seeded deterministic random stream (xoshiro256++ state, SplitMix64 seeding).
 *
 * fork(id) derives a child stream from the seed alone, so the substream a
 * trial or worker receives does not depend on how many values the parent has
 * already produced. Satisfies UniformRandomBitGenerator, so it can drive
 * standard and Boost distributions directly.
 *
 * A single stream is not thread-safe; give each worker its own fork.
 */
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) noexcept : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    auto& s = state_;
    const std::uint64_t result = detail::rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = detail::rotl(s[3], 45);
    return result;
  }

  [[nodiscard]] RandomStream fork(std::uint64_t id) const noexcept {
    std::uint64_t a = seed_;
    std::uint64_t b = id ^ 0x5851f42d4c957f2dULL;
    const std::uint64_t child = detail::splitmix64(a) ^ detail::rotl(detail::splitmix64(b), 17);
    return RandomStream(child);
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(operator()() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  double rademacher() noexcept { return (operator()() >> 63) != 0 ? 1.0 : -1.0; }

  double normal() { return normal_(*this); }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  boost::random::normal_distribution<double> normal_;
};

}  // namespace oica
