#pragma once

#include <cstdint>

namespace agrisk {

/// SplitMix64 (Steele, Lea, Flood 2014). Used to expand seeds into stream
/// states; the output sequence is fixed by the algorithm on every platform.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman, Vigna 2018), seeded through SplitMix64.
/// Satisfies UniformRandomBitGenerator, but the library's distributions
/// below are hand-written so draws are bit-reproducible across standard
/// library implementations.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
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

  /// Uniform integer in [lo, hi], unbiased (Lemire's multiply-shift with rejection).
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform double in (0, 1].
  double uniform01_open_low() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }
  /// Uniform float in [0, 1) with 24 random bits; never rounds up to 1.
  float uniform01f() noexcept { return static_cast<float>((*this)() >> 40) * 0x1.0p-24f; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
  /// Standard normal via Box-Muller, one variate per call.
  double normal() noexcept;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4]{};
};

/// Derives an independent stream seed for unit `index` of a named domain
/// (e.g. trial 17 of the YET), so units can be generated in any order.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t domain,
                                                  std::uint64_t index) noexcept {
  SplitMix64 sm(seed ^ (domain * 0xd1b54a32d192ed03ULL));
  const std::uint64_t a = sm.next();
  SplitMix64 sm2(a ^ (index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
  return sm2.next();
}

}  // namespace agrisk
