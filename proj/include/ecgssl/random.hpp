#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <numbers>
#include <utility>

namespace ecgssl {

// Counter-based SplitMix64 stream.
//
// Draw i of a stream with key k is mix64(k + i * 0x9E3779B97F4A7C15), i = 1, 2, ...
// so a stream is fully described by its key and the number of draws taken.
// split(s) derives an independent child key as mix64(k ^ mix64(s + 0x632BE59BD9B4E019)),
// which lets callers address a stream by a path such as (seed, segment, transform)
// without caring in which order the streams are consumed.
//
// Uniform doubles take the top 53 bits; normals use Box-Muller (one draw per pair of
// uniforms); bounded integers use rejection on the 64-bit draw. Nothing here depends
// on the standard library's distribution objects, so sequences match across platforms
// up to the libm used for log/cos.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed ^ kSeedSalt)) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  [[nodiscard]] constexpr CounterRng split(std::uint64_t stream) const noexcept {
    CounterRng child{};
    child.key_ = mix64(key_ ^ mix64(stream + kSplitSalt));
    return child;
  }

  [[nodiscard]] constexpr CounterRng split(std::initializer_list<std::uint64_t> path) const noexcept {
    CounterRng out = *this;
    for (auto s : path) out = out.split(s);
    return out;
  }

  constexpr std::uint64_t next_u64() noexcept { return mix64(key_ + kGolden * ++counter_); }

  // Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  template <std::random_access_iterator It>
  void shuffle(It first, It last) noexcept {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t draws() const noexcept { return counter_; }

 private:
  constexpr CounterRng() noexcept = default;

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kSeedSalt = 0xD1B54A32D192ED03ULL;
  static constexpr std::uint64_t kSplitSalt = 0x632BE59BD9B4E019ULL;

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace ecgssl
