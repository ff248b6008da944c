#pragma once

// Counter-based random numbers.
//
// All randomness in specklab comes from Philox4x32-10 (Salmon et al., SC'11):
// output block = philox(counter[4], key[2]) with key = (seed_lo, seed_hi).
// Because each block is a pure function of (seed, counter), generated data is
// independent of thread count and generation order, and identical on every
// platform with IEEE-754 doubles.
//
// Conversions:
//   uniform  u = ((w0 << 32 | w1) >> 11) * 2^-53, in [0, 1)
//   normal   Box-Muller on (1 - u1, u2) -> two independent N(0, 1)
//   child seed  derive_seed(base, i) = splitmix64(base ^ splitmix64(i + golden))

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace specklab::rng {

using Block = std::array<std::uint32_t, 4>;

inline Block philox4x32_10(Block ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of the index-th child of `base`. Stable across releases; manifests depend on it.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x9E3779B97F4A7C15ull));
}

inline double to_unit_double(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Random access into the stream (seed, stream_id): element `index` gets its own block.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint32_t stream_id = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream_id) {}

  Block block(std::uint64_t index) const {
    return philox4x32_10({static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32), stream_, 0u},
                         key_);
  }

  /// Two uniforms in [0, 1) for element `index`.
  std::pair<double, double> uniform2(std::uint64_t index) const {
    const Block b = block(index);
    return {to_unit_double(b[0], b[1]), to_unit_double(b[2], b[3])};
  }

  /// Two independent standard normals for element `index` (Box-Muller).
  std::pair<double, double> normal2(std::uint64_t index) const {
    const auto [u1, u2] = uniform2(index);
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
};

/// Sequential draws over a CounterRng, for code that consumes a variable
/// number of variates (glyph synthesis, object placement).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint32_t stream_id = 0) : rng_(seed, stream_id) {}

  double uniform() {
    if (cursor_ == 2) refill();
    return buffered_[cursor_++];
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  /// Uniform integer in [lo, hi] inclusive.
  long between(long lo, long hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  void refill() {
    const auto [a, b] = rng_.uniform2(counter_++);
    buffered_ = {a, b};
    cursor_ = 0;
  }

  CounterRng rng_;
  std::uint64_t counter_ = 0;
  std::array<double, 2> buffered_{};
  int cursor_ = 2;
};

}  // namespace specklab::rng
