#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace sigmafloor {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key of the substream for (master seed, trial index, lane).
///
/// Every Monte Carlo trial owns the stream keyed by its index, so results do
/// not depend on how trials are partitioned across workers. Lanes separate
/// independent draws inside one trial (e.g. a vector and a matrix).
constexpr std::uint64_t substream_key(std::uint64_t master, std::uint64_t index,
                                      std::uint64_t lane = 0) noexcept {
  return mix64(mix64(master) + index * 0x9E3779B97F4A7C15ULL +
               mix64(lane ^ 0xD1B54A32D192ED03ULL));
}

/// xoshiro256** generator with platform-independent real-valued draws.
///
/// The standard library distributions are implementation defined, so normal
/// and uniform variates are produced here to keep outputs bit-identical
/// across toolchains.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) noexcept;

  static Stream substream(std::uint64_t master, std::uint64_t index,
                          std::uint64_t lane = 0) noexcept {
    return Stream(substream_key(master, index, lane));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  /// Standard normal (Marsaglia polar method).
  double normal() noexcept;
  /// Fair sign, +1 or -1.
  double sign() noexcept;

 private:
  std::array<std::uint64_t, 4> state_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sigmafloor
