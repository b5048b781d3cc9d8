#pragma once

// Counter-based random streams.
//
// Every trajectory owns a Philox4x32-10 stream addressed by
// (master seed, role, trajectory index). The key is a mix of seed and role,
// the upper half of the 128-bit counter is the trajectory index and the lower
// half counts blocks. Draws therefore depend only on that triple, never on
// which thread simulated the trajectory or in which order.

#include <array>
#include <cstdint>

namespace frmc {

/// splitmix64 finalizer; the single mix function used for every seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed number `index` of `master` (used for replications and sub-runs).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index));
}

enum class StreamRole : std::uint64_t {
  forward = 0x66776400,  // "fwd"
  reverse = 0x72657600,  // "rev"
  bench = 0x62656e63,
};

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32 block with 10 rounds.
constexpr PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Sequential view over one counter-based stream. Cheap to construct; not shared across threads.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamRole role, std::uint64_t index) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal via Box-Muller; values are produced in pairs.
  double normal() noexcept;

 private:
  void refill() noexcept;

  PhiloxKey key_{};
  std::uint64_t index_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> words_{};
  int words_left_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace frmc
