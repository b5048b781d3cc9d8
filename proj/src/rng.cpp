#include "frmc/rng.hpp"

#include <cmath>
#include <numbers>

namespace frmc {

RandomStream::RandomStream(std::uint64_t seed, StreamRole role, std::uint64_t index) noexcept
    : index_(index) {
  const std::uint64_t k = mix64(seed ^ mix64(static_cast<std::uint64_t>(role)));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void RandomStream::refill() noexcept {
  const PhiloxBlock ctr = {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                           static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
  const PhiloxBlock out = philox4x32_10(ctr, key_);
  words_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  words_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  words_left_ = 2;
  ++block_;
}

std::uint64_t RandomStream::next_u64() noexcept {
  if (words_left_ == 0) refill();
  return words_[2 - words_left_--];
}

double RandomStream::uniform() noexcept {
  constexpr double kScale = 0x1.0p-53;
  return (static_cast<double>(next_u64() >> 11) + 0.5) * kScale;
}

double RandomStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace frmc
