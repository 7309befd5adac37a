#pragma once

// Philox4x32-10 counter-based generator. A path's normal stream is keyed by
// (seed, path index) and addressed by draw index, so results do not depend
// on which thread runs the path.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace homog {

using Philox4x32Block = std::array<std::uint32_t, 4>;

inline Philox4x32Block philox4x32_10(Philox4x32Block ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Standard normals for one path, two per Philox block via Box-Muller.
class NormalStream {
 public:
  /// `stream` separates independent uses of the same path (0 = increments,
  /// 1 = initial condition).
  NormalStream(std::uint64_t seed, std::uint64_t path, std::uint32_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_((static_cast<std::uint32_t>(path >> 32) & 0x0FFFFFFFu) | (stream << 28)) {}

  double normal() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto [u1, u2] = uniform_pair();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Two uniforms, the first in (0, 1] and the second in [0, 1).
  std::array<double, 2> uniform_pair() noexcept {
    const Philox4x32Block out = philox4x32_10(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), path_lo_, path_hi_}, key_);
    ++block_;
    const std::uint64_t a = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    const std::uint64_t b = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    constexpr double scale = 0x1.0p-53;
    return {static_cast<double>((a >> 11) + 1) * scale, static_cast<double>(b >> 11) * scale};
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace homog
