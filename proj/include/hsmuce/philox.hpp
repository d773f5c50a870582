#ifndef HSMUCE_PHILOX_HPP_
#define HSMUCE_PHILOX_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace hsmuce {

// Philox-4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). Chosen so that simulation caches are keyed
// by (algorithm id, seed) alone: any two runs with the same seed produce the
// same stream, independent of thread count or platform word order.
inline constexpr std::string_view kRngId = "philox4x32-10";

struct PhiloxBlock {
  std::array<std::uint32_t, 4> word;
};

inline PhiloxBlock philox4x32(std::array<std::uint32_t, 4> ctr,
                              std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return PhiloxBlock{ctr};
}

// Independent substream of a master seed. The 64-bit stream id occupies the
// upper half of the counter, the block index the lower half, so streams never
// collide and any block is addressable in O(1).
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  PhiloxBlock block(std::uint64_t index) const {
    return philox4x32({static_cast<std::uint32_t>(index),
                       static_cast<std::uint32_t>(index >> 32),
                       static_cast<std::uint32_t>(stream_),
                       static_cast<std::uint32_t>(stream_ >> 32)},
                      key_);
  }

  std::uint64_t next_u64() {
    if (phase_ == 0) {
      cur_ = block(next_block_++);
      phase_ = 1;
      return static_cast<std::uint64_t>(cur_.word[0]) |
             (static_cast<std::uint64_t>(cur_.word[1]) << 32);
    }
    phase_ = 0;
    return static_cast<std::uint64_t>(cur_.word[2]) |
           (static_cast<std::uint64_t>(cur_.word[3]) << 32);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log() argument.
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_double_open();
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  void fill_normals(std::span<double> out) {
    for (double& value : out) value = next_normal();
  }

  // Student-t with 3 degrees of freedom, scaled to unit variance.
  double next_scaled_t3() {
    const double z = next_normal();
    const double w1 = next_normal();
    const double w2 = next_normal();
    const double w3 = next_normal();
    const double chi2 = w1 * w1 + w2 * w2 + w3 * w3;
    return z / std::sqrt(chi2 / 3.0) / std::sqrt(3.0);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t next_block_ = 0;
  PhiloxBlock cur_{};
  int phase_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stream-id namespace: keeps repetition streams of different subsystems apart.
namespace stream_id {
inline constexpr std::uint64_t simulation_rep(std::uint64_t rep) {
  return (0x01ull << 56) | rep;
}
inline constexpr std::uint64_t scenario_rep(std::uint64_t rep) {
  return (0x02ull << 56) | rep;
}
inline constexpr std::uint64_t noise_rep(std::uint64_t rep) {
  return (0x03ull << 56) | rep;
}
}  // namespace stream_id

}  // namespace hsmuce

#endif  // HSMUCE_PHILOX_HPP_
