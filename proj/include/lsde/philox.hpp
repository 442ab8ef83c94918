#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace lsde {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
using PhiloxCounter = std::array<std::uint32_t, 4>;

struct PhiloxKey {
  std::uint32_t k0 = 0;
  std::uint32_t k1 = 0;

  static constexpr PhiloxKey from_u64(std::uint64_t k) {
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }
  constexpr std::uint64_t to_u64() const {
    return static_cast<std::uint64_t>(k0) | (static_cast<std::uint64_t>(k1) << 32);
  }
};

namespace philox_detail {
inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr PhiloxCounter round(const PhiloxCounter& c, const PhiloxKey& k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k.k0, static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k.k1, static_cast<std::uint32_t>(p0)};
}
}  // namespace philox_detail

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key.k0 += philox_detail::kWeyl0;
      key.k1 += philox_detail::kWeyl1;
    }
    ctr = philox_detail::round(ctr, key);
  }
  return ctr;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform in (0, 1) from 52 random bits: (m + 1/2) 2^-52. Exactly
// representable, never 0 or 1; shared bit-for-bit by every kernel variant.
constexpr double uniform_from_words(std::uint32_t lo, std::uint32_t hi) {
  const std::uint64_t m = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(m) + 0.5) * 0x1p-52;
}

// Counter layout used for all noise:
//   word 0: time step
//   word 1: channel (low 8 bits) | draw index (high 24 bits)
//   words 2,3: site code (low, high)
struct NoiseAddress {
  std::uint32_t step = 0;
  std::uint32_t channel = 0;
  std::uint64_t site_code = 0;

  constexpr PhiloxCounter counter(std::uint32_t draw) const {
    return {step, (channel & 0xFFu) | (draw << 8), static_cast<std::uint32_t>(site_code),
            static_cast<std::uint32_t>(site_code >> 32)};
  }
};

// UniformRandomBitGenerator over the draws >= 1 of one noise address. Draw 0
// is reserved for the address's Gaussian increment.
class PhiloxStream {
 public:
  using result_type = std::uint32_t;

  PhiloxStream(PhiloxKey key, NoiseAddress addr) : key_(key), addr_(addr) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) {
      block_ = philox4x32_10(addr_.counter(++draw_), key_);
      pos_ = 0;
    }
    return block_[pos_++];
  }

  double uniform() {
    const std::uint32_t lo = (*this)();
    const std::uint32_t hi = (*this)();
    return uniform_from_words(lo, hi);
  }

 private:
  PhiloxKey key_;
  NoiseAddress addr_;
  std::uint32_t draw_ = 0;
  PhiloxCounter block_{};
  int pos_ = 4;
};

}  // namespace lsde
