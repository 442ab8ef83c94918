#pragma once

#include <cstdint>

#include "lsde/lattice.hpp"
#include "lsde/philox.hpp"

namespace lsde {

// Independent noise families sharing one replica key.
enum class NoiseChannel : std::uint32_t { primary = 0, partner = 1, scalar = 2 };

std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica);

// Injective packing of a site into 64 bits: 32 bits per coordinate for d <= 2,
// floor(64/d) bits otherwise, offset-binary.
std::uint64_t site_code(const Site& x);
int site_code_bits(int dim);
// Code difference between x and x + e_{d-1}.
std::uint64_t site_code_last_stride(int dim);

// Counter-based noise: every draw is a pure function of
// (seed, replica, site, step, channel).
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t replica, bool zero = false);
  static NoiseStream silent() { return NoiseStream(0, 0, true); }

  std::uint64_t key() const noexcept { return key_; }
  bool zero() const noexcept { return zero_; }

  // Standard normal; 0 for a silent stream.
  double gaussian(const Site& x, std::uint32_t step, NoiseChannel ch) const;
  double gaussian_code(std::uint64_t code, std::uint32_t step, NoiseChannel ch) const;
  // Brownian increment over dt.
  double increment(const Site& x, std::uint32_t step, NoiseChannel ch, double dt) const;

  // Further draws at the same address, independent of the Gaussian.
  PhiloxStream stream_code(std::uint64_t code, std::uint32_t step, NoiseChannel ch) const;

 private:
  std::uint64_t key_;
  bool zero_;
};

// Exact law at time dt of dX = sqrt(s2 X) dB started at u (s2 frozen):
// N ~ Poisson(2u/(s2 dt)), X = Gamma(N, s2 dt/2), X = 0 when N = 0.
double cb_transition(double u, double s2, double dt, PhiloxStream& rng);

}  // namespace lsde
