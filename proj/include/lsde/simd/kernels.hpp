#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace lsde::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// Data-parallel inner loops of the simulator. Each ISA variant is bit-identical
// to the scalar reference; tests/simd_equivalence_test.cpp enforces this.
struct KernelSet {
  Isa isa;

  // out[i] = standard normal for noise address (keys[i]; step, channel,
  // codes[i]; draw 0).
  void (*gaussians)(const std::uint64_t* keys, const std::uint64_t* codes, std::uint32_t step,
                    std::uint32_t channel, std::size_t n, double* out);

  // out[i] = scale * x[i]^gamma, with 0^gamma = 0.
  void (*scaled_pow)(const double* x, double gamma, double scale, std::size_t n, double* out);

  // out[i] = max(0, base[i] + coef[i] * g[i]). out may alias base.
  void (*noisy_update)(const double* base, const double* coef, const double* g, std::size_t n,
                       double* out);

  // dst[i] = keep * src[i] + dt * sum_j rates[j] * src[i + offsets[j]].
  void (*stencil)(const double* src, double* dst, std::size_t n, const std::ptrdiff_t* offsets,
                  const double* rates, std::size_t m, double keep, double dt);

  // One clamped Euler step of dZ = A Z^gamma dB for n independent scalar
  // replicas (keys[i]) at a shared step index; amp_sqrt_dt = A sqrt(dt).
  void (*feller_em)(double* z, const std::uint64_t* keys, std::uint32_t step, double amp_sqrt_dt,
                    double gamma, std::size_t n);
};

// Noise channel used by scalar-diffusion replicas (site code 0).
inline constexpr std::uint32_t kScalarChannel = 2;

bool isa_available(Isa isa);
const KernelSet& kernels_for(Isa isa);

// Kernels used by the engine: the best available ISA unless forced.
const KernelSet& active_kernels();
void force_isa(Isa isa);
std::vector<Isa> available_isas();

namespace detail {
extern const KernelSet kScalarKernels;
#if defined(LSDE_HAVE_AVX2)
extern const KernelSet kAvx2Kernels;
#endif
}  // namespace detail

}  // namespace lsde::simd
