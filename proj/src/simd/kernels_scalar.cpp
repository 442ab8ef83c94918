#include "lsde/philox.hpp"
#include "lsde/simd/kernels.hpp"
#include "lsde/simd/vmath.hpp"
#include "scalar_ops.hpp"

namespace lsde::simd {

namespace {

using O = ScalarOps;

double gaussian_at(std::uint64_t key, std::uint64_t code, std::uint32_t step,
                   std::uint32_t channel) {
  const NoiseAddress addr{step, channel, code};
  const PhiloxCounter w = philox4x32_10(addr.counter(0), PhiloxKey::from_u64(key));
  return vmath::gaussian<O>(uniform_from_words(w[0], w[1]), uniform_from_words(w[2], w[3]));
}

void gaussians(const std::uint64_t* keys, const std::uint64_t* codes, std::uint32_t step,
               std::uint32_t channel, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = gaussian_at(keys[i], codes[i], step, channel);
}

void scaled_pow(const double* x, double gamma, double scale, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = scale * vmath::pow_nonneg<O>(x[i], gamma);
}

void noisy_update(const double* base, const double* coef, const double* g, std::size_t n,
                  double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = O::max(base[i] + coef[i] * g[i], 0.0);
}

void stencil(const double* src, double* dst, std::size_t n, const std::ptrdiff_t* offsets,
             const double* rates, std::size_t m, double keep, double dt) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc = acc + rates[j] * src[static_cast<std::ptrdiff_t>(i) + offsets[j]];
    dst[i] = keep * src[i] + dt * acc;
  }
}

void feller_em(double* z, const std::uint64_t* keys, std::uint32_t step, double amp_sqrt_dt,
               double gamma, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gaussian_at(keys[i], 0, step, kScalarChannel);
    const double coef = amp_sqrt_dt * vmath::pow_nonneg<O>(z[i], gamma);
    z[i] = O::max(z[i] + coef * g, 0.0);
  }
}

}  // namespace

namespace detail {
const KernelSet kScalarKernels{Isa::scalar, gaussians, scaled_pow, noisy_update, stencil,
                               feller_em};
}  // namespace detail

}  // namespace lsde::simd
