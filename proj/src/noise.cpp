#include "lsde/noise.hpp"

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "lsde/simd/kernels.hpp"
#include "lsde/simd/vmath.hpp"
#include "simd/scalar_ops.hpp"

namespace lsde {

std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica) {
  return splitmix64(splitmix64(seed) ^ (replica * 0xD1B54A32D192ED03ull));
}

int site_code_bits(int dim) { return dim <= 2 ? 32 : 64 / dim; }

std::uint64_t site_code(const Site& x) {
  const int b = site_code_bits(x.dim());
  const std::uint64_t mask = (b == 64) ? ~0ull : ((1ull << b) - 1);
  const std::int64_t bias = std::int64_t{1} << (b - 1);
  std::uint64_t code = 0;
  for (int i = 0; i < x.dim(); ++i)
    code |= (static_cast<std::uint64_t>(x[i] + bias) & mask) << (b * i);
  return code;
}

std::uint64_t site_code_last_stride(int dim) {
  return 1ull << (site_code_bits(dim) * (dim - 1));
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t replica, bool zero)
    : key_(replica_key(seed, replica)), zero_(zero) {}

double NoiseStream::gaussian_code(std::uint64_t code, std::uint32_t step, NoiseChannel ch) const {
  if (zero_) return 0.0;
  const NoiseAddress addr{step, static_cast<std::uint32_t>(ch), code};
  const PhiloxCounter w = philox4x32_10(addr.counter(0), PhiloxKey::from_u64(key_));
  return simd::vmath::gaussian<simd::ScalarOps>(uniform_from_words(w[0], w[1]),
                                                uniform_from_words(w[2], w[3]));
}

double NoiseStream::gaussian(const Site& x, std::uint32_t step, NoiseChannel ch) const {
  return gaussian_code(site_code(x), step, ch);
}

double NoiseStream::increment(const Site& x, std::uint32_t step, NoiseChannel ch,
                              double dt) const {
  return std::sqrt(dt) * gaussian(x, step, ch);
}

PhiloxStream NoiseStream::stream_code(std::uint64_t code, std::uint32_t step,
                                      NoiseChannel ch) const {
  return PhiloxStream(PhiloxKey::from_u64(key_), NoiseAddress{step, static_cast<std::uint32_t>(ch), code});
}

namespace {

// Smallest k with P(N <= k) >= q for N ~ Poisson(mu). Small means walk up
// from 0; large means start at the mode with the exact CDF there.
long long poisson_quantile(double mu, double q) {
  long long k = mu < 40 ? 0 : static_cast<long long>(mu);
  const double kd = static_cast<double>(k);
  double p = k == 0 ? std::exp(-mu) : std::exp(-mu + kd * std::log(mu) - std::lgamma(kd + 1));
  double F = k == 0 ? p : boost::math::gamma_q(kd + 1, mu);
  if (F >= q) {
    while (k > 0 && F - p >= q) {
      F -= p;
      p *= static_cast<double>(k) / mu;
      --k;
    }
    return k;
  }
  while (F < q) {
    ++k;
    p *= mu / static_cast<double>(k);
    if (p == 0) break;
    F += p;
  }
  return k;
}

// Marsaglia-Tsang for shape a >= 1. With the same stream the first proposal
// d (1 + c z)^3 grows with a, so accepted draws are monotone in the shape.
double gamma_mt(double a, PhiloxStream& rng) {
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double r = std::sqrt(-2.0 * std::log(rng.uniform()));
    const double z = r * std::cos(6.283185307179586 * rng.uniform());
    double v = 1.0 + c * z;
    const double w = rng.uniform();
    if (v <= 0) continue;
    v = v * v * v;
    if (std::log(w) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
  }
}

}  // namespace

double cb_transition(double u, double s2, double dt, PhiloxStream& rng) {
  if (u <= 0.0) return 0.0;
  if (s2 <= 0.0) return u;
  const double theta = 0.5 * s2 * dt;
  const double mu = u / theta;
  // Inverse-CDF count: nondecreasing in u for a fixed stream, which keeps
  // shared-noise comparisons ordered.
  const long long n = poisson_quantile(mu, rng.uniform());
  if (n == 0) return 0.0;
  return theta * gamma_mt(static_cast<double>(n), rng);
}

}  // namespace lsde
