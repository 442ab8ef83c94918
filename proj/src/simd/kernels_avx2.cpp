// Compiled with -mavx2 only (no -mfma): every operation below maps to the
// same IEEE operation as the scalar reference.

#include <immintrin.h>

#include "lsde/philox.hpp"
#include "lsde/simd/kernels.hpp"
#include "lsde/simd/vmath.hpp"

namespace lsde::simd {

namespace {

struct Avx2Ops {
  using V = __m256d;
  using I = __m256i;
  using M = __m256d;

  static V set1(double x) { return _mm256_set1_pd(x); }
  static I set1_i(std::uint64_t x) { return _mm256_set1_epi64x(static_cast<long long>(x)); }
  static I bits(V x) { return _mm256_castpd_si256(x); }
  static V from_bits(I x) { return _mm256_castsi256_pd(x); }
  static I and_i(I a, I b) { return _mm256_and_si256(a, b); }
  static I or_i(I a, I b) { return _mm256_or_si256(a, b); }
  static I add_i(I a, I b) { return _mm256_add_epi64(a, b); }
  static I sub_i(I a, I b) { return _mm256_sub_epi64(a, b); }
  template <int N>
  static I shr_i(I a) {
    return _mm256_srli_epi64(a, N);
  }
  template <int N>
  static I shl_i(I a) {
    return _mm256_slli_epi64(a, N);
  }
  static V floor(V x) { return _mm256_floor_pd(x); }
  static V sqrt(V x) { return _mm256_sqrt_pd(x); }
  static V min(V a, V b) { return _mm256_min_pd(a, b); }
  static V max(V a, V b) { return _mm256_max_pd(a, b); }
  static M lt(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
  static M gt(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }
  static M eq(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_EQ_OQ); }
  static V select(M m, V a, V b) { return _mm256_blendv_pd(b, a, m); }
};

using O = Avx2Ops;

// Two registers per value: independent dependency chains for latency-bound
// polynomial evaluation. Lane-for-lane the same operations as Avx2Ops.
struct D2 {
  __m256d a, b;
};
struct I2 {
  __m256i a, b;
};
inline D2 operator+(D2 x, D2 y) { return {x.a + y.a, x.b + y.b}; }
inline D2 operator-(D2 x, D2 y) { return {x.a - y.a, x.b - y.b}; }
inline D2 operator*(D2 x, D2 y) { return {x.a * y.a, x.b * y.b}; }
inline D2 operator/(D2 x, D2 y) { return {x.a / y.a, x.b / y.b}; }

struct Avx2PairOps {
  using V = D2;
  using I = I2;
  using M = D2;

  static V set1(double x) { return {O::set1(x), O::set1(x)}; }
  static I set1_i(std::uint64_t x) { return {O::set1_i(x), O::set1_i(x)}; }
  static I bits(V x) { return {O::bits(x.a), O::bits(x.b)}; }
  static V from_bits(I x) { return {O::from_bits(x.a), O::from_bits(x.b)}; }
  static I and_i(I x, I y) { return {O::and_i(x.a, y.a), O::and_i(x.b, y.b)}; }
  static I or_i(I x, I y) { return {O::or_i(x.a, y.a), O::or_i(x.b, y.b)}; }
  static I add_i(I x, I y) { return {O::add_i(x.a, y.a), O::add_i(x.b, y.b)}; }
  static I sub_i(I x, I y) { return {O::sub_i(x.a, y.a), O::sub_i(x.b, y.b)}; }
  template <int N>
  static I shr_i(I x) {
    return {O::shr_i<N>(x.a), O::shr_i<N>(x.b)};
  }
  template <int N>
  static I shl_i(I x) {
    return {O::shl_i<N>(x.a), O::shl_i<N>(x.b)};
  }
  static V floor(V x) { return {O::floor(x.a), O::floor(x.b)}; }
  static V sqrt(V x) { return {O::sqrt(x.a), O::sqrt(x.b)}; }
  static V min(V x, V y) { return {O::min(x.a, y.a), O::min(x.b, y.b)}; }
  static V max(V x, V y) { return {O::max(x.a, y.a), O::max(x.b, y.b)}; }
  static M lt(V x, V y) { return {O::lt(x.a, y.a), O::lt(x.b, y.b)}; }
  static M gt(V x, V y) { return {O::gt(x.a, y.a), O::gt(x.b, y.b)}; }
  static M eq(V x, V y) { return {O::eq(x.a, y.a), O::eq(x.b, y.b)}; }
  static V select(M m, V x, V y) { return {O::select(m.a, x.a, y.a), O::select(m.b, x.b, y.b)}; }
};

using O2 = Avx2PairOps;

inline D2 load2(const double* p) { return {_mm256_loadu_pd(p), _mm256_loadu_pd(p + 4)}; }
inline void store2(double* p, D2 v) {
  _mm256_storeu_pd(p, v.a);
  _mm256_storeu_pd(p + 4, v.b);
}

inline void mulhilo(__m256i a, __m256i mul, __m256i& hi, __m256i& lo) {
  const __m256i even = _mm256_mul_epu32(a, mul);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), mul);
  lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

// Splits 8 consecutive u64 values into their low and high 32-bit words.
inline void split_u64x8(const std::uint64_t* p, __m256i& lo, __m256i& hi) {
  const __m256i idx = _mm256_setr_epi32(0, 2, 4, 6, 1, 3, 5, 7);
  const __m256i a = _mm256_permutevar8x32_epi32(
      _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p)), idx);
  const __m256i b = _mm256_permutevar8x32_epi32(
      _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + 4)), idx);
  lo = _mm256_permute2x128_si256(a, b, 0x20);
  hi = _mm256_permute2x128_si256(a, b, 0x31);
}

// Eight Philox4x32-10 blocks, one per lane.
inline void philox8(__m256i k0, __m256i k1, __m256i c[4]) {
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(philox_detail::kMul0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(philox_detail::kMul1));
  const __m256i w0 = _mm256_set1_epi32(static_cast<int>(philox_detail::kWeyl0));
  const __m256i w1 = _mm256_set1_epi32(static_cast<int>(philox_detail::kWeyl1));
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 = _mm256_add_epi32(k0, w0);
      k1 = _mm256_add_epi32(k1, w1);
    }
    __m256i hi0, lo0, hi1, lo1;
    mulhilo(c[0], m0, hi0, lo0);
    mulhilo(c[2], m1, hi1, lo1);
    c[0] = _mm256_xor_si256(_mm256_xor_si256(hi1, c[1]), k0);
    c[1] = lo1;
    c[2] = _mm256_xor_si256(_mm256_xor_si256(hi0, c[3]), k1);
    c[3] = lo0;
  }
}

inline __m256d uniform4(const std::uint32_t* lo, const std::uint32_t* hi) {
  const __m256i l = _mm256_cvtepu32_epi64(_mm_loadu_si128(reinterpret_cast<const __m128i*>(lo)));
  const __m256i h = _mm256_cvtepu32_epi64(_mm_loadu_si128(reinterpret_cast<const __m128i*>(hi)));
  const __m256i m = _mm256_srli_epi64(_mm256_or_si256(_mm256_slli_epi64(h, 32), l), 12);
  return (vmath::small_uint_to_double<O>(m) + _mm256_set1_pd(0.5)) * _mm256_set1_pd(0x1p-52);
}

// Gaussians for 8 addresses into out[0..8).
inline void gaussian8(const std::uint64_t* keys, const std::uint64_t* codes, std::uint32_t step,
                      std::uint32_t channel, double* out) {
  __m256i k0, k1, c[4];
  split_u64x8(keys, k0, k1);
  if (codes) {
    split_u64x8(codes, c[2], c[3]);
  } else {
    c[2] = _mm256_setzero_si256();
    c[3] = _mm256_setzero_si256();
  }
  c[0] = _mm256_set1_epi32(static_cast<int>(step));
  c[1] = _mm256_set1_epi32(static_cast<int>(channel & 0xFFu));
  philox8(k0, k1, c);
  alignas(32) std::uint32_t w[4][8];
  for (int j = 0; j < 4; ++j) _mm256_store_si256(reinterpret_cast<__m256i*>(w[j]), c[j]);
  const D2 u1{uniform4(w[0], w[1]), uniform4(w[0] + 4, w[1] + 4)};
  const D2 u2{uniform4(w[2], w[3]), uniform4(w[2] + 4, w[3] + 4)};
  store2(out, vmath::gaussian<O2>(u1, u2));
}

void gaussians(const std::uint64_t* keys, const std::uint64_t* codes, std::uint32_t step,
               std::uint32_t channel, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) gaussian8(keys + i, codes + i, step, channel, out + i);
  if (i < n) detail::kScalarKernels.gaussians(keys + i, codes + i, step, channel, n - i, out + i);
}

void scaled_pow(const double* x, double gamma, double scale, std::size_t n, double* out) {
  std::size_t i = 0;
  const __m256d s = _mm256_set1_pd(scale);
  for (; i + 8 <= n; i += 8) {
    const D2 p = vmath::pow_nonneg<O2>(load2(x + i), gamma);
    store2(out + i, D2{s, s} * p);
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, s * vmath::pow_nonneg<O>(_mm256_loadu_pd(x + i), gamma));
  if (i < n) detail::kScalarKernels.scaled_pow(x + i, gamma, scale, n - i, out + i);
}

void noisy_update(const double* base, const double* coef, const double* g, std::size_t n,
                  double* out) {
  std::size_t i = 0;
  const __m256d zero = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(base + i) + _mm256_loadu_pd(coef + i) * _mm256_loadu_pd(g + i);
    _mm256_storeu_pd(out + i, _mm256_max_pd(v, zero));
  }
  if (i < n) detail::kScalarKernels.noisy_update(base + i, coef + i, g + i, n - i, out + i);
}

void stencil(const double* src, double* dst, std::size_t n, const std::ptrdiff_t* offsets,
             const double* rates, std::size_t m, double keep, double dt) {
  std::size_t i = 0;
  const __m256d vkeep = _mm256_set1_pd(keep);
  const __m256d vdt = _mm256_set1_pd(dt);
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < m; ++j)
      acc = acc + _mm256_set1_pd(rates[j]) *
                      _mm256_loadu_pd(src + static_cast<std::ptrdiff_t>(i) + offsets[j]);
    _mm256_storeu_pd(dst + i, vkeep * _mm256_loadu_pd(src + i) + vdt * acc);
  }
  if (i < n) detail::kScalarKernels.stencil(src + i, dst + i, n - i, offsets, rates, m, keep, dt);
}

void feller_em(double* z, const std::uint64_t* keys, std::uint32_t step, double amp_sqrt_dt,
               double gamma, std::size_t n) {
  std::size_t i = 0;
  const __m256d amp = _mm256_set1_pd(amp_sqrt_dt);
  const __m256d zero = _mm256_setzero_pd();
  alignas(32) double g[8];
  for (; i + 8 <= n; i += 8) {
    gaussian8(keys + i, nullptr, step, kScalarChannel, g);
    const D2 zi = load2(z + i);
    const D2 coef = D2{amp, amp} * vmath::pow_nonneg<O2>(zi, gamma);
    store2(z + i, O2::max(zi + coef * load2(g), D2{zero, zero}));
  }
  if (i < n) detail::kScalarKernels.feller_em(z + i, keys + i, step, amp_sqrt_dt, gamma, n - i);
}

}  // namespace

namespace detail {
const KernelSet kAvx2Kernels{Isa::avx2, gaussians, scaled_pow, noisy_update, stencil, feller_em};
}  // namespace detail

}  // namespace lsde::simd
