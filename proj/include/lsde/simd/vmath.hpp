#pragma once

// Elementary functions written once against a lane-operations policy `O`
// (scalar double, or a SIMD register). Every variant performs the same IEEE
// operations in the same order, so results agree bit for bit across ISAs.
// Accuracy is a few ulp; these are not replacements for libm in general code.
//
// Policy requirements (V = double lanes, I = 64-bit integer lanes, M = mask):
//   set1(double) set1_i(uint64) bits(V) from_bits(I) and_i or_i add_i sub_i
//   shr_i<n> shl_i<n> floor sqrt min max lt gt eq select(M, V, V)

#include <cstdint>

namespace lsde::simd::vmath {

inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kLog2e = 1.44269504088896338700e+00;
inline constexpr double kSqrt2 = 1.41421356237309504880e+00;
inline constexpr double kTwoPi = 6.28318530717958647692e+00;
inline constexpr double kTwo52 = 0x1p52;
inline constexpr double kRoundMagic = 0x1.8p52;

namespace coef {
// 1/k for odd k = 25, 23, ..., 3.
inline constexpr double kAtanh[12] = {1.0 / 25, 1.0 / 23, 1.0 / 21, 1.0 / 19, 1.0 / 17, 1.0 / 15,
                                      1.0 / 13, 1.0 / 11, 1.0 / 9,  1.0 / 7,  1.0 / 5,  1.0 / 3};
// 1/((2k)(2k+1)) for k = 8..1, and 1/((2k-1)(2k)) for k = 9..1.
inline constexpr double kSin[8] = {1.0 / (16.0 * 17), 1.0 / (14.0 * 15), 1.0 / (12.0 * 13),
                                   1.0 / (10.0 * 11), 1.0 / (8.0 * 9),   1.0 / (6.0 * 7),
                                   1.0 / (4.0 * 5),   1.0 / (2.0 * 3)};
inline constexpr double kCos[9] = {1.0 / (17.0 * 18), 1.0 / (15.0 * 16), 1.0 / (13.0 * 14),
                                   1.0 / (11.0 * 12), 1.0 / (9.0 * 10),  1.0 / (7.0 * 8),
                                   1.0 / (5.0 * 6),   1.0 / (3.0 * 4),   1.0 / (1.0 * 2)};
}  // namespace coef

// Integer-valued lanes below 2^52 to double, exactly.
template <class O>
inline typename O::V small_uint_to_double(typename O::I i) {
  return O::from_bits(O::or_i(i, O::set1_i(0x4330000000000000ull))) - O::set1(kTwo52);
}

// Integer-valued double lanes with |k| < 2^51 to two's-complement int64 lanes.
template <class O>
inline typename O::I double_to_int(typename O::V k) {
  return O::sub_i(O::bits(k + O::set1(kRoundMagic)), O::bits(O::set1(kRoundMagic)));
}

// 2^k for integer-valued k in [-1022, 1023].
template <class O>
inline typename O::V pow2(typename O::V k) {
  return O::from_bits(O::template shl_i<52>(O::add_i(double_to_int<O>(k), O::set1_i(1023))));
}

// Natural log for x > 0 (normal or subnormal).
template <class O>
inline typename O::V log_pos(typename O::V x) {
  using V = typename O::V;
  const auto sub = O::lt(x, O::set1(0x1p-1022));
  x = O::select(sub, x * O::set1(0x1p54), x);
  V e = O::select(sub, O::set1(-54.0), O::set1(0.0));

  const auto b = O::bits(x);
  const auto eb = O::and_i(O::template shr_i<52>(b), O::set1_i(0x7FFull));
  e = e + (small_uint_to_double<O>(eb) - O::set1(1023.0));
  V m = O::from_bits(
      O::or_i(O::and_i(b, O::set1_i(0x000FFFFFFFFFFFFFull)), O::set1_i(0x3FF0000000000000ull)));
  const auto big = O::gt(m, O::set1(kSqrt2));
  m = O::select(big, m * O::set1(0.5), m);
  e = O::select(big, e + O::set1(1.0), e);

  // log m = 2 atanh(s), s = (m-1)/(m+1), |s| <= 0.1716.
  const V s = (m - O::set1(1.0)) / (m + O::set1(1.0));
  const V s2 = s * s;
  V p = O::set1(coef::kAtanh[0]);
  for (int i = 1; i < 12; ++i) p = p * s2 + O::set1(coef::kAtanh[i]);
  p = p * s2 + O::set1(1.0);
  const V logm = O::set1(2.0) * s * p;
  return e * O::set1(kLn2Hi) + (e * O::set1(kLn2Lo) + logm);
}

template <class O>
inline typename O::V exp(typename O::V y) {
  using V = typename O::V;
  y = O::max(O::min(y, O::set1(1000.0)), O::set1(-1000.0));
  const V k = O::floor(y * O::set1(kLog2e) + O::set1(0.5));
  const V r = (y - k * O::set1(kLn2Hi)) - k * O::set1(kLn2Lo);
  // Taylor to degree 13 on |r| <= ln2/2.
  constexpr double inv_fact[14] = {1.0,
                                   1.0,
                                   1.0 / 2,
                                   1.0 / 6,
                                   1.0 / 24,
                                   1.0 / 120,
                                   1.0 / 720,
                                   1.0 / 5040,
                                   1.0 / 40320,
                                   1.0 / 362880,
                                   1.0 / 3628800,
                                   1.0 / 39916800,
                                   1.0 / 479001600,
                                   1.0 / 6227020800.0};
  V p = O::set1(inv_fact[13]);
  for (int i = 12; i >= 0; --i) p = p * r + O::set1(inv_fact[i]);
  const V k1 = O::floor(k * O::set1(0.5));
  const V k2 = k - k1;
  return p * pow2<O>(k1) * pow2<O>(k2);
}

// cos(2 pi u) for u in [0, 1).
template <class O>
inline typename O::V cos_2pi(typename O::V u) {
  using V = typename O::V;
  const V q = O::floor(u * O::set1(4.0) + O::set1(0.5));
  const V a = (u - q * O::set1(0.25)) * O::set1(kTwoPi);
  const V a2 = a * a;
  V sn = O::set1(1.0);
  for (int i = 0; i < 8; ++i) sn = O::set1(1.0) - a2 * O::set1(coef::kSin[i]) * sn;
  sn = a * sn;
  V cs = O::set1(1.0);
  for (int i = 0; i < 9; ++i) cs = O::set1(1.0) - a2 * O::set1(coef::kCos[i]) * cs;
  const V quad = q - O::set1(4.0) * O::floor(q * O::set1(0.25));
  const V zero = O::set1(0.0);
  V out = O::select(O::eq(quad, O::set1(3.0)), sn, zero - cs);
  out = O::select(O::eq(quad, O::set1(1.0)), zero - sn, out);
  out = O::select(O::eq(quad, O::set1(0.0)), cs, out);
  return out;
}

// Box-Muller, first output.
template <class O>
inline typename O::V gaussian(typename O::V u1, typename O::V u2) {
  return O::sqrt(O::set1(-2.0) * log_pos<O>(u1)) * cos_2pi<O>(u2);
}

// x^gamma for x >= 0 (0 at 0).
template <class O>
inline typename O::V pow_nonneg(typename O::V x, double gamma) {
  if (gamma == 1.0) return x;
  if (gamma == 0.5) return O::sqrt(x);
  const auto pos = O::gt(x, O::set1(0.0));
  const auto safe = O::select(pos, x, O::set1(1.0));
  return O::select(pos, exp<O>(O::set1(gamma) * log_pos<O>(safe)), O::set1(0.0));
}

}  // namespace lsde::simd::vmath
