#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

namespace lsde::simd {

struct ScalarOps {
  using V = double;
  using I = std::uint64_t;
  using M = bool;

  static V set1(double x) { return x; }
  static I set1_i(std::uint64_t x) { return x; }
  static I bits(V x) { return std::bit_cast<I>(x); }
  static V from_bits(I x) { return std::bit_cast<V>(x); }
  static I and_i(I a, I b) { return a & b; }
  static I or_i(I a, I b) { return a | b; }
  static I add_i(I a, I b) { return a + b; }
  static I sub_i(I a, I b) { return a - b; }
  template <int N>
  static I shr_i(I a) {
    return a >> N;
  }
  template <int N>
  static I shl_i(I a) {
    return a << N;
  }
  static V floor(V x) { return std::floor(x); }
  static V sqrt(V x) { return std::sqrt(x); }
  // Operand order matches _mm256_min_pd / _mm256_max_pd (second operand on ties/NaN).
  static V min(V a, V b) { return a < b ? a : b; }
  static V max(V a, V b) { return a > b ? a : b; }
  static M lt(V a, V b) { return a < b; }
  static M gt(V a, V b) { return a > b; }
  static M eq(V a, V b) { return a == b; }
  static V select(M m, V a, V b) { return m ? a : b; }
};

}  // namespace lsde::simd
