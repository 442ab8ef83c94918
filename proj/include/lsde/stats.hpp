#pragma once

#include <cstddef>
#include <vector>

namespace lsde {

inline constexpr double kZ95 = 1.959963984540054;

struct Proportion {
  std::size_t successes = 0;
  std::size_t n = 0;
  double p_hat = 0;
  double lo = 0;
  double hi = 0;

  double half_width() const { return 0.5 * (hi - lo); }
};

// Wilson score interval.
Proportion wilson(std::size_t successes, std::size_t n, double z = kZ95);

struct SampleMoments {
  std::size_t n = 0;
  double mean = 0;
  double var = 0;  // unbiased
  double m4 = 0;   // fourth central moment
  double se_mean = 0;
  double se_var = 0;  // sqrt((m4 - var^2) / n)
};

// Two-pass, fixed-order summation: identical inputs give identical bits.
SampleMoments sample_moments(const std::vector<double>& x);

}  // namespace lsde
