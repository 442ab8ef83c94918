#include "lsde/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace lsde {

Proportion wilson(std::size_t successes, std::size_t n, double z) {
  if (successes > n) throw std::invalid_argument("wilson: successes exceed n");
  Proportion p;
  p.successes = successes;
  p.n = n;
  if (n == 0) {
    p.lo = 0;
    p.hi = 1;
    return p;
  }
  const double nd = static_cast<double>(n);
  p.p_hat = static_cast<double>(successes) / nd;
  const double z2 = z * z;
  const double denom = 1 + z2 / nd;
  const double centre = (p.p_hat + z2 / (2 * nd)) / denom;
  const double half = z * std::sqrt(p.p_hat * (1 - p.p_hat) / nd + z2 / (4 * nd * nd)) / denom;
  // Exact endpoints are 0 at k = 0 and 1 at k = n; rounding can miss them.
  p.lo = successes == 0 ? 0.0 : std::min(p.p_hat, std::max(0.0, centre - half));
  p.hi = successes == n ? 1.0 : std::max(p.p_hat, std::min(1.0, centre + half));
  return p;
}

SampleMoments sample_moments(const std::vector<double>& x) {
  SampleMoments m;
  m.n = x.size();
  if (x.empty()) return m;
  const double n = static_cast<double>(x.size());
  double s = 0;
  for (double v : x) s += v;
  m.mean = s / n;
  double s2 = 0, s4 = 0;
  for (double v : x) {
    const double d = v - m.mean;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  m.var = x.size() > 1 ? s2 / (n - 1) : 0.0;
  m.m4 = s4 / n;
  m.se_mean = std::sqrt(m.var / n);
  m.se_var = std::sqrt(std::max(0.0, m.m4 - m.var * m.var) / n);
  return m;
}

}  // namespace lsde
