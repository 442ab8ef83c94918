#include "catch_amalgamated.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "lsde/noise.hpp"
#include "lsde/philox.hpp"
#include "lsde/stats.hpp"

using namespace lsde;

// Known-answer vectors published with the Random123 reference implementation.
TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms lie strictly inside (0, 1)") {
  CHECK(uniform_from_words(0, 0) > 0.0);
  CHECK(uniform_from_words(0xffffffff, 0xffffffff) < 1.0);
}

TEST_CASE("site codes are injective on a box") {
  for (int d = 1; d <= kMaxDim; ++d) {
    std::set<std::uint64_t> seen;
    const auto sites = BoxRegion(d == 1 ? 50 : 4, d).sites();
    for (const Site& x : sites) seen.insert(site_code(x));
    CHECK(seen.size() == sites.size());
    Site x = Site::origin(d);
    Site y = x;
    y[d - 1] += 1;
    CHECK(site_code(y) - site_code(x) == site_code_last_stride(d));
  }
}

TEST_CASE("noise is a pure function of its address") {
  const NoiseStream a(42, 3), b(42, 3), c(42, 4), e(43, 3);
  const Site x{5};
  CHECK(a.gaussian(x, 10, NoiseChannel::primary) == b.gaussian(x, 10, NoiseChannel::primary));
  CHECK(a.gaussian(x, 10, NoiseChannel::primary) != c.gaussian(x, 10, NoiseChannel::primary));
  CHECK(a.gaussian(x, 10, NoiseChannel::primary) != e.gaussian(x, 10, NoiseChannel::primary));
  CHECK(a.gaussian(x, 10, NoiseChannel::primary) != a.gaussian(x, 10, NoiseChannel::partner));
  CHECK(a.gaussian(x, 10, NoiseChannel::primary) != a.gaussian(x, 11, NoiseChannel::primary));
  CHECK(NoiseStream::silent().gaussian(x, 1, NoiseChannel::primary) == 0.0);
  CHECK(a.increment(x, 10, NoiseChannel::primary, 0.25) == 0.5 * a.gaussian(x, 10, NoiseChannel::primary));
}

TEST_CASE("gaussian draws have standard moments") {
  const NoiseStream s(7, 0);
  std::vector<double> g;
  for (int i = 0; i < 200000; ++i) g.push_back(s.gaussian(Site{i % 1000}, static_cast<std::uint32_t>(i / 1000), NoiseChannel::primary));
  const SampleMoments m = sample_moments(g);
  CHECK(std::fabs(m.mean) < 4 * m.se_mean);
  CHECK(std::fabs(m.var - 1) < 4 * m.se_var);
  CHECK(std::fabs(m.m4 - 3) < 0.05);
}

TEST_CASE("exact branching transition preserves the mean and has an atom at zero") {
  const NoiseStream s(9, 0);
  const double u = 0.3, s2 = 1.0, dt = 0.2;
  std::vector<double> x;
  std::size_t zeros = 0;
  for (std::uint32_t i = 0; i < 100000; ++i) {
    PhiloxStream rng = s.stream_code(i, 0, NoiseChannel::primary);
    const double v = cb_transition(u, s2, dt, rng);
    zeros += v == 0.0;
    x.push_back(v);
  }
  const SampleMoments m = sample_moments(x);
  CHECK(std::fabs(m.mean - u) < 4 * m.se_mean);
  // Var = s2 * u * dt for the compound Poisson-Gamma law.
  CHECK(std::fabs(m.var - s2 * u * dt) < 4 * m.se_var);
  const double p0 = std::exp(-2 * u / (s2 * dt));
  const Proportion p = wilson(zeros, x.size(), 4.0);
  CHECK(p.lo <= p0);
  CHECK(p0 <= p.hi);
  PhiloxStream rng = s.stream_code(0, 0, NoiseChannel::primary);
  CHECK(cb_transition(0.0, 1.0, 0.1, rng) == 0.0);
}
