#include "catch_amalgamated.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <map>

#include "lsde/errors.hpp"
#include "lsde/kernel.hpp"

using namespace lsde;
using Catch::Approx;

namespace {

// e^{-z} I_|x|(z): the 1-d walk with total rate r at time t, z = r t.
double bessel_oracle(double rate, double t, long x) {
  const double z = rate * t;
  return std::exp(-z) * boost::math::cyl_bessel_i(static_cast<double>(std::labs(x)), z);
}

// Killed nearest-neighbour walk on D_N, dense matrix exponential.
Eigen::MatrixXd dirichlet_oracle(const BoxRegion& box, double t, std::map<Site, int>& index) {
  const auto sites = box.sites();
  for (std::size_t i = 0; i < sites.size(); ++i) index[sites[i]] = static_cast<int>(i);
  const int n = static_cast<int>(sites.size());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (const Site& x : sites) {
    Q(index[x], index[x]) = -2.0 * box.dim();
    for (const Site& y : neighbors(x, box.dim()))
      if (box.contains(y)) Q(index[x], index[y]) = 1.0;
  }
  return (t * Q).exp();
}

}  // namespace

TEST_CASE("1-d series matches the Bessel closed form") {
  for (double rate : {1.0, 2.0, 3.5})
    for (double t : {0.01, 0.25, 1.0, 2.0, 7.0})
      for (long x = 0; x <= 12; ++x) {
        const double ref = bessel_oracle(rate, t, x);
        if (ref < 1e-280) continue;
        INFO("rate " << rate << " t " << t << " x " << x);
        CHECK(std::fabs(rw_kernel_1d(rate, t, x) - ref) <= 1e-10 * ref);
      }
}

TEST_CASE("kernel reference values") {
  CHECK(rw_kernel_1d(1.0, 1.0, 0) == Approx(0.4657596076).margin(1e-10));
  CHECK(rw_kernel(1.0, Site{0, 0}, 2) == Approx(0.4657596076 * 0.4657596076).margin(1e-9));
  // The laplacian walk at t = 0.5 is the unit-rate walk at t = 1.
  CHECK(rw_kernel(0.5, Site{0}, 1, 1e-12, 2.0) == Approx(rw_kernel_1d(1.0, 1.0, 0)).epsilon(1e-10));
}

TEST_CASE("at t = 0 the kernel is the indicator of the origin") {
  CHECK(rw_kernel_1d(2.0, 0.0, 0) == 1.0);
  CHECK(rw_kernel_1d(2.0, 0.0, 3) == 0.0);
  CHECK(rw_kernel(0.0, Site{0, 0}, 2) == 1.0);
  CHECK(rw_kernel(0.0, Site{1, 0}, 2) == 0.0);
}

TEST_CASE("kernel is symmetric and sums to one") {
  for (double t : {0.3, 1.0, 3.0}) {
    double s = 0;
    for (long x = -80; x <= 80; ++x) {
      s += rw_kernel_1d(2.0, t, x);
      CHECK(rw_kernel_1d(2.0, t, x) == rw_kernel_1d(2.0, t, -x));
    }
    CHECK(s == Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("kernel rejects bad arguments") {
  CHECK_THROWS_AS(rw_kernel_1d(1.0, 1.0, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rw_kernel_1d(1.0, -1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(rw_kernel_1d(0.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(rw_kernel(1.0, Site{0}, 2), DimensionMismatch);
}

TEST_CASE("first-term sandwich holds for every row") {
  for (int d : {1, 2, 3})
    for (double rate : {1.0, 2.0})
      for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0})
        for (const Site& x : BoxRegion(d == 3 ? 2 : 6, d).sites()) {
          const double p = rw_kernel(t, x, d, 1e-12, rate);
          const KernelBounds b = series_sandwich(t, x, rate);
          INFO("d " << d << " t " << t << " x " << x.to_string());
          CHECK(b.lower <= p * (1 + 1e-12));
          CHECK(p <= b.upper * (1 + 1e-12));
        }
  const KernelBounds b = series_sandwich(1.0, Site{0});
  CHECK(b.lower == Approx(std::exp(-1.0)));
  CHECK(b.upper == 1.0);
}

TEST_CASE("the power-form lower bound fails off the origin") {
  const double p = rw_kernel(1.0, Site{1}, 1);
  const KernelBounds b = power_sandwich(1.0, Site{1});
  CHECK(p == Approx(0.2079104153).margin(1e-9));
  CHECK(b.lower == Approx(std::exp(-1.0)));
  CHECK_FALSE(b.contains(p));
  CHECK(power_sandwich(1.0, Site{0}).contains(rw_kernel(1.0, Site{0}, 1)));
}

TEST_CASE("poisson tails against the incomplete gamma function") {
  const TailBound tb = poisson_tail(2.0, 10);
  CHECK(tb.simple_bound == Approx(std::pow(2.0, 10) / 3628800.0).epsilon(1e-14));
  CHECK(tb.exact_tail <= tb.simple_bound);
  for (double lam : {0.001, 0.5, 2.0, 9.0, 30.0})
    for (long H : {1L, 2L, 3L, 8L, 20L, 45L}) {
      const TailBound t = poisson_tail(lam, H);
      const double ref = boost::math::gamma_p(static_cast<double>(H), lam);
      INFO("lam " << lam << " H " << H);
      CHECK(std::fabs(t.exact_tail - ref) <= 1e-12 * ref);
      CHECK(t.exact_tail <= t.simple_bound * (1 + 1e-12));
    }
  CHECK(poisson_tail(3.0, 0).exact_tail == 1.0);
  CHECK_THROWS_AS(poisson_tail(-1.0, 2), std::invalid_argument);
}

TEST_CASE("exit probability bound") {
  const double b = exit_prob_bound(5, 1.0, 2, 1);
  CHECK(b == Approx(boost::math::gamma_p(3.0, 2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(exit_prob_bound(2, 1.0, 2, 1), NumericGuardError);
}

TEST_CASE("uniformized kernel matches the series product") {
  for (int d : {1, 2}) {
    const GeneratorSpec g = GeneratorSpec::laplacian(d);
    for (double t : {0.25, 1.0, 2.0}) {
      const KernelTable k = uniformized_kernel(g, t, 1e-12);
      CHECK(k.total() == Approx(1.0).margin(1e-10));
      for (const Site& x : BoxRegion(5, d).sites())
        CHECK(std::fabs(k.at(x) - rw_kernel(t, x, d, 1e-12, 2.0)) <= 2e-10);
    }
  }
}

TEST_CASE("uniformized kernel for a non-nearest-neighbour generator") {
  // Jumps of +-2 at rate 1/2 each: a unit-rate walk on 2Z.
  const GeneratorSpec g = GeneratorSpec::explicit_rates(1, {{Site{2}, 0.5}, {Site{-2}, 0.5}});
  const KernelTable k = uniformized_kernel(g, 1.5, 1e-13);
  for (int x = -10; x <= 10; ++x) {
    const double ref = x % 2 == 0 ? bessel_oracle(1.0, 1.5, x / 2) : 0.0;
    CHECK(std::fabs(k.at(Site{x}) - ref) <= 1e-11);
  }
}

TEST_CASE("dirichlet kernel matches the dense matrix exponential") {
  for (const auto& [N, d, t] : std::vector<std::tuple<int, int, double>>{{1, 1, 1.0}, {2, 1, 0.7}, {1, 2, 0.5}, {3, 1, 2.0}}) {
    const BoxRegion box(N, d);
    std::map<Site, int> idx;
    const Eigen::MatrixXd E = dirichlet_oracle(box, t, idx);
    const KernelTable k = dirichlet_kernel(GeneratorSpec::laplacian(d), box, t, 1e-13);
    for (const Site& x : box.sites())
      for (const Site& y : box.sites()) CHECK(std::fabs(k.at(x, y) - E(idx[x], idx[y])) <= 1e-10);
  }
  const KernelTable k = dirichlet_kernel(GeneratorSpec::laplacian(1), BoxRegion(1, 1), 1.0, 1e-13);
  CHECK(k.at(Site{0}, Site{0}) == Approx(0.29478508857495).margin(1e-12));
}

TEST_CASE("dirichlet kernel is symmetric, substochastic and below the free kernel") {
  const GeneratorSpec g = GeneratorSpec::laplacian(2);
  const BoxRegion box(2, 2);
  const KernelTable dk = dirichlet_kernel(g, box, 0.8, 1e-13);
  const KernelTable fk = uniformized_kernel(g, 0.8, 1e-13);
  for (const Site& x : box.sites()) {
    CHECK(dk.row_total(x) <= 1.0 + 1e-12);
    for (const Site& y : box.sites()) {
      CHECK(dk.at(x, y) == Approx(dk.at(y, x)).margin(1e-15));
      CHECK(dk.at(x, y) <= fk.at(y - x) + 1e-12);
    }
  }
  CHECK_THROWS(dk.at(Site{0, 0}));
}

TEST_CASE("semigroup application") {
  const GeneratorSpec g = GeneratorSpec::laplacian(1);
  LatticeState u(1);
  u.set(Site{-2}, 1.0);
  u.set(Site{3}, 0.5);
  const SemigroupResult r = semigroup_apply_bounded(g, u, 0.6, 1e-13);
  CHECK(total_mass(r.state) == Approx(1.5).margin(1e-10 + r.discarded_mass_bound));
  for (int x = -6; x <= 6; ++x) {
    const double ref = rw_kernel_1d(2.0, 0.6, x + 2) + 0.5 * rw_kernel_1d(2.0, 0.6, x - 3);
    CHECK(r.state.at(Site{x}) == Approx(ref).margin(1e-12));
  }
  CHECK(semigroup_apply(g, LatticeState(1), 1.0).empty());
  CHECK_THROWS_AS(semigroup_apply(g, LatticeState(2), 1.0), DimensionMismatch);
}
