#include "catch_amalgamated.hpp"

#include <cmath>
#include <cstdlib>

#include "lsde/errors.hpp"
#include "lsde/estimators.hpp"
#include "lsde/kernel.hpp"
#include "lsde/parallel.hpp"

using namespace lsde;
using Catch::Approx;

namespace {

TrajectoryConfig quick(std::uint64_t seed, double t_end) {
  TrajectoryConfig c;
  c.dt = 2e-3;
  c.t_end = t_end;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("curve from extinction times") {
  const std::vector<std::optional<double>> times{0.5, 1.0, std::nullopt, 2.0, 0.2};
  const ExtinctionCurve c = curve_from_times(times, {0.0, 0.5, 1.0, 3.0}, "u");
  REQUIRE(c.p_hat.size() == 4);
  CHECK(c.p_hat[0] == 0.0);
  CHECK(c.p_hat[1] == Approx(0.4));
  CHECK(c.p_hat[2] == Approx(0.6));
  CHECK(c.p_hat[3] == Approx(0.8));
  CHECK(c.censored_count == 1);
  CHECK(c.n_replicas == 5);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(c.ci_low[i] <= c.p_hat[i]);
    CHECK(c.p_hat[i] <= c.ci_high[i]);
    CHECK(c.ci_half_width[i] == Approx(0.5 * (c.ci_high[i] - c.ci_low[i])));
  }
}

TEST_CASE("zero initial data gives certain extinction with no width") {
  const ModelParams p{0.75, GeneratorSpec::laplacian(1)};
  const ExtinctionCurve c = estimate_extinction_curve(p, LatticeState(1), {0.0, 1.0}, 100, quick(1, 1.0));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(c.p_hat[i] == 1.0);
    CHECK(c.ci_half_width[i] == 0.0);
  }
}

TEST_CASE("extinction curve input checks") {
  const ModelParams p{0.75, GeneratorSpec::laplacian(1)};
  const LatticeState u0 = LatticeState::delta(Site{0}, 1.0);
  CHECK_THROWS_AS(estimate_extinction_curve(p, u0, {1.0}, 99, quick(1, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(feller_extinction_oracle(1.0, 0.0), std::invalid_argument);
  CHECK(feller_extinction_oracle(0.0, 1.0) == 1.0);
  CHECK(feller_extinction_oracle(1.0, 2.0) == Approx(std::exp(-1.0)));
}

TEST_CASE("extinction curve is monotone and thread-count invariant") {
  const ModelParams p{0.75, GeneratorSpec::laplacian(1)};
  const LatticeState u0 = LatticeState::delta(Site{0}, 0.2);
  const std::vector<double> grid{0.25, 0.5, 1.0};
  setenv("LSDE_THREADS", "1", 1);
  const ExtinctionCurve a = estimate_extinction_curve(p, u0, grid, 100, quick(4, 1.0));
  setenv("LSDE_THREADS", "3", 1);
  const ExtinctionCurve b = estimate_extinction_curve(p, u0, grid, 100, quick(4, 1.0));
  unsetenv("LSDE_THREADS");
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.ci_low == b.ci_low);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(a.p_hat[i] >= a.p_hat[i - 1]);
}

TEST_CASE("feller curve brackets the closed form at gamma = 1/2") {
  const ExtinctionCurve c = feller_extinction_curve(1.0, 1.0, 0.5, 1e-3, {1.0}, 4000, 17);
  const double ref = feller_extinction_oracle(1.0, 1.0);
  // Euler bias of the clipped scheme is small next to the Monte Carlo band at this dt.
  CHECK(std::fabs(c.p_hat[0] - ref) < c.ci_half_width[0] + 0.02);
}

TEST_CASE("moment judge") {
  MomentReport r;
  r.n = 100;
  r.sample_mean = 1.02;
  r.oracle_mean = 1.0;
  r.se_mean = 0.01;
  r.sample_var = 0.5;
  r.var_bound = 0.45;
  r.se_var = 0.02;
  judge(r);
  CHECK(r.pass_mean);
  CHECK(r.pass_var);
  r.sample_mean = 1.05;
  r.var_bound = 0.3;
  judge(r);
  CHECK_FALSE(r.pass_mean);
  CHECK_FALSE(r.pass_var);
  r.one_sided = true;
  r.sample_mean = 0.5;
  judge(r);
  CHECK(r.pass_mean);
}

TEST_CASE("total mass is a martingale") {
  const ModelParams p{0.75, GeneratorSpec::laplacian(1)};
  const auto reports = check_mass_martingale(p, LatticeState::delta(Site{0}, 1.0), {0.2, 0.4}, 400, quick(6, 0.4));
  REQUIRE(reports.size() == 2);
  for (const auto& r : reports) {
    CHECK(r.label == "mass");
    CHECK(r.oracle_mean == 1.0);
    CHECK(r.pass_mean);
  }
}

TEST_CASE("catalytic moments with an empty partner are deterministic") {
  const GeneratorSpec g = GeneratorSpec::laplacian(1);
  TrajectoryConfig c = quick(2, 0.5);
  c.truncation_radius = 20;
  const CatalyticMoments m = check_catalytic_moments(LatticeState::delta(Site{0}, 1.0), LatticeState(1), g, 0.5, Site{0}, 100, c);
  CHECK(m.u_site.sample_var == Approx(0.0).margin(1e-20));
  CHECK(m.u_site.var_bound == 0.0);
  CHECK(m.u_site.oracle_mean == Approx(rw_kernel(0.5, Site{0}, 1, 1e-12, 2.0)).epsilon(1e-10));
  CHECK(m.u_site.sample_mean == Approx(m.u_site.oracle_mean).margin(2e-3));
  CHECK(m.v_site.oracle_mean == 0.0);
}

TEST_CASE("heat value is symmetric in the roles of U and V") {
  const GeneratorSpec g = GeneratorSpec::laplacian(1);
  LatticeState a(1), b(1);
  a.set(Site{0}, 1.0);
  a.set(Site{3}, 2.0);
  b.set(Site{-1}, 0.5);
  CHECK(heat_value(g, a, 0.7, Site{1}) == Approx(rw_kernel(0.7, Site{1}, 1, 1e-12, 2.0) + 2 * rw_kernel(0.7, Site{2}, 1, 1e-12, 2.0)).epsilon(1e-10));
  CHECK(heat_value(g, LatticeState(1), 0.7, Site{0}) == 0.0);
  CHECK(heat_value(g, a, 0.0, Site{3}) == 2.0);
}

TEST_CASE("occupancy and the clump floor") {
  const Occupancy two = occupancy_stats(std::vector<double>{1.0, 1.0}, 0.75);
  CHECK(two.support_size == 2);
  CHECK(two.clump_ratio == Approx(std::pow(2.0, -0.25)));
  CHECK(two.floor == Approx(std::pow(2.0, -0.25)));
  const Occupancy one = occupancy_stats(LatticeState::delta(Site{3}, 4.0), 0.75);
  CHECK(one.support_size == 1);
  CHECK(one.clump_ratio == Approx(1.0));
  const Occupancy spread = occupancy_stats(std::vector<double>{1.0, 5.0, 0.0, 2.0}, 0.6);
  CHECK(spread.support_size == 3);
  CHECK(spread.clump_ratio >= spread.floor * (1 - 1e-12));
}

TEST_CASE("ratio escape proxy") {
  const GeneratorSpec g = GeneratorSpec::laplacian(1);
  std::vector<Site> probes;
  for (int x = 6; x <= 12; ++x) probes.push_back(Site{x});
  const LatticeState left = LatticeState::delta(Site{-5}, 1.0);
  const LatticeState right = LatticeState::delta(Site{5}, 1.0);
  const ConditionReport r = check_ratio_escape(left, right, g, 1.0, probes);
  CHECK(r.verdict);
  CHECK(r.witness_value("min_U/V") < 0.01);
  CHECK(r.witness_value("min_V/U") < 0.01);
  CHECK_FALSE(check_ratio_escape(left, left, g, 1.0, probes).verdict);
  CHECK_FALSE(check_ratio_escape(LatticeState::delta(Site{-5}, 2.0), left, g, 1.0, probes).verdict);
  CHECK_THROWS(r.witness_value("nope"));
}

TEST_CASE("half-space separation") {
  LatticeState U(2), V(2);
  U.set(Site{-3, 0}, 1.0);
  U.set(Site{1, 2}, 1.0);
  V.set(Site{0, 0}, 1.0);
  V.set(Site{4, -1}, 1.0);
  const ConditionReport r = check_half_space_separation(U, V);
  CHECK(r.verdict);
  CHECK(r.witness_value("m") == 4.0);
  CHECK(r.witness_value("n") == -3.0);
  CHECK_FALSE(check_half_space_separation(U, U).verdict);
  CHECK_FALSE(check_half_space_separation(U, LatticeState(2)).verdict);
}

TEST_CASE("envelope windows") {
  const EnvelopeWindows w = envelope_windows(2, 1, 1);
  CHECK(w.report.verdict);
  REQUIRE(w.beta);
  REQUIRE(w.alpha);
  CHECK(w.beta->lo == Approx(0.5));
  CHECK(w.beta->hi == Approx(1.0));
  CHECK(w.alpha->lo == Approx(1.25));
  CHECK(w.alpha->hi == Approx(1.5));
  CHECK_FALSE(envelope_windows(1, 1, 1).report.verdict);
  CHECK_FALSE(envelope_windows(1, 1, 1).beta);
  CHECK(envelope_windows(6, 2, 1).report.verdict);
  CHECK_THROWS(envelope_windows(1, 0.5, 1));
}

TEST_CASE("holder bound") {
  const ConditionReport r = holder_bound_check({1, 1}, {2, 0}, 0.75);
  CHECK(r.verdict);
  CHECK(r.witness_value("lhs") == Approx(std::sqrt(2.0)));
  CHECK(r.witness_value("rhs") == Approx(2.0));
  CHECK(holder_bound_check({3, 0.5, 1}, {0.2, 7, 1}, 0.5).verdict);
  CHECK_THROWS(holder_bound_check({1}, {1, 2}, 0.75));
  CHECK_THROWS(holder_bound_check({1}, {1}, 0.3));
}

TEST_CASE("exponential envelope") {
  const LatticeState u = exponential_envelope(2, 3.0, 0.5, 2);
  CHECK(u.support_size() == 13);
  CHECK(u.at(Site{0, 0}) == 3.0);
  CHECK(u.at(Site{1, -1}) == Approx(3.0 * std::exp(-1.0)));
  CHECK(u.at(Site{2, 1}) == 0.0);
  CHECK(exponential_envelope(1, 0.0, 1.0, 5).empty());
}

TEST_CASE("envelope scenario with zero amplitude is certain extinction") {
  TrajectoryConfig c = quick(1, 0.1);
  c.truncation_radius = 10;
  const EnvelopeScenario s = envelope_extinction_scenario({2, 1, 1, 1, 1, 0.0}, {0.0}, 0.1, 50, c);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].extinct == 50);
  CHECK(s.rows[0].freq.p_hat == 1.0);
  CHECK(s.monotone);
  CHECK_THROWS(envelope_extinction_scenario({1, 1, 1, 1, 1, 0.0}, {0.0}, 0.1, 50, c));
}
