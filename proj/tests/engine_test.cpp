#include "catch_amalgamated.hpp"

#include <cmath>
#include <numeric>

#include "lsde/engine.hpp"
#include "lsde/errors.hpp"
#include "lsde/kernel.hpp"

using namespace lsde;
using Catch::Approx;

namespace {

const ModelParams kSingle{0.75, GeneratorSpec::laplacian(1)};

TrajectoryConfig short_run(std::uint64_t seed, double t_end = 0.5) {
  TrajectoryConfig c;
  c.dt = 1e-3;
  c.t_end = t_end;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("stability guard") {
  CHECK_NOTHROW(check_stability(GeneratorSpec::laplacian(1), 0.05));
  CHECK_THROWS_AS(check_stability(GeneratorSpec::laplacian(1), 0.051), NumericGuardError);
  CHECK_THROWS_AS(check_stability(GeneratorSpec::laplacian(4), 0.02), NumericGuardError);
  TrajectoryConfig c = short_run(1);
  c.dt = 0.2;
  CHECK_THROWS_AS(run_trajectory(LatticeState::delta(Site{0}, 1.0), kSingle, c), NumericGuardError);
}

TEST_CASE("scheme names round-trip") {
  CHECK(parse_scheme(scheme_name(Scheme::split)) == Scheme::split);
  CHECK(parse_scheme(scheme_name(Scheme::euler)) == Scheme::euler);
  CHECK_THROWS(parse_scheme("rk4"));
}

TEST_CASE("zero state is absorbing") {
  const NoiseStream n(3, 0);
  for (Scheme s : {Scheme::split, Scheme::euler}) {
    CHECK(step_single_type(LatticeState(1), kSingle, 1e-3, n, 0, {s}).empty());
    const auto [U, V] = step_catalytic(LatticeState(2), LatticeState(2), GeneratorSpec::laplacian(2), 1e-3, n, 0, {s});
    CHECK(U.empty());
    CHECK(V.empty());
  }
  const TrajectorySummary r = run_trajectory(LatticeState(1), kSingle, short_run(1));
  REQUIRE(r.extinction_time);
  CHECK(*r.extinction_time == 0.0);
  CHECK(r.mass_path.size() == 1);
}

TEST_CASE("steps stay nonnegative and are a pure function of the address") {
  LatticeState u(1);
  for (int x = -3; x <= 3; ++x) u.set(Site{x}, 0.01 * (x + 4));
  const NoiseStream n(11, 2);
  for (Scheme s : {Scheme::split, Scheme::euler}) {
    LatticeState a = u;
    for (std::uint32_t k = 0; k < 200; ++k) {
      a = step_single_type(a, kSingle, 0.01, n, k, {s});
      for (const auto& [x, v] : a) CHECK(v > 0.0);
    }
    CHECK(step_single_type(u, kSingle, 0.01, n, 5, {s}) == step_single_type(u, kSingle, 0.01, n, 5, {s}));
  }
  CHECK_THROWS_AS(step_single_type(LatticeState(2), kSingle, 0.01, n, 0), DimensionMismatch);
}

TEST_CASE("replays are bit identical and seeds matter") {
  const LatticeState u0 = LatticeState::delta(Site{0}, 1.0);
  CHECK(run_trajectory(u0, kSingle, short_run(5)) == run_trajectory(u0, kSingle, short_run(5)));
  CHECK_FALSE(run_trajectory(u0, kSingle, short_run(5)) == run_trajectory(u0, kSingle, short_run(6)));
}

TEST_CASE("paths are sampled on the requested grid and end at extinction") {
  TrajectoryConfig c = short_run(9, 1.0);
  c.sample_interval = 0.25;
  const TrajectorySummary r = run_trajectory(LatticeState::delta(Site{0}, 5.0), kSingle, c);
  REQUIRE_FALSE(r.mass_path.empty());
  CHECK(r.mass_path.front() == std::pair<double, double>{0.0, 5.0});
  if (!r.extinction_time) {
    REQUIRE(r.mass_path.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(r.mass_path[i].first == Approx(0.25 * i));
  }
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const TrajectorySummary s = run_trajectory(LatticeState::delta(Site{0}, 0.05), kSingle, short_run(seed, 2.0));
    if (!s.extinction_time) continue;
    CHECK(s.mass_path.back().second == 0.0);
    CHECK(s.mass_path.back().first == Approx(*s.extinction_time));
    CHECK(s.final_state.empty());
  }
}

TEST_CASE("without noise the run follows the heat flow") {
  TrajectoryConfig c = short_run(0, 0.5);
  c.zero_noise = true;
  LatticeState u0(1);
  u0.set(Site{0}, 1.0);
  u0.set(Site{2}, 0.5);
  const TrajectorySummary r = run_trajectory(u0, kSingle, c);
  const LatticeState ref = semigroup_apply(kSingle.generator, u0, 0.5);
  for (int x = -8; x <= 10; ++x) CHECK(std::fabs(r.final_state.at(Site{x}) - ref.at(Site{x})) < 2e-3);
  CHECK(total_mass(r.final_state) == Approx(1.5).epsilon(1e-12));
}

TEST_CASE("the euler scheme never reaches the zero state") {
  TrajectoryConfig c = short_run(0, 1.0);
  c.scheme = Scheme::euler;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    c.seed = seed;
    CHECK_FALSE(run_trajectory(LatticeState::delta(Site{0}, 0.05), kSingle, c).extinction_time);
  }
}

TEST_CASE("cutoff runs keep their support in the box and lose mass at the boundary") {
  const BoxRegion box(2, 1);
  TrajectoryConfig c = short_run(4, 1.0);
  c.box = box;
  c.zero_noise = true;
  const TrajectorySummary r = run_trajectory(LatticeState::delta(Site{0}, 1.0), kSingle, c);
  for (const auto& [x, v] : r.final_state) CHECK(box.contains(x));
  const KernelTable k = dirichlet_kernel(kSingle.generator, box, 1.0, 1e-13);
  CHECK(total_mass(r.final_state) == Approx(k.row_total(Site{0})).margin(2e-3));
  CHECK(r.removed_mass > 0.0);
  CHECK_THROWS(step_cutoff(LatticeState::delta(Site{5}, 1.0), box, kSingle, 1e-3, NoiseStream(1, 0), 0));
}

TEST_CASE("cutoff run stays below the free run under the shared noise") {
  const BoxRegion box(3, 1);
  TrajectoryConfig c = short_run(12, 1.0);
  const LatticeState u0 = LatticeState::delta(Site{0}, 1.0);
  std::uint64_t viol = 0, steps = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    c.replica_index = r;
    const CoupledResult cr = coupled_run(u0, u0, box, kSingle, c);
    viol += cr.violations;
    steps += cr.site_steps;
    for (const auto& [x, v] : cr.cutoff_run.final_state) CHECK(box.contains(x));
  }
  CHECK(steps > 0);
  CHECK(static_cast<double>(viol) <= 0.01 * static_cast<double>(steps));
  CHECK_THROWS(coupled_run(u0, LatticeState::delta(Site{0}, 2.0), box, kSingle, c));
}

TEST_CASE("exact branching draws are monotone in the current value") {
  const NoiseStream n(4, 0);
  for (std::uint32_t k = 0; k < 2000; ++k) {
    double prev = 0;
    for (double u : {0.001, 0.01, 0.1, 0.5, 1.0, 3.0}) {
      PhiloxStream rng = n.stream_code(k, 0, NoiseChannel::primary);
      const double x = cb_transition(u, std::pow(u, 0.5), 1e-3, rng);
      CHECK(x >= prev);
      prev = x;
    }
  }
}

TEST_CASE("split weights: lower bound and square sum") {
  const std::vector<double> h = split_weights({1, 2, 3}, 0.6);
  REQUIRE(h.size() == 3);
  double sq = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(h[i] >= std::pow(static_cast<double>(i + 1), 0.6) * (1 - 1e-12));
    sq += h[i] * h[i];
  }
  CHECK(sq == Approx(std::pow(6.0, 1.2)).epsilon(1e-12));
  for (double v : split_weights({0, 0}, 0.75)) CHECK(v == 0.0);
  CHECK_THROWS(split_weights({1.0}, 1.5));
  CHECK_THROWS(split_weights({-1.0}, 0.75));
}

TEST_CASE("feller step is the clipped Euler increment") {
  CHECK(step_feller(1.0, 1.0, 0.5, 0.5) == 1.5);
  CHECK(step_feller(1.0, 1.0, 0.5, -2.0) == 0.0);
  CHECK(step_feller(0.0, 1.0, 0.5, 3.0) == 0.0);
  CHECK(step_feller(4.0, 0.5, 0.5, 1.0) == 5.0);
}

TEST_CASE("feller batches are chunk invariant") {
  const FellerBatch all = run_feller_batch(1.0, 1.0, 0.5, 1e-3, 1.0, 77, 0, 64);
  const FellerBatch tail = run_feller_batch(1.0, 1.0, 0.5, 1e-3, 1.0, 77, 40, 24);
  REQUIRE(all.final_z.size() == 64);
  for (std::size_t i = 0; i < 24; ++i) {
    CHECK(tail.final_z[i] == all.final_z[40 + i]);
    CHECK(tail.extinction_time[i] == all.extinction_time[40 + i]);
  }
  for (std::size_t i = 0; i < 64; ++i) {
    if (std::isfinite(all.extinction_time[i])) CHECK(all.final_z[i] == 0.0);
    else CHECK(all.final_z[i] > 0.0);
  }
}

TEST_CASE("catalytic pair with an empty partner follows the heat flow") {
  const GeneratorSpec g = GeneratorSpec::laplacian(1);
  TrajectoryConfig c = short_run(3, 0.5);
  c.truncation_radius = 30;
  const CatalyticSummary r = run_catalytic(LatticeState::delta(Site{0}, 1.0), LatticeState(1), g, c);
  REQUIRE(r.v.extinction_time);
  CHECK(*r.v.extinction_time == 0.0);
  CHECK_FALSE(r.u.extinction_time);
  CHECK(r.u.final_state.at(Site{0}) == Approx(rw_kernel(0.5, Site{0}, 1, 1e-12, 2.0)).margin(2e-3));
}

TEST_CASE("catalytic runs respect the truncation radius") {
  const GeneratorSpec g = GeneratorSpec::laplacian(1);
  TrajectoryConfig c = short_run(8, 1.0);
  c.truncation_radius = 3;
  const CatalyticSummary r = run_catalytic(LatticeState::delta(Site{0}, 1.0), LatticeState::delta(Site{0}, 1.0), g, c);
  for (const auto& [x, v] : r.u.final_state) CHECK(x.l1() <= 3);
  for (const auto& [x, v] : r.v.final_state) CHECK(x.l1() <= 3);
  CHECK(r.u.removed_mass + r.v.removed_mass > 0.0);
  CHECK(run_catalytic(LatticeState::delta(Site{0}, 1.0), LatticeState::delta(Site{0}, 1.0), g, c).u == r.u);
}
