#include "lsde/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "lsde/engine.hpp"
#include "lsde/errors.hpp"
#include "lsde/estimators.hpp"
#include "lsde/kernel.hpp"
#include "lsde/noise.hpp"
#include "lsde/simd/kernels.hpp"

namespace lsde {

namespace {

using Results = std::vector<InvariantResult>;

void add(Results& out, const std::string& suite, const std::string& name, double measured,
         double bound, std::string detail = {}) {
  out.push_back({suite, name, measured, bound, measured <= bound, std::move(detail)});
}

void kernel_suite(Results& out, const VerifyOptions& opt) {
  const std::string s = "kernel";
  const double tol = opt.kernel_tol;

  double total = 0;
  for (long x = -60; x <= 60; ++x) total += rw_kernel_1d(2.0, 1.0, x, tol);
  add(out, s, "kernel_normalization", std::fabs(total - 1), 1e-9, "sum_x p_1(0,x), laplacian walk d=1");

  double worst = 0;
  for (int d : {1, 2})
    for (double t : {0.25, 0.5, 1.0, 2.0})
      for (const Site& x : BoxRegion(8, d).sites()) {
        if (x.l1() > 8) continue;
        const double p = rw_kernel(t, x, d, tol);
        const KernelBounds b = series_sandwich(t, x);
        worst = std::max({worst, (b.lower - p) / b.upper, (p - b.upper) / b.upper});
      }
  add(out, s, "series_sandwich", worst, 1e-12, "relative violation of lower <= p <= upper");

  double diff = 0;
  const GeneratorSpec lap = GeneratorSpec::laplacian(1);
  for (double t : {0.25, 1.0, 2.0}) {
    const KernelTable k = uniformized_kernel(lap, t, 1e-13);
    for (long x = -10; x <= 10; ++x)
      diff = std::max(diff, std::fabs(k.at(Site{static_cast<int>(x)}) - rw_kernel_1d(2.0, t, x, tol)));
  }
  add(out, s, "uniformized_vs_series", diff, 2e-10, "max entrywise difference, d=1");

  const BoxRegion box(3, 1);
  const KernelTable dk = dirichlet_kernel(lap, box, 1.0, 1e-13);
  const KernelTable fk = uniformized_kernel(lap, 1.0, 1e-13);
  double row_excess = 0, above_free = 0, asym = 0;
  for (const Site& x : dk.box_sites()) {
    row_excess = std::max(row_excess, dk.row_total(x) - 1);
    for (const Site& y : dk.box_sites()) {
      above_free = std::max(above_free, dk.at(x, y) - fk.at(y - x));
      asym = std::max(asym, std::fabs(dk.at(x, y) - dk.at(y, x)));
    }
  }
  add(out, s, "dirichlet_substochastic", row_excess, 1e-12, "max row sum - 1");
  add(out, s, "dirichlet_below_free", above_free, 1e-12, "max G_N(x,y) - p(x,y)");
  add(out, s, "dirichlet_symmetry", asym, 1e-14, "max |G_N(x,y) - G_N(y,x)|");

  double tail_excess = 0;
  for (double lam : {0.1, 0.5, 1.0, 3.0, 10.0})
    for (long H : {1L, 2L, 5L, 10L, 30L}) {
      const TailBound tb = poisson_tail(lam, H);
      tail_excess = std::max(tail_excess, (tb.exact_tail - tb.simple_bound) / tb.simple_bound);
    }
  add(out, s, "poisson_tail_bound", tail_excess, 1e-12, "relative excess of P(Y>=H) over lam^H/H!");

  const LatticeState delta = LatticeState::delta(Site::origin(2), 1.0);
  const SemigroupResult sg = semigroup_apply_bounded(GeneratorSpec::laplacian(2), delta, 0.5, 1e-12);
  add(out, s, "semigroup_mass", std::fabs(total_mass(sg.state) - 1), 1e-9 + sg.discarded_mass_bound,
      "mass of delta P_t, d=2");
}

std::size_t kernel_mismatches(const simd::KernelSet& ks) {
  const auto& ref = simd::kernels_for(simd::Isa::scalar);
  constexpr std::size_t n = 1027;
  std::vector<std::uint64_t> keys(n), codes(n);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = replica_key(7, i);
    codes[i] = site_code(Site{static_cast<int>(i) - 500});
  }
  std::vector<double> a(n), b(n);
  ref.gaussians(keys.data(), codes.data(), 11, 0, n, a.data());
  ks.gaussians(keys.data(), codes.data(), 11, 0, n, b.data());
  std::size_t bad = 0;
  for (std::size_t i = 0; i < n; ++i) bad += a[i] != b[i];
  std::vector<double> za(n), zb;
  for (std::size_t i = 0; i < n; ++i) za[i] = 0.01 * static_cast<double>(i % 200);
  zb = za;
  for (std::uint32_t step = 0; step < 5; ++step) {
    ref.feller_em(za.data(), keys.data(), step, 0.03, 0.75, n);
    ks.feller_em(zb.data(), keys.data(), step, 0.03, 0.75, n);
  }
  for (std::size_t i = 0; i < n; ++i) bad += za[i] != zb[i];
  ref.scaled_pow(za.data(), 0.6, 1.5, n, a.data());
  ks.scaled_pow(za.data(), 0.6, 1.5, n, b.data());
  for (std::size_t i = 0; i < n; ++i) bad += a[i] != b[i];
  return bad;
}

void engine_suite(Results& out) {
  const std::string s = "engine";
  std::size_t bad = 0;
  for (simd::Isa isa : simd::available_isas()) bad += kernel_mismatches(simd::kernels_for(isa));
  add(out, s, "simd_equivalence", static_cast<double>(bad), 0, "bitwise mismatches vs scalar reference");

  const ModelParams p{0.5, GeneratorSpec::laplacian(1)};
  const LatticeState u0 = LatticeState::delta(Site{0}, 1.0);
  TrajectoryConfig cfg;
  cfg.t_end = 0.5;
  cfg.seed = 3;
  const TrajectorySummary a = run_trajectory(u0, p, cfg);
  const TrajectorySummary b = run_trajectory(u0, p, cfg);
  add(out, s, "replay_determinism", a == b ? 0 : 1, 0, "same seed, same replica");

  double neg = 0;
  cfg.replica_index = 1;
  run_trajectory(u0, ModelParams{0.75, GeneratorSpec::laplacian(1)}, cfg, [&](double, const Grid& g) {
    const double* u = g.layer(0);
    for (std::size_t i = 0; i < g.size(); ++i) neg = std::max(neg, -u[i]);
  });
  add(out, s, "nonnegativity", neg, 0, "largest negative site value");

  const TrajectorySummary z = run_trajectory(LatticeState(1), p, cfg);
  add(out, s, "zero_state_absorbing", total_mass(z.final_state) + (z.extinction_time.value_or(1.0)), 0,
      "final mass + extinction time from the zero state");

  TrajectoryConfig quiet = cfg;
  quiet.zero_noise = true;
  quiet.t_end = 0.2;
  const TrajectorySummary h = run_trajectory(u0, p, quiet);
  double herr = 0;
  for (int x = -3; x <= 3; ++x)
    herr = std::max(herr, std::fabs(h.final_state.at(Site{x}) - heat_value(p.generator, u0, 0.2, Site{x})));
  add(out, s, "zero_noise_heat_flow", herr, 2e-3, "max |u_t(x) - U_0P_t(x)|, dt = 1e-3");

  double guard = 1;
  try {
    check_stability(GeneratorSpec::laplacian(1), 0.2);
  } catch (const NumericGuardError&) {
    guard = 0;
  }
  add(out, s, "stability_guard", guard, 0, "dt = 0.2 on the d=1 laplacian must be rejected");

  TrajectoryConfig eu = cfg;
  eu.scheme = Scheme::euler;
  eu.t_end = 0.3;
  std::size_t extinct = 0;
  for (std::size_t r = 0; r < 20; ++r) {
    eu.replica_index = r;
    extinct += run_trajectory(u0, p, eu).extinction_time.has_value();
  }
  add(out, s, "euler_never_extinct", static_cast<double>(extinct), 0, "extinctions in 20 euler runs");

  std::uint64_t viol = 0, steps = 0;
  const ModelParams p75{0.75, GeneratorSpec::laplacian(1)};
  for (std::size_t r = 0; r < 100; ++r) {
    TrajectoryConfig c = cfg;
    c.replica_index = r;
    c.t_end = 1;
    const CoupledResult cr = coupled_run(u0, u0, BoxRegion(3, 1), p75, c);
    viol += cr.violations;
    steps += cr.site_steps;
  }
  add(out, s, "cutoff_comparison", steps ? static_cast<double>(viol) / static_cast<double>(steps) : 0, 0.01,
      "fraction of site-steps with cutoff above free");

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 10);
  double ident = 0, lower = 0;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> w(1 + k % 7);
    for (double& v : w) v = U(rng);
    const double gamma = 0.5 + 0.5 * (k % 11) / 10.0;
    const auto hv = split_weights(w, gamma);
    double sq = 0, tot = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      sq += hv[i] * hv[i];
      tot += w[i];
      lower = std::max(lower, (std::pow(w[i], gamma) - hv[i]) / std::max(hv[i], 1e-300));
    }
    ident = std::max(ident, std::fabs(sq - std::pow(tot, 2 * gamma)) / std::pow(tot, 2 * gamma));
  }
  add(out, s, "split_weights_square_sum", ident, 1e-12, "relative error of sum h^2 = (sum w)^{2 gamma}");
  add(out, s, "split_weights_lower", lower, 1e-12, "relative excess of w^gamma over h");
}

void estimators_suite(Results& out) {
  const std::string s = "estimators";
  double outside = 0;
  for (std::size_t k = 0; k <= 50; ++k) {
    const Proportion p = wilson(k, 50);
    outside += !(p.lo <= p.p_hat && p.p_hat <= p.hi && p.lo >= 0 && p.hi <= 1);
  }
  add(out, s, "wilson_contains_estimate", outside, 0, "intervals not containing p_hat");

  const std::size_t n = 20000;
  const ExtinctionCurve c = feller_extinction_curve(1.0, 1.0, 0.5, 1e-3, {2.0}, n, 5);
  const double oracle = feller_extinction_oracle(1.0, 2.0);
  const double se = std::sqrt(oracle * (1 - oracle) / static_cast<double>(n));
  add(out, s, "feller_extinction_oracle", std::fabs(c.p_hat[0] - oracle), 4 * se + 0.01,
      "|p_hat(2) - exp(-1)|, 2e4 replicas, dt = 1e-3");

  TrajectoryConfig cfg;
  cfg.seed = 9;
  const auto rep = check_mass_martingale(ModelParams{0.5, GeneratorSpec::laplacian(1)},
                                         LatticeState::delta(Site{0}, 1.0), {0.25}, 400, cfg);
  add(out, s, "mass_martingale", std::fabs(rep[0].sample_mean - rep[0].oracle_mean), 4 * rep[0].se_mean,
      "|mean <u_t,1> - <u_0,1>| at t = 0.25, 400 replicas");

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0, 5);
  double holder = 0, clump = 0;
  for (int k = 0; k < 300; ++k) {
    const std::size_t m = 1 + k % 9;
    std::vector<double> f(m), g(m);
    for (std::size_t i = 0; i < m; ++i) {
      f[i] = U(rng);
      g[i] = U(rng);
    }
    const double gamma = 0.5 + 0.5 * (k % 13) / 12.0;
    const ConditionReport r = holder_bound_check(f, g, gamma);
    holder = std::max(holder, (r.witness_value("lhs") - r.witness_value("rhs")) / r.witness_value("rhs"));
    const Occupancy o = occupancy_stats(f, gamma);
    clump = std::max(clump, (o.floor - o.clump_ratio) / o.floor);
  }
  add(out, s, "holder_bound", holder, 1e-12, "relative excess of lhs over rhs");
  add(out, s, "clump_floor", clump, 1e-12, "relative deficit of clump ratio below its floor");

  const EnvelopeWindows w = envelope_windows(2, 1, 1);
  add(out, s, "envelope_windows_feasible", w.report.verdict && w.beta ? 0 : 1, 0,
      "lambda = (2, 1, 1) admits a beta window");
}

}  // namespace

std::vector<InvariantResult> run_suite(const std::string& suite, const VerifyOptions& opt) {
  Results out;
  const bool all = suite == "all";
  if (!all && suite != "kernel" && suite != "engine" && suite != "estimators")
    throw std::invalid_argument("unknown suite '" + suite + "' (expected kernel, engine, estimators or all)");
  if (all || suite == "kernel") kernel_suite(out, opt);
  if (all || suite == "engine") engine_suite(out);
  if (all || suite == "estimators") estimators_suite(out);
  return out;
}

std::string invariant_json(const InvariantResult& r) {
  nlohmann::ordered_json j;
  j["suite"] = r.suite;
  j["invariant"] = r.name;
  j["measured"] = r.measured;
  j["bound"] = r.bound;
  j["pass"] = r.pass;
  j["detail"] = r.detail;
  return j.dump();
}

}  // namespace lsde
