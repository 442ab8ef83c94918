#include "lsde/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lsde/errors.hpp"
#include "lsde/kernel.hpp"
#include "lsde/parallel.hpp"

namespace lsde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool at_or_before(double a, double t) { return a <= t + 1e-9 * std::max(1.0, std::fabs(t)); }

double max_time(const std::vector<double>& ts) {
  if (ts.empty()) throw std::invalid_argument("time grid must not be empty");
  for (double t : ts)
    if (!(t >= 0) || !std::isfinite(t)) throw std::invalid_argument("time grid values must be finite and >= 0");
  return *std::max_element(ts.begin(), ts.end());
}

// Sample interval putting every requested time on the recorded grid.
double common_interval(const std::vector<double>& ts, double dt) {
  long long g = 0;
  for (double t : ts) {
    const long long k = std::llround(t / dt);
    if (std::fabs(static_cast<double>(k) * dt - t) > 1e-9 * std::max(1.0, t))
      throw std::invalid_argument("requested time is not a multiple of dt");
    g = std::gcd(g, k);
  }
  return g > 0 ? static_cast<double>(g) * dt : 0.0;
}

double mass_at(const TrajectorySummary& s, double t, double dt) {
  if (s.extinction_time && at_or_before(*s.extinction_time, t)) return 0.0;
  for (const auto& [tt, m] : s.mass_path)
    if (std::fabs(tt - t) <= 0.5 * dt) return m;
  throw std::logic_error("mass path has no sample at the requested time");
}

MomentReport report_from(const std::string& label, double t, const std::vector<double>& xs,
                         double oracle, double var_bound, bool one_sided) {
  const SampleMoments m = sample_moments(xs);
  MomentReport r;
  r.label = label;
  r.time = t;
  r.n = m.n;
  r.sample_mean = m.mean;
  r.oracle_mean = oracle;
  r.se_mean = m.se_mean;
  r.sample_var = m.var;
  r.var_bound = var_bound;
  r.se_var = m.se_var;
  r.one_sided = one_sided;
  judge(r);
  return r;
}

}  // namespace

ExtinctionCurve curve_from_times(const std::vector<std::optional<double>>& times,
                                 const std::vector<double>& t_grid, std::string series) {
  ExtinctionCurve c;
  c.series = std::move(series);
  c.t_grid = t_grid;
  c.n_replicas = times.size();
  const double last = t_grid.empty() ? 0.0 : max_time(t_grid);
  for (double t : t_grid) {
    std::size_t k = 0;
    for (const auto& e : times) k += (e && at_or_before(*e, t));
    const Proportion p = wilson(k, times.size());
    c.p_hat.push_back(p.p_hat);
    c.ci_low.push_back(p.lo);
    c.ci_high.push_back(p.hi);
    c.ci_half_width.push_back(p.half_width());
  }
  for (const auto& e : times) c.censored_count += !(e && at_or_before(*e, last));
  return c;
}

std::vector<TrajectorySummary> run_replicas(const LatticeState& u0, const ModelParams& p,
                                            TrajectoryConfig cfg, std::size_t n) {
  std::vector<TrajectorySummary> out(n);
  parallel_for(n, [&](std::size_t i) {
    TrajectoryConfig c = cfg;
    c.replica_index = i;
    out[i] = run_trajectory(u0, p, c);
  });
  return out;
}

std::vector<CatalyticSummary> run_catalytic_replicas(const LatticeState& U0, const LatticeState& V0,
                                                     const GeneratorSpec& g, TrajectoryConfig cfg,
                                                     std::size_t n) {
  std::vector<CatalyticSummary> out(n);
  parallel_for(n, [&](std::size_t i) {
    TrajectoryConfig c = cfg;
    c.replica_index = i;
    out[i] = run_catalytic(U0, V0, g, c);
  });
  return out;
}

ExtinctionCurve estimate_extinction_curve(const ModelParams& p, const LatticeState& u0,
                                          const std::vector<double>& t_grid,
                                          std::size_t n_replicas, TrajectoryConfig cfg) {
  cfg.t_end = max_time(t_grid);
  if (u0.empty()) {
    ExtinctionCurve c;
    c.series = "mass";
    c.t_grid = t_grid;
    c.n_replicas = n_replicas;
    c.p_hat.assign(t_grid.size(), 1.0);
    c.ci_low.assign(t_grid.size(), 1.0);
    c.ci_high.assign(t_grid.size(), 1.0);
    c.ci_half_width.assign(t_grid.size(), 0.0);
    return c;
  }
  if (n_replicas < 100) throw std::invalid_argument("estimate_extinction_curve needs at least 100 replicas");
  const auto runs = run_replicas(u0, p, cfg, n_replicas);
  std::vector<std::optional<double>> times;
  times.reserve(runs.size());
  for (const auto& r : runs) times.push_back(r.extinction_time);
  return curve_from_times(times, t_grid, "mass");
}

ExtinctionCurve feller_extinction_curve(double z0, double A, double gamma, double dt,
                                        const std::vector<double>& t_grid, std::size_t n_replicas,
                                        std::uint64_t seed) {
  const double t_end = max_time(t_grid);
  constexpr std::size_t kChunk = 8192;
  const std::size_t chunks = (n_replicas + kChunk - 1) / kChunk;
  std::vector<FellerBatch> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    const std::size_t count = std::min(kChunk, n_replicas - first);
    parts[c] = run_feller_batch(z0, A, gamma, dt, t_end, seed, first, count);
  });
  std::vector<std::optional<double>> times;
  times.reserve(n_replicas);
  for (const auto& b : parts)
    for (double e : b.extinction_time) times.push_back(std::isfinite(e) ? std::optional<double>(e) : std::nullopt);
  return curve_from_times(times, t_grid, "z");
}

double feller_extinction_oracle(double z0, double t) {
  if (!(t > 0)) throw std::invalid_argument("feller_extinction_oracle: t must be positive");
  if (z0 < 0) throw std::invalid_argument("feller_extinction_oracle: z0 must be >= 0");
  return std::exp(-2.0 * z0 / t);
}

void judge(MomentReport& r) {
  const double slack = 1e-12 * (1 + std::fabs(r.oracle_mean));
  if (r.one_sided)
    r.pass_mean = r.sample_mean <= r.oracle_mean + 4 * r.se_mean + slack;
  else
    r.pass_mean = std::fabs(r.sample_mean - r.oracle_mean) <= 4 * r.se_mean + slack;
  if (!std::isfinite(r.var_bound))
    r.pass_var = true;
  else if (r.sample_var <= 0)
    r.pass_var = r.var_bound >= -1e-15;
  else
    r.pass_var = r.sample_var <= r.var_bound * (1 + 4 * r.se_var / r.sample_var) + 1e-15;
}

std::vector<MomentReport> check_mass_martingale(const ModelParams& p, const LatticeState& u0,
                                                const std::vector<double>& times, std::size_t n,
                                                TrajectoryConfig cfg) {
  cfg.t_end = max_time(times);
  cfg.sample_interval = common_interval(times, cfg.dt);
  const double m0 = total_mass(u0);
  const bool cutoff = cfg.box.has_value();
  std::vector<MomentReport> out;
  if (u0.empty() || n == 0) {
    for (double t : times) out.push_back(report_from(cutoff ? "cutoff_mass" : "mass", t, std::vector<double>(n, 0.0), 0.0, kInf, cutoff));
    return out;
  }
  const auto runs = run_replicas(u0, p, cfg, n);
  double removed = 0;
  for (const auto& r : runs) removed = std::max(removed, r.removed_mass);
  for (double t : times) {
    std::vector<double> xs;
    xs.reserve(n);
    for (const auto& r : runs) xs.push_back(t == 0 ? m0 : mass_at(r, t, cfg.dt));
    out.push_back(report_from(cutoff ? "cutoff_mass" : "mass", t, xs, m0, kInf, cutoff));
    out.back().removed_mass = removed;
  }
  return out;
}

double heat_value(const GeneratorSpec& g, const LatticeState& u0, double t, const Site& x) {
  if (x.dim() != g.dim()) throw DimensionMismatch("heat_value: site and generator dimensions differ");
  double s = 0;
  if (g.kind() == GeneratorSpec::Kind::laplacian) {
    for (const auto& [y, m] : u0) s += m * rw_kernel(t, x - y, g.dim(), 1e-13, 2.0);
    return s;
  }
  const KernelTable k = uniformized_kernel(g, t, 1e-13);
  for (const auto& [y, m] : u0) s += m * k.at(x - y);
  return s;
}

CatalyticMoments check_catalytic_moments(const LatticeState& U0, const LatticeState& V0,
                                         const GeneratorSpec& g, double t, const Site& x,
                                         std::size_t n, TrajectoryConfig cfg,
                                         const std::vector<double>& mass_times) {
  std::vector<double> all = mass_times;
  all.push_back(t);
  cfg.t_end = max_time(all);
  cfg.sample_interval = common_interval(all, cfg.dt);
  const auto t_step = static_cast<std::uint64_t>(std::llround(t / cfg.dt));

  struct Out {
    double u = 0, v = 0, removed = 0;
    CatalyticSummary s;
  };
  std::vector<Out> runs(n);
  parallel_for(n, [&](std::size_t i) {
    TrajectoryConfig c = cfg;
    c.replica_index = i;
    Out& o = runs[i];
    if (t_step == 0) {
      o.u = U0.at(x);
      o.v = V0.at(x);
    }
    o.s = run_catalytic(U0, V0, g, c, [&](double tt, const Grid& grid) {
      if (std::llround(tt / c.dt) == static_cast<long long>(t_step)) {
        o.u = grid.value_at(0, x);
        o.v = grid.value_at(1, x);
      }
    });
    o.removed = std::max(o.s.u.removed_mass, o.s.v.removed_mass);
  });

  const double mu = heat_value(g, U0, t, x);
  const double mv = heat_value(g, V0, t, x);
  const double bound = t * mu * mv;
  double removed = 0;
  std::vector<double> us, vs;
  for (const auto& o : runs) {
    us.push_back(o.u);
    vs.push_back(o.v);
    removed = std::max(removed, o.removed);
  }
  CatalyticMoments cm;
  cm.u_site = report_from("catalytic_u_site", t, us, mu, bound, false);
  cm.v_site = report_from("catalytic_v_site", t, vs, mv, bound, false);
  cm.u_site.site = cm.v_site.site = x;
  cm.u_site.removed_mass = cm.v_site.removed_mass = removed;
  const double mu0 = total_mass(U0), mv0 = total_mass(V0);
  for (double tm : mass_times) {
    std::vector<double> a, b;
    for (const auto& o : runs) {
      a.push_back(tm == 0 ? mu0 : mass_at(o.s.u, tm, cfg.dt));
      b.push_back(tm == 0 ? mv0 : mass_at(o.s.v, tm, cfg.dt));
    }
    cm.u_mass.push_back(report_from("catalytic_u_mass", tm, a, mu0, kInf, false));
    cm.v_mass.push_back(report_from("catalytic_v_mass", tm, b, mv0, kInf, false));
    cm.u_mass.back().removed_mass = cm.v_mass.back().removed_mass = removed;
  }
  return cm;
}

Occupancy occupancy_stats(const std::vector<double>& values, double gamma) {
  double mass = 0, pw = 0;
  std::size_t k = 0;
  for (double v : values) {
    if (v < 0) throw std::invalid_argument("occupancy_stats: negative value");
    if (v == 0) continue;
    ++k;
    mass += v;
    pw += std::pow(v, 2 * gamma);
  }
  if (!(mass > 0)) throw std::invalid_argument("occupancy_stats: zero state");
  return {k, std::sqrt(pw) / std::pow(mass, gamma),
          std::pow(static_cast<double>(k), -(2 * gamma - 1) / 2)};
}

Occupancy occupancy_stats(const LatticeState& u, double gamma) {
  std::vector<double> v;
  v.reserve(u.support_size());
  for (const auto& [x, val] : u) v.push_back(val);
  return occupancy_stats(v, gamma);
}

double ConditionReport::witness_value(const std::string& name) const {
  for (const auto& [k, v] : witness)
    if (k == name) return v;
  throw std::out_of_range("no witness named " + name);
}

ConditionReport check_ratio_escape(const LatticeState& U0, const LatticeState& V0,
                                   const GeneratorSpec& g, double t,
                                   const std::vector<Site>& probes, double threshold) {
  ConditionReport r;
  r.predicate = "ratio_escape_proxy";
  r.inputs = {{"t", t}, {"threshold", threshold}, {"probes", static_cast<double>(probes.size())}};
  r.note = "finite-probe proxy for a liminf; not a proof";
  double min_uv = kInf, min_vu = kInf;
  for (const Site& p : probes) {
    for (const Site& x : {p, -p}) {
      const double a = heat_value(g, U0, t, x);
      const double b = heat_value(g, V0, t, x);
      const double uv = b > 0 ? a / b : kInf;
      const double vu = a > 0 ? b / a : kInf;
      r.witness.emplace_back("U/V" + x.to_string(), uv);
      r.witness.emplace_back("V/U" + x.to_string(), vu);
      min_uv = std::min(min_uv, uv);
      min_vu = std::min(min_vu, vu);
    }
  }
  r.witness.emplace_back("min_U/V", min_uv);
  r.witness.emplace_back("min_V/U", min_vu);
  r.verdict = min_uv < threshold && min_vu < threshold;
  return r;
}

ConditionReport check_half_space_separation(const LatticeState& U0, const LatticeState& V0) {
  ConditionReport r;
  r.predicate = "half_space_separation";
  r.verdict = false;
  if (U0.empty() || V0.empty()) {
    r.note = "empty initial data";
    return r;
  }
  auto range = [](const LatticeState& s) {
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (const auto& [x, v] : s) {
      lo = std::min(lo, x[0]);
      hi = std::max(hi, x[0]);
    }
    return std::pair{lo, hi};
  };
  const auto [ulo, uhi] = range(U0);
  const auto [vlo, vhi] = range(V0);
  r.witness = {{"min_U_x1", static_cast<double>(ulo)},
               {"max_U_x1", static_cast<double>(uhi)},
               {"min_V_x1", static_cast<double>(vlo)},
               {"max_V_x1", static_cast<double>(vhi)}};
  r.verdict = vhi > uhi && ulo < vlo;
  if (r.verdict) {
    r.witness.emplace_back("m", static_cast<double>(vhi));
    r.witness.emplace_back("n", static_cast<double>(ulo));
  }
  return r;
}

EnvelopeWindows envelope_windows(double lambda0, double lambda1, double lambda2) {
  if (!(lambda2 > 0) || lambda1 < lambda2 || !(lambda0 > 0))
    throw std::invalid_argument("envelope_windows: need lambda0 > 0 and lambda1 >= lambda2 > 0");
  EnvelopeWindows w;
  w.report.predicate = "envelope_windows";
  w.report.inputs = {{"lambda0", lambda0}, {"lambda1", lambda1}, {"lambda2", lambda2}};
  w.report.verdict = lambda0 > 4 * lambda1 - 3 * lambda2;
  w.report.witness = {{"4*lambda1-3*lambda2", 4 * lambda1 - 3 * lambda2}};
  const Interval beta{2 * lambda1 - 0.5 * (lambda0 + lambda2), lambda2};
  if (!w.report.verdict || beta.empty()) return w;
  w.beta = beta;
  w.beta_mid = beta.mid();
  const Interval alpha{2 * lambda1 - *w.beta_mid, 0.5 * (lambda0 + lambda1)};
  w.report.witness.emplace_back("beta_lo", beta.lo);
  w.report.witness.emplace_back("beta_hi", beta.hi);
  w.report.witness.emplace_back("beta", *w.beta_mid);
  if (!alpha.empty()) {
    w.alpha = alpha;
    w.report.witness.emplace_back("alpha_lo", alpha.lo);
    w.report.witness.emplace_back("alpha_hi", alpha.hi);
  }
  return w;
}

ConditionReport holder_bound_check(const std::vector<double>& f, const std::vector<double>& g,
                                   double gamma) {
  if (f.size() != g.size()) throw std::invalid_argument("holder_bound_check: f and g differ in length");
  if (gamma < 0.5 || gamma > 1) throw std::invalid_argument("holder_bound_check: gamma must lie in [1/2, 1]");
  double lhs = 0, M = 0, K = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < 0 || g[i] < 0) throw std::invalid_argument("holder_bound_check: negative input");
    lhs += std::pow(g[i], 2 - 2 * gamma) * f[i];
    M += f[i];
    K += g[i] * f[i];
  }
  const double rhs = std::pow(K, 2 - 2 * gamma) * std::pow(M, 2 * gamma - 1);
  ConditionReport r;
  r.predicate = "holder_bound";
  r.inputs = {{"gamma", gamma}, {"n", static_cast<double>(f.size())}};
  r.witness = {{"lhs", lhs}, {"rhs", rhs}, {"M", M}, {"K", K}};
  r.verdict = lhs <= rhs * (1 + 1e-12) + 1e-300;
  return r;
}

LatticeState exponential_envelope(int dim, double amplitude, double lambda, int radius) {
  LatticeState u(dim);
  if (amplitude <= 0) return u;
  for (const Site& x : BoxRegion(std::max(radius, 1), dim).sites()) {
    if (x.l1() > radius) continue;
    const double v = amplitude * std::exp(-lambda * static_cast<double>(x.l1()));
    if (v > 0) u.set(x, v);
  }
  return u;
}

EnvelopeScenario envelope_extinction_scenario(const CatalyticParams& params,
                                              const std::vector<double>& etas, double t1,
                                              std::size_t n, TrajectoryConfig cfg, int dim) {
  params.validate();
  if (!envelope_windows(params.lambda0, params.lambda1, params.lambda2).report.verdict)
    throw std::invalid_argument("envelope scenario: infeasible decay rates (need lambda0 > 4 lambda1 - 3 lambda2)");
  const GeneratorSpec g = GeneratorSpec::laplacian(dim);
  const int radius = cfg.truncation_radius > 0 ? cfg.truncation_radius : kDefaultCatalyticRadius;
  cfg.truncation_radius = radius;
  cfg.t_end = t1;
  const LatticeState V0 = exponential_envelope(dim, params.c1, params.lambda1, radius);
  EnvelopeScenario sc;
  for (double eta : etas) {
    if (eta < 0) throw std::invalid_argument("eta must be >= 0");
    const LatticeState U0 = exponential_envelope(dim, eta, params.lambda0, radius);
    EnvelopeRow row{eta, n, 0, {}, 0};
    if (U0.empty()) {
      row.extinct = n;
    } else {
      const auto runs = run_catalytic_replicas(U0, V0, g, cfg, n);
      for (const auto& r : runs) {
        row.extinct += (r.u.extinction_time && at_or_before(*r.u.extinction_time, t1));
        row.max_removed_mass = std::max({row.max_removed_mass, r.u.removed_mass, r.v.removed_mass});
      }
    }
    row.freq = wilson(row.extinct, n);
    sc.rows.push_back(row);
  }
  std::vector<EnvelopeRow> sorted = sc.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.eta < b.eta; });
  sc.monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i - 1].freq.p_hat < sorted[i].freq.p_hat - (sorted[i - 1].freq.half_width() + sorted[i].freq.half_width()))
      sc.monotone = false;
  return sc;
}

PersistenceResult catalytic_persistence(const LatticeState& U0, const LatticeState& V0,
                                        const GeneratorSpec& g, double t, std::size_t n,
                                        TrajectoryConfig cfg) {
  cfg.t_end = t;
  const auto runs = run_catalytic_replicas(U0, V0, g, cfg, n);
  PersistenceResult r{n, 0, {}};
  for (const auto& s : runs)
    r.either_extinct += (s.u.extinction_time && at_or_before(*s.u.extinction_time, t)) ||
                        (s.v.extinction_time && at_or_before(*s.v.extinction_time, t));
  r.freq = wilson(r.either_extinct, n);
  return r;
}

}  // namespace lsde
