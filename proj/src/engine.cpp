#include "lsde/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lsde/errors.hpp"
#include "lsde/simd/kernels.hpp"

namespace lsde {

std::string_view scheme_name(Scheme s) { return s == Scheme::split ? "split" : "euler"; }

Scheme parse_scheme(std::string_view name) {
  if (name == "split") return Scheme::split;
  if (name == "euler") return Scheme::euler;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected split or euler)");
}

void check_stability(const GeneratorSpec& g, double dt) {
  if (dt * g.qnorm() > kStabilityLimit)
    throw NumericGuardError("stability guard: dt * qnorm = " + std::to_string(dt * g.qnorm()) +
                            " exceeds " + std::to_string(kStabilityLimit));
}

std::uint64_t TrajectoryConfig::steps() const {
  if (t_end <= 0) return 0;
  return static_cast<std::uint64_t>(std::ceil(t_end / dt - 1e-9));
}

std::uint64_t TrajectoryConfig::sample_every() const {
  if (sample_interval > 0)
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(sample_interval / dt)));
  return std::max<std::uint64_t>(1, steps() / 100);
}

void TrajectoryConfig::validate(const GeneratorSpec& g) const {
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be >= 0");
  if (!(gaussian_threshold > 0)) throw std::invalid_argument("gaussian_threshold must be positive");
  if (sample_interval < 0) throw std::invalid_argument("sample_interval must be >= 0");
  if (truncation_radius < 0) throw std::invalid_argument("truncation_radius must be >= 0");
  if (box && box->dim() != g.dim()) throw DimensionMismatch("box and generator dimensions differ");
  if (steps() >= (1ull << 32)) throw std::invalid_argument("too many steps for the noise counter");
  check_stability(g, dt);
}

namespace {

struct RowScratch {
  std::vector<std::uint64_t> keys, codes;
  std::vector<double> g, coef, prod;

  void ensure(std::size_t n, std::uint64_t key) {
    if (keys.size() < n || (!keys.empty() && keys[0] != key)) {
      keys.assign(n, key);
      codes.resize(n);
      g.resize(n);
      coef.resize(n);
      prod.resize(n);
    }
  }
  void fill_codes(const Site& first, std::size_t n) {
    const std::uint64_t c0 = site_code(first);
    const std::uint64_t st = site_code_last_stride(first.dim());
    for (std::size_t j = 0; j < n; ++j) codes[j] = c0 + j * st;
  }
};

void heat_into_scratch(Grid& grid, int k, const GeneratorSpec& gen, double dt) {
  const auto& K = simd::active_kernels();
  std::vector<std::ptrdiff_t> off;
  std::vector<double> rate;
  for (const Jump& j : gen.jumps()) {
    off.push_back(grid.flat_offset(j.offset));
    rate.push_back(j.rate);
  }
  const double keep = 1.0 - dt * gen.qnorm();
  const double* src = grid.layer(k);
  double* dst = grid.scratch(k);
  grid.for_each_interior_row([&](std::size_t start, const Site&, std::size_t n) {
    K.stencil(src + start, dst + start, n, off.data(), rate.data(), off.size(), keep, dt);
  });
}

double scratch_mass(Grid& grid, int k) {
  double s = 0;
  const double* d = grid.scratch(k);
  for (std::size_t f = 0; f < grid.size(); ++f) s += d[f];
  return s;
}

// Exact (or Gaussian, above the threshold) branching over dt for
// du = u^gamma dB, i.e. variance coefficient s2 = u^{2 gamma - 1}.
void branch_power(Grid& grid, int k, double gamma, double dt, const NoiseStream& noise,
                  std::uint32_t step, NoiseChannel ch, double threshold, RowScratch& rs) {
  if (noise.zero()) return;
  const auto& K = simd::active_kernels();
  const double sqdt = std::sqrt(dt);
  const double* src = grid.layer(k);
  double* dst = grid.scratch(k);
  auto s2_of = [gamma](double u) {
    if (gamma == 0.5) return 1.0;
    if (gamma == 1.0) return u;
    return std::pow(u, 2 * gamma - 1);
  };
  const bool finite = std::isfinite(threshold);
  const std::uint64_t cstride = site_code_last_stride(grid.dim());
  grid.for_each_interior_row([&](std::size_t start, const Site& first, std::size_t n) {
    const double* u = src + start;
    double* out = dst + start;
    rs.ensure(n, noise.key());
    bool gauss = false;
    if (finite)
      for (std::size_t j = 0; j < n && !gauss; ++j)
        gauss = u[j] > 0 && 2 * u[j] / (s2_of(u[j]) * dt) >= threshold;
    const std::uint64_t c0 = site_code(first);
    if (gauss) {
      rs.fill_codes(first, n);
      K.gaussians(rs.keys.data(), rs.codes.data(), step, static_cast<std::uint32_t>(ch), n, rs.g.data());
      K.scaled_pow(u, gamma, sqdt, n, rs.coef.data());
      K.noisy_update(u, rs.coef.data(), rs.g.data(), n, out);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (u[j] == 0) {
        out[j] = 0;
        continue;
      }
      const double s2 = s2_of(u[j]);
      if (gauss && 2 * u[j] / (s2 * dt) >= threshold) continue;
      PhiloxStream rng = noise.stream_code(c0 + j * cstride, step, ch);
      out[j] = cb_transition(u[j], s2, dt, rng);
    }
  });
  grid.swap_scratch(k);
}

void branch_catalytic(Grid& grid, double dt, const NoiseStream& noise, std::uint32_t step,
                      double threshold, RowScratch& rs) {
  if (noise.zero()) return;
  const auto& K = simd::active_kernels();
  const double sqdt = std::sqrt(dt);
  const double* su = grid.layer(0);
  const double* sv = grid.layer(1);
  double* du = grid.scratch(0);
  double* dv = grid.scratch(1);
  const bool finite = std::isfinite(threshold);
  const std::uint64_t cstride = site_code_last_stride(grid.dim());
  const auto cu = static_cast<std::uint32_t>(NoiseChannel::primary);
  const auto cv = static_cast<std::uint32_t>(NoiseChannel::partner);
  grid.for_each_interior_row([&](std::size_t start, const Site& first, std::size_t n) {
    const double* U = su + start;
    const double* V = sv + start;
    double* U2 = du + start;
    double* V2 = dv + start;
    rs.ensure(n, noise.key());
    bool gauss = false;
    if (finite)
      for (std::size_t j = 0; j < n && !gauss; ++j)
        gauss = U[j] > 0 && V[j] > 0 &&
                (2 * U[j] / (V[j] * dt) >= threshold || 2 * V[j] / (U[j] * dt) >= threshold);
    const std::uint64_t c0 = site_code(first);
    if (gauss) {
      rs.fill_codes(first, n);
      for (std::size_t j = 0; j < n; ++j) rs.prod[j] = U[j] * V[j];
      K.scaled_pow(rs.prod.data(), 0.5, sqdt, n, rs.coef.data());
      K.gaussians(rs.keys.data(), rs.codes.data(), step, cu, n, rs.g.data());
      K.noisy_update(U, rs.coef.data(), rs.g.data(), n, U2);
      K.gaussians(rs.keys.data(), rs.codes.data(), step, cv, n, rs.g.data());
      K.noisy_update(V, rs.coef.data(), rs.g.data(), n, V2);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (U[j] == 0 || V[j] == 0) {
        U2[j] = U[j];
        V2[j] = V[j];
        continue;
      }
      const std::uint64_t code = c0 + j * cstride;
      if (!(gauss && 2 * U[j] / (V[j] * dt) >= threshold)) {
        PhiloxStream rng = noise.stream_code(code, step, NoiseChannel::primary);
        U2[j] = cb_transition(U[j], V[j], dt, rng);
      }
      if (!(gauss && 2 * V[j] / (U[j] * dt) >= threshold)) {
        PhiloxStream rng = noise.stream_code(code, step, NoiseChannel::partner);
        V2[j] = cb_transition(V[j], U[j], dt, rng);
      }
    }
  });
  grid.swap_scratch(0);
  grid.swap_scratch(1);
}

// Adds u^gamma dB (pre-step u in the layer) to the heat result in scratch.
void euler_noise_power(Grid& grid, int k, double gamma, double dt, const NoiseStream& noise,
                       std::uint32_t step, NoiseChannel ch, RowScratch& rs) {
  if (noise.zero()) return;
  const auto& K = simd::active_kernels();
  const double sqdt = std::sqrt(dt);
  const double* src = grid.layer(k);
  double* dst = grid.scratch(k);
  grid.for_each_interior_row([&](std::size_t start, const Site& first, std::size_t n) {
    const double* u = src + start;
    if (std::none_of(u, u + n, [](double x) { return x > 0; })) return;
    rs.ensure(n, noise.key());
    rs.fill_codes(first, n);
    K.gaussians(rs.keys.data(), rs.codes.data(), step, static_cast<std::uint32_t>(ch), n, rs.g.data());
    K.scaled_pow(u, gamma, sqdt, n, rs.coef.data());
    K.noisy_update(dst + start, rs.coef.data(), rs.g.data(), n, dst + start);
  });
}

void euler_noise_catalytic(Grid& grid, double dt, const NoiseStream& noise, std::uint32_t step,
                           RowScratch& rs) {
  if (noise.zero()) return;
  const auto& K = simd::active_kernels();
  const double sqdt = std::sqrt(dt);
  grid.for_each_interior_row([&](std::size_t start, const Site& first, std::size_t n) {
    const double* U = grid.layer(0) + start;
    const double* V = grid.layer(1) + start;
    rs.ensure(n, noise.key());
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      rs.prod[j] = U[j] * V[j];
      any = any || rs.prod[j] > 0;
    }
    if (!any) return;
    rs.fill_codes(first, n);
    K.scaled_pow(rs.prod.data(), 0.5, sqdt, n, rs.coef.data());
    double* U2 = grid.scratch(0) + start;
    double* V2 = grid.scratch(1) + start;
    K.gaussians(rs.keys.data(), rs.codes.data(), step, static_cast<std::uint32_t>(NoiseChannel::primary), n, rs.g.data());
    K.noisy_update(U2, rs.coef.data(), rs.g.data(), n, U2);
    K.gaussians(rs.keys.data(), rs.codes.data(), step, static_cast<std::uint32_t>(NoiseChannel::partner), n, rs.g.data());
    K.noisy_update(V2, rs.coef.data(), rs.g.data(), n, V2);
  });
}

bool has_limits(const Grid& g) { return g.limits().box > 0 || g.limits().l1 > 0; }

// One step of the power-law system on layer 0. Returns mass removed at the
// window limits.
double advance_power(Grid& grid, const GeneratorSpec& gen, double gamma, double dt,
                     const NoiseStream& noise, std::uint32_t step, const StepOptions& opt,
                     RowScratch& rs) {
  grid.fit();
  const bool track = has_limits(grid);
  double lost = 0;
  if (opt.scheme == Scheme::split) {
    branch_power(grid, 0, gamma, dt, noise, step, NoiseChannel::primary, opt.gaussian_threshold, rs);
    heat_into_scratch(grid, 0, gen, dt);
    if (track) lost = std::max(0.0, grid.mass(0) - scratch_mass(grid, 0));
  } else {
    heat_into_scratch(grid, 0, gen, dt);
    if (track) lost = std::max(0.0, grid.mass(0) - scratch_mass(grid, 0));
    euler_noise_power(grid, 0, gamma, dt, noise, step, NoiseChannel::primary, rs);
  }
  grid.swap_scratch(0);
  return lost + grid.enforce_l1(0);
}

std::pair<double, double> advance_catalytic(Grid& grid, const GeneratorSpec& gen, double dt,
                                            const NoiseStream& noise, std::uint32_t step,
                                            const StepOptions& opt, RowScratch& rs) {
  grid.fit();
  const bool track = has_limits(grid);
  double lost[2] = {0, 0};
  if (opt.scheme == Scheme::split) branch_catalytic(grid, dt, noise, step, opt.gaussian_threshold, rs);
  for (int k = 0; k < 2; ++k) {
    heat_into_scratch(grid, k, gen, dt);
    if (track) lost[k] = std::max(0.0, grid.mass(k) - scratch_mass(grid, k));
  }
  if (opt.scheme == Scheme::euler) euler_noise_catalytic(grid, dt, noise, step, rs);
  for (int k = 0; k < 2; ++k) {
    grid.swap_scratch(k);
    lost[k] += grid.enforce_l1(k);
  }
  return {lost[0], lost[1]};
}

void check_state_dim(const LatticeState& u, int dim) {
  if (u.dim() != dim) throw DimensionMismatch("state and generator dimensions differ");
}

void record(TrajectorySummary& s, const Grid& grid, int k, double t) {
  s.mass_path.emplace_back(t, grid.mass(k));
  s.occupancy_path.emplace_back(t, grid.support(k));
}

}  // namespace

LatticeState step_single_type(const LatticeState& u, const ModelParams& p, double dt,
                              const NoiseStream& noise, std::uint32_t step, const StepOptions& opt) {
  p.validate();
  check_state_dim(u, p.generator.dim());
  check_stability(p.generator, dt);
  Grid grid(p.generator.dim(), p.generator.reach(), 1, {});
  grid.load(0, u);
  RowScratch rs;
  advance_power(grid, p.generator, p.gamma, dt, noise, step, opt, rs);
  return grid.extract(0);
}

LatticeState step_cutoff(const LatticeState& v, const BoxRegion& box, const ModelParams& p,
                         double dt, const NoiseStream& noise, std::uint32_t step,
                         const StepOptions& opt) {
  p.validate();
  check_state_dim(v, p.generator.dim());
  if (box.dim() != p.generator.dim()) throw DimensionMismatch("box and generator dimensions differ");
  for (const auto& [x, val] : v)
    if (!box.contains(x)) throw std::invalid_argument("step_cutoff: support outside the box at " + x.to_string());
  check_stability(p.generator, dt);
  Grid grid(p.generator.dim(), p.generator.reach(), 1, {box.radius(), 0});
  grid.load(0, v);
  RowScratch rs;
  advance_power(grid, p.generator, p.gamma, dt, noise, step, opt, rs);
  return grid.extract(0);
}

std::pair<LatticeState, LatticeState> step_catalytic(const LatticeState& U, const LatticeState& V,
                                                     const GeneratorSpec& g, double dt,
                                                     const NoiseStream& noise, std::uint32_t step,
                                                     const StepOptions& opt) {
  check_state_dim(U, g.dim());
  check_state_dim(V, g.dim());
  check_stability(g, dt);
  Grid grid(g.dim(), g.reach(), 2, {});
  grid.load(0, U);
  grid.load(1, V);
  RowScratch rs;
  advance_catalytic(grid, g, dt, noise, step, opt, rs);
  return {grid.extract(0), grid.extract(1)};
}

double step_feller(double z, double A, double gamma, double dB) {
  if (z <= 0) return 0.0;
  return std::max(0.0, z + A * std::pow(z, gamma) * dB);
}

TrajectorySummary run_trajectory(const LatticeState& u0, const ModelParams& p,
                                 const TrajectoryConfig& cfg, const StateObserver& observer) {
  p.validate();
  cfg.validate(p.generator);
  check_state_dim(u0, p.generator.dim());
  const SiteLimits limits{cfg.box ? cfg.box->radius() : 0, cfg.truncation_radius};
  Grid grid(p.generator.dim(), p.generator.reach(), 1, limits);
  grid.load(0, u0);
  const NoiseStream noise(cfg.seed, cfg.replica_index, cfg.zero_noise);
  const StepOptions opt = cfg.step_options();
  RowScratch rs;

  TrajectorySummary s;
  s.replica = cfg.replica_index;
  record(s, grid, 0, 0.0);
  if (grid.is_zero(0)) {
    s.extinction_time = 0.0;
    s.final_state = LatticeState(p.generator.dim());
    return s;
  }
  const std::uint64_t n = cfg.steps();
  const std::uint64_t every = cfg.sample_every();
  for (std::uint64_t k = 0; k < n; ++k) {
    s.removed_mass += advance_power(grid, p.generator, p.gamma, cfg.dt, noise,
                                    static_cast<std::uint32_t>(k), opt, rs);
    const double t = static_cast<double>(k + 1) * cfg.dt;
    if (observer) observer(t, grid);
    const bool dead = grid.is_zero(0);
    if (dead || (k + 1) % every == 0 || k + 1 == n) record(s, grid, 0, t);
    if (dead) {
      s.extinction_time = t;
      break;
    }
  }
  s.final_state = grid.extract(0);
  return s;
}

CatalyticSummary run_catalytic(const LatticeState& U0, const LatticeState& V0,
                               const GeneratorSpec& g, const TrajectoryConfig& cfg,
                               const StateObserver& observer) {
  cfg.validate(g);
  check_state_dim(U0, g.dim());
  check_state_dim(V0, g.dim());
  const int radius = cfg.truncation_radius > 0 ? cfg.truncation_radius : kDefaultCatalyticRadius;
  const SiteLimits limits{cfg.box ? cfg.box->radius() : 0, radius};
  Grid grid(g.dim(), g.reach(), 2, limits);
  grid.load(0, U0);
  grid.load(1, V0);
  const NoiseStream noise(cfg.seed, cfg.replica_index, cfg.zero_noise);
  const StepOptions opt = cfg.step_options();
  RowScratch rs;

  CatalyticSummary s;
  s.u.replica = s.v.replica = cfg.replica_index;
  TrajectorySummary* sum[2] = {&s.u, &s.v};
  for (int k = 0; k < 2; ++k) {
    record(*sum[k], grid, k, 0.0);
    if (grid.is_zero(k)) sum[k]->extinction_time = 0.0;
  }
  const std::uint64_t n = cfg.steps();
  const std::uint64_t every = cfg.sample_every();
  for (std::uint64_t k = 0; k < n && !(s.u.extinction_time && s.v.extinction_time); ++k) {
    const auto [lu, lv] = advance_catalytic(grid, g, cfg.dt, noise, static_cast<std::uint32_t>(k), opt, rs);
    s.u.removed_mass += lu;
    s.v.removed_mass += lv;
    const double t = static_cast<double>(k + 1) * cfg.dt;
    if (observer) observer(t, grid);
    for (int j = 0; j < 2; ++j) {
      TrajectorySummary& ts = *sum[j];
      if (ts.extinction_time) continue;
      const bool dead = grid.is_zero(j);
      if (dead || (k + 1) % every == 0 || k + 1 == n) record(ts, grid, j, t);
      if (dead) ts.extinction_time = t;
    }
  }
  s.u.final_state = grid.extract(0);
  s.v.final_state = grid.extract(1);
  return s;
}

FellerBatch run_feller_batch(double z0, double A, double gamma, double dt, double t_end,
                             std::uint64_t seed, std::uint64_t first_replica, std::size_t count) {
  if (z0 < 0) throw std::invalid_argument("z0 must be >= 0");
  if (!(A > 0)) throw std::invalid_argument("A must be positive");
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (gamma < 0.5 || gamma > 1) throw std::invalid_argument("gamma must lie in [1/2, 1]");
  FellerBatch b;
  b.extinction_time.assign(count, std::numeric_limits<double>::infinity());
  b.final_z.assign(count, 0.0);
  if (z0 == 0) {
    std::fill(b.extinction_time.begin(), b.extinction_time.end(), 0.0);
    return b;
  }
  std::vector<double> z(count, z0);
  std::vector<std::uint64_t> keys(count);
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) {
    keys[i] = replica_key(seed, first_replica + i);
    idx[i] = i;
  }
  const auto& K = simd::active_kernels();
  const double amp = A * std::sqrt(dt);
  const auto steps = static_cast<std::uint64_t>(t_end > 0 ? std::ceil(t_end / dt - 1e-9) : 0);
  std::size_t m = count;
  for (std::uint64_t k = 0; k < steps && m > 0; ++k) {
    K.feller_em(z.data(), keys.data(), static_cast<std::uint32_t>(k), amp, gamma, m);
    const double t = static_cast<double>(k + 1) * dt;
    std::size_t w = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (z[i] == 0) {
        b.extinction_time[idx[i]] = t;
      } else {
        z[w] = z[i];
        keys[w] = keys[i];
        idx[w] = idx[i];
        ++w;
      }
    }
    m = w;
  }
  for (std::size_t i = 0; i < m; ++i) b.final_z[idx[i]] = z[i];
  return b;
}

std::vector<double> split_weights(const std::vector<double>& w, double gamma) {
  if (gamma < 0.5 || gamma > 1) throw std::invalid_argument("split_weights: gamma must lie in [1/2, 1]");
  double total = 0, pw = 0;
  for (double x : w) {
    if (!(x >= 0) || !std::isfinite(x)) throw std::invalid_argument("split_weights: weights must be finite and >= 0");
    total += x;
    pw += std::pow(x, 2 * gamma);
  }
  std::vector<double> h(w.size(), 0.0);
  if (total == 0) return h;
  const double scale = std::pow(total, gamma) / std::sqrt(pw);
  for (std::size_t i = 0; i < w.size(); ++i) h[i] = std::pow(w[i], gamma) * scale;
  return h;
}

CoupledResult coupled_run(const LatticeState& u0, const LatticeState& v0, const BoxRegion& box,
                          const ModelParams& p, const TrajectoryConfig& cfg) {
  p.validate();
  cfg.validate(p.generator);
  check_state_dim(u0, p.generator.dim());
  check_state_dim(v0, p.generator.dim());
  if (box.dim() != p.generator.dim()) throw DimensionMismatch("box and generator dimensions differ");
  for (const auto& [x, val] : v0) {
    if (!box.contains(x)) throw std::invalid_argument("coupled_run: v0 support outside the box at " + x.to_string());
    if (val > u0.at(x)) throw std::invalid_argument("coupled_run: v0 exceeds u0 at " + x.to_string());
  }
  Grid gu(p.generator.dim(), p.generator.reach(), 1, {});
  Grid gv(p.generator.dim(), p.generator.reach(), 1, {box.radius(), 0});
  gu.load(0, u0);
  gv.load(0, v0);
  const NoiseStream noise(cfg.seed, cfg.replica_index, cfg.zero_noise);
  const StepOptions opt = cfg.step_options();
  RowScratch rs;

  CoupledResult r;
  TrajectorySummary* sum[2] = {&r.free_run, &r.cutoff_run};
  Grid* grids[2] = {&gu, &gv};
  for (int j = 0; j < 2; ++j) {
    sum[j]->replica = cfg.replica_index;
    record(*sum[j], *grids[j], 0, 0.0);
    if (grids[j]->is_zero(0)) sum[j]->extinction_time = 0.0;
  }
  const std::uint64_t n = cfg.steps();
  const std::uint64_t every = cfg.sample_every();
  for (std::uint64_t k = 0; k < n && !(r.free_run.extinction_time && r.cutoff_run.extinction_time); ++k) {
    const auto step = static_cast<std::uint32_t>(k);
    advance_power(gu, p.generator, p.gamma, cfg.dt, noise, step, opt, rs);
    r.cutoff_run.removed_mass += advance_power(gv, p.generator, p.gamma, cfg.dt, noise, step, opt, rs);
    const double t = static_cast<double>(k + 1) * cfg.dt;
    for (int j = 0; j < 2; ++j) {
      TrajectorySummary& ts = *sum[j];
      if (ts.extinction_time) continue;
      const bool dead = grids[j]->is_zero(0);
      if (dead || (k + 1) % every == 0 || k + 1 == n) record(ts, *grids[j], 0, t);
      if (dead) ts.extinction_time = t;
    }
    const double* du = gu.layer(0);
    for (std::size_t f = 0; f < gu.size(); ++f) {
      if (du[f] == 0) continue;
      const Site x = gu.site_at(f);
      if (box.contains(x)) ++r.site_steps;
    }
    const double* dv = gv.layer(0);
    for (std::size_t f = 0; f < gv.size(); ++f) {
      if (dv[f] == 0) continue;
      const double uval = gu.value_at(0, gv.site_at(f));
      if (uval == 0) ++r.site_steps;
      if (dv[f] > uval + 1e-9) ++r.violations;
    }
  }
  r.free_run.final_state = gu.extract(0);
  r.cutoff_run.final_state = gv.extract(0);
  return r;
}

}  // namespace lsde
