#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lsde/engine.hpp"
#include "lsde/lattice.hpp"
#include "lsde/stats.hpp"

namespace lsde {

struct ExtinctionCurve {
  std::string series;  // which process the curve describes ("u", "v", "mass", "z")
  std::vector<double> t_grid;
  std::vector<double> p_hat;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<double> ci_half_width;
  std::size_t n_replicas = 0;
  std::size_t censored_count = 0;  // alive at the last grid time
};

// p_hat(t) = fraction of times <= t; empty optionals are survivors.
ExtinctionCurve curve_from_times(const std::vector<std::optional<double>>& times,
                                 const std::vector<double>& t_grid, std::string series);

// Runs replicas 0..n-1 of cfg (replica_index overridden) in parallel.
std::vector<TrajectorySummary> run_replicas(const LatticeState& u0, const ModelParams& p,
                                            TrajectoryConfig cfg, std::size_t n);
std::vector<CatalyticSummary> run_catalytic_replicas(const LatticeState& U0, const LatticeState& V0,
                                                     const GeneratorSpec& g, TrajectoryConfig cfg,
                                                     std::size_t n);

// Single-type (or cutoff, when cfg.box is set) curve; cfg.t_end is replaced
// by the last grid time. Needs n_replicas >= 100 unless u0 is zero, in which
// case the curve is exactly 1 with zero width.
ExtinctionCurve estimate_extinction_curve(const ModelParams& p, const LatticeState& u0,
                                          const std::vector<double>& t_grid,
                                          std::size_t n_replicas, TrajectoryConfig cfg);

// dZ = A Z^gamma dB by clamped Euler, n replicas.
ExtinctionCurve feller_extinction_curve(double z0, double A, double gamma, double dt,
                                        const std::vector<double>& t_grid, std::size_t n_replicas,
                                        std::uint64_t seed);

// P(Z hits 0 by t) for dZ = sqrt(Z) dB: exp(-2 z0 / t).
double feller_extinction_oracle(double z0, double t);

struct MomentReport {
  std::string label;
  std::optional<Site> site;
  double time = 0;
  std::size_t n = 0;
  double sample_mean = 0;
  double oracle_mean = 0;
  double se_mean = 0;
  double sample_var = 0;
  double var_bound = 0;  // infinity when no bound applies
  double se_var = 0;
  bool one_sided = false;  // mean only required to stay below oracle + 4 SE
  bool pass_mean = false;
  bool pass_var = false;
  double removed_mass = 0;  // largest truncation loss over replicas
};

// Applies the pass rules to filled-in statistics.
void judge(MomentReport& r);

// Total-mass reports at each time in `times` from one set of n replicas.
// With cfg.box set the reports are one-sided (supermartingale).
std::vector<MomentReport> check_mass_martingale(const ModelParams& p, const LatticeState& u0,
                                                const std::vector<double>& times, std::size_t n,
                                                TrajectoryConfig cfg);

struct CatalyticMoments {
  MomentReport u_site;  // U_t(x) against U_0 P_t(x) and t U_0P_t(x) V_0P_t(x)
  MomentReport v_site;
  std::vector<MomentReport> u_mass;  // <U_t, 1> at each requested time
  std::vector<MomentReport> v_mass;
};

CatalyticMoments check_catalytic_moments(const LatticeState& U0, const LatticeState& V0,
                                         const GeneratorSpec& g, double t, const Site& x,
                                         std::size_t n, TrajectoryConfig cfg,
                                         const std::vector<double>& mass_times = {});

struct Occupancy {
  std::size_t support_size;
  double clump_ratio;  // (sum u^{2 gamma})^{1/2} / (sum u)^gamma
  double floor;        // support_size^{-(2 gamma - 1)/2}
};

// Throws std::invalid_argument on the zero state.
Occupancy occupancy_stats(const LatticeState& u, double gamma);
Occupancy occupancy_stats(const std::vector<double>& values, double gamma);

struct ConditionReport {
  std::string predicate;
  std::vector<std::pair<std::string, double>> inputs;
  bool verdict = false;
  std::vector<std::pair<std::string, double>> witness;
  std::string note;

  double witness_value(const std::string& name) const;
};

// U_0P_t(x) computed pointwise (series for the Laplacian, uniformization
// otherwise).
double heat_value(const GeneratorSpec& g, const LatticeState& u0, double t, const Site& x);

// Finite-probe proxy for the two-sided vanishing of U_0P_t/V_0P_t: evaluates
// both ratios at each probe and its reflection; verdict = both minima below
// `threshold`.
ConditionReport check_ratio_escape(const LatticeState& U0, const LatticeState& V0,
                                   const GeneratorSpec& g, double t,
                                   const std::vector<Site>& probes, double threshold = 0.01);

// Exact half-space separation of the initial data along the first
// coordinate: some m > n with U_0 = 0 on {x_1 >= m}, V_0 > 0 there, and
// V_0 = 0 on {x_1 <= n}, U_0 > 0 there.
ConditionReport check_half_space_separation(const LatticeState& U0, const LatticeState& V0);

struct Interval {
  double lo;
  double hi;
  bool empty() const { return !(lo < hi); }
  double mid() const { return 0.5 * (lo + hi); }
};

struct EnvelopeWindows {
  ConditionReport report;
  std::optional<Interval> beta;   // (2 l1 - (l0 + l2)/2, l2)
  std::optional<double> beta_mid;
  std::optional<Interval> alpha;  // (2 l1 - beta_mid, (l0 + l1)/2)
};

// Feasibility of the decay-rate windows for catalytic extinction:
// verdict = l0 > 4 l1 - 3 l2. Requires l1 >= l2 > 0.
EnvelopeWindows envelope_windows(double lambda0, double lambda1, double lambda2);

// sum g^{2-2 gamma} f <= K^{2-2 gamma} M^{2 gamma - 1}, M = sum f, K = sum g f.
ConditionReport holder_bound_check(const std::vector<double>& f, const std::vector<double>& g,
                                   double gamma);

struct EnvelopeRow {
  double eta;
  std::size_t n;
  std::size_t extinct;  // U identically zero from t1 on
  Proportion freq;
  double max_removed_mass;
};

struct EnvelopeScenario {
  std::vector<EnvelopeRow> rows;
  bool monotone;  // freq non-increasing in eta up to the summed CI half-widths
};

// U0 = eta e^{-l0 |x|}, V0 = c1 e^{-l1 |x|} on |x| <= R (cfg.truncation_radius,
// default 200); frequency of U extinct by t1 for each eta.
EnvelopeScenario envelope_extinction_scenario(const CatalyticParams& params,
                                              const std::vector<double>& etas, double t1,
                                              std::size_t n, TrajectoryConfig cfg, int dim = 1);

LatticeState exponential_envelope(int dim, double amplitude, double lambda, int radius);

struct PersistenceResult {
  std::size_t n;
  std::size_t either_extinct;
  Proportion freq;
};

// Frequency that U or V is extinct by t for the given catalytic initial data.
PersistenceResult catalytic_persistence(const LatticeState& U0, const LatticeState& V0,
                                        const GeneratorSpec& g, double t, std::size_t n,
                                        TrajectoryConfig cfg);

}  // namespace lsde
