#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "lsde/grid.hpp"
#include "lsde/lattice.hpp"
#include "lsde/noise.hpp"

namespace lsde {

// split: exact branching substep (frozen coefficients) followed by an explicit
//        heat substep. Reaches the all-zero state with positive probability.
// euler: u' = max(0, u + dt Q u + u^gamma dB) in one step. On the lattice a
//        zero site next to mass always gains mass, so this never goes extinct.
enum class Scheme { split, euler };

std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

// dt * qnorm must not exceed this.
inline constexpr double kStabilityLimit = 0.1;
// Throws NumericGuardError when dt is too large for the generator.
void check_stability(const GeneratorSpec& g, double dt);

inline constexpr int kDefaultCatalyticRadius = 200;

struct StepOptions {
  Scheme scheme = Scheme::split;
  // Branching sites whose Poisson mean reaches this use the moment-matched
  // Gaussian transition instead of the exact Poisson-Gamma one.
  double gaussian_threshold = 1000.0;
};

struct TrajectoryConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t replica_index = 0;
  Scheme scheme = Scheme::split;
  double gaussian_threshold = 1000.0;
  std::optional<BoxRegion> box;  // Dirichlet cutoff when set
  int truncation_radius = 0;     // l1 truncation; 0 = none (catalytic runs default to 200)
  double sample_interval = 0;    // 0 = t_end / 100
  bool zero_noise = false;

  std::uint64_t steps() const;
  std::uint64_t sample_every() const;
  StepOptions step_options() const { return {scheme, gaussian_threshold}; }
  // Throws NumericGuardError (stability) or std::invalid_argument.
  void validate(const GeneratorSpec& g) const;
};

struct TrajectorySummary {
  std::uint64_t replica = 0;
  std::optional<double> extinction_time;  // empty = survived to t_end
  std::vector<std::pair<double, double>> mass_path;
  std::vector<std::pair<double, std::size_t>> occupancy_path;
  LatticeState final_state;
  // Mass removed by the truncation radius or lost through the box boundary.
  double removed_mass = 0;

  friend bool operator==(const TrajectorySummary&, const TrajectorySummary&) = default;
};

struct CatalyticSummary {
  TrajectorySummary u;
  TrajectorySummary v;
};

// Called after every step with the time and the current grid.
using StateObserver = std::function<void(double t, const Grid& grid)>;

// One step of each system from a sparse state. `step` indexes the noise.
LatticeState step_single_type(const LatticeState& u, const ModelParams& p, double dt,
                              const NoiseStream& noise, std::uint32_t step,
                              const StepOptions& opt = {});
LatticeState step_cutoff(const LatticeState& v, const BoxRegion& box, const ModelParams& p,
                         double dt, const NoiseStream& noise, std::uint32_t step,
                         const StepOptions& opt = {});
std::pair<LatticeState, LatticeState> step_catalytic(const LatticeState& U, const LatticeState& V,
                                                     const GeneratorSpec& g, double dt,
                                                     const NoiseStream& noise, std::uint32_t step,
                                                     const StepOptions& opt = {});
// z' = max(0, z + A z^gamma dB).
double step_feller(double z, double A, double gamma, double dB);

// Single-type run; cutoff run when cfg.box is set.
TrajectorySummary run_trajectory(const LatticeState& u0, const ModelParams& p,
                                 const TrajectoryConfig& cfg,
                                 const StateObserver& observer = nullptr);

CatalyticSummary run_catalytic(const LatticeState& U0, const LatticeState& V0,
                               const GeneratorSpec& g, const TrajectoryConfig& cfg,
                               const StateObserver& observer = nullptr);

struct FellerBatch {
  std::vector<double> extinction_time;  // +inf when alive at t_end
  std::vector<double> final_z;
};

// Replicas first_replica .. first_replica + count - 1 of dZ = A Z^gamma dB by
// clamped Euler steps, vectorised across replicas.
FellerBatch run_feller_batch(double z0, double A, double gamma, double dt, double t_end,
                             std::uint64_t seed, std::uint64_t first_replica, std::size_t count);

// h_i = w_i^gamma (sum w)^gamma / (sum w^{2 gamma})^{1/2}; zeros when sum w = 0.
std::vector<double> split_weights(const std::vector<double>& w, double gamma);

struct CoupledResult {
  TrajectorySummary free_run;
  TrajectorySummary cutoff_run;
  std::uint64_t violations = 0;  // (site, step) pairs with v > u + 1e-9
  std::uint64_t site_steps = 0;  // (site, step) pairs with u or v positive on D_N
};

// Free and cutoff systems driven by the same Gaussian increments.
CoupledResult coupled_run(const LatticeState& u0, const LatticeState& v0, const BoxRegion& box,
                          const ModelParams& p, const TrajectoryConfig& cfg);

}  // namespace lsde
