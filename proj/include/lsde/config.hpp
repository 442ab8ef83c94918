#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsde/engine.hpp"
#include "lsde/lattice.hpp"

namespace lsde {

inline constexpr int kConfigVersion = 1;

enum class ModelKind { single, cutoff, catalytic, feller };

std::string_view model_name(ModelKind m);

struct DeltaPoint {
  std::vector<int> site;
  double mass = 0;
  friend bool operator==(const DeltaPoint&, const DeltaPoint&) = default;
};

// Either a list of point masses or c e^{-lambda |x|} on |x| <= radius.
struct InitialSpec {
  enum class Kind { delta, envelope };
  Kind kind = Kind::delta;
  std::vector<DeltaPoint> points;
  double lambda = 1;
  double c = 1;
  int radius = 0;

  LatticeState build(int dim) const;
  friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

struct JumpSpec {
  std::vector<int> offset;
  double rate = 0;
  friend bool operator==(const JumpSpec&, const JumpSpec&) = default;
};

struct GeneratorConfig {
  bool laplacian = true;
  std::vector<JumpSpec> jumps;  // used when laplacian is false

  GeneratorSpec build(int dim) const;
  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

struct MomentsConfig {
  std::vector<int> site;           // probe for the catalytic site moments
  double time = 0.5;               // probe time for the site moments
  std::vector<double> mass_times;  // total-mass check times
  friend bool operator==(const MomentsConfig&, const MomentsConfig&) = default;
};

struct OutputConfig {
  std::string path = "lsde_out";  // file prefix
  std::string format = "jsonl+csv";  // or "csv" (curve only)
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  int version = kConfigVersion;
  ModelKind model = ModelKind::single;
  double gamma = 0.5;
  int d = 1;
  GeneratorConfig generator;
  InitialSpec initial;    // single, cutoff; U for catalytic
  InitialSpec initial_v;  // catalytic only
  int box_radius = 0;     // cutoff only
  double z0 = 1;          // feller only
  double amplitude = 1;   // feller only
  double dt = 1e-3;
  double t_end = 1;
  std::vector<double> t_grid;
  std::uint64_t n_replicas = 100;
  std::uint64_t master_seed = 0;
  Scheme scheme = Scheme::split;
  double gaussian_threshold = 1000;
  int truncation_radius = 0;
  double sample_interval = 0;
  MomentsConfig moments;
  OutputConfig output;

  // Checks every module precondition. ConfigError for bad values,
  // NumericGuardError for the stability bound.
  void validate() const;
  TrajectoryConfig trajectory() const;
  ModelParams params() const;
  // t_grid, or t_end alone when empty.
  std::vector<double> grid() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// ConfigError (with the offending line) on syntax errors, unknown fields,
// wrong types or invalid values.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);
std::string emit_config(const RunConfig& c);

}  // namespace lsde
