#include "lsde/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lsde/errors.hpp"
#include "lsde/estimators.hpp"

namespace lsde {

std::string_view model_name(ModelKind m) {
  switch (m) {
    case ModelKind::single: return "single";
    case ModelKind::cutoff: return "cutoff";
    case ModelKind::catalytic: return "catalytic";
    case ModelKind::feller: return "feller";
  }
  return "?";
}

namespace {

using LineMap = std::map<std::string, int>;

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

template <class T>
T as(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field + ": wrong type", line_of(n));
  }
}

void require_map(const YAML::Node& n, const std::string& field) {
  if (!n.IsMap()) throw ConfigError(field + ": expected a mapping", line_of(n));
}

void require_seq(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence()) throw ConfigError(field + ": expected a list", line_of(n));
}

// Rejects keys outside `allowed`; records each key's line under prefix.key.
void check_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& prefix,
                LineMap& lines) {
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (!allowed.count(key)) throw ConfigError("unknown field '" + full + "'", line_of(kv.first));
    lines[full] = line_of(kv.first);
  }
}

std::vector<int> int_list(const YAML::Node& n, const std::string& field) {
  require_seq(n, field);
  std::vector<int> v;
  for (const auto& e : n) v.push_back(as<int>(e, field));
  return v;
}

std::vector<double> double_list(const YAML::Node& n, const std::string& field) {
  require_seq(n, field);
  std::vector<double> v;
  for (const auto& e : n) v.push_back(as<double>(e, field));
  return v;
}

InitialSpec parse_initial(const YAML::Node& n, const std::string& field, LineMap& lines) {
  require_map(n, field);
  check_keys(n, {"type", "points", "lambda", "c", "radius"}, field, lines);
  InitialSpec s;
  const std::string type = n["type"] ? as<std::string>(n["type"], field + ".type") : "delta";
  if (type == "delta") {
    s.kind = InitialSpec::Kind::delta;
    if (n["points"]) {
      require_seq(n["points"], field + ".points");
      for (const auto& p : n["points"]) {
        require_map(p, field + ".points");
        LineMap ignored;
        check_keys(p, {"site", "mass"}, field + ".points", ignored);
        if (!p["site"] || !p["mass"]) throw ConfigError(field + ".points: need site and mass", line_of(p));
        s.points.push_back({int_list(p["site"], field + ".points.site"), as<double>(p["mass"], field + ".points.mass")});
      }
    }
  } else if (type == "envelope") {
    s.kind = InitialSpec::Kind::envelope;
    if (n["lambda"]) s.lambda = as<double>(n["lambda"], field + ".lambda");
    if (n["c"]) s.c = as<double>(n["c"], field + ".c");
    if (n["radius"]) s.radius = as<int>(n["radius"], field + ".radius");
  } else {
    throw ConfigError(field + ".type: expected delta or envelope", line_of(n["type"]));
  }
  return s;
}

struct Checker {
  const LineMap* lines;
  void operator()(bool ok, const std::string& field, const std::string& msg) const {
    if (ok) return;
    int line = 0;
    if (lines) {
      auto it = lines->find(field);
      if (it != lines->end()) line = it->second;
    }
    throw ConfigError(field + ": " + msg, line);
  }
};

bool finite_pos(double v) { return std::isfinite(v) && v > 0; }

void check_initial(const InitialSpec& s, int d, const std::string& field, const Checker& check) {
  if (s.kind == InitialSpec::Kind::delta) {
    for (const auto& p : s.points) {
      check(static_cast<int>(p.site.size()) == d, field + ".points", "site dimension differs from d");
      check(finite_pos(p.mass), field + ".points", "mass must be positive and finite");
    }
  } else {
    check(finite_pos(s.lambda), field + ".lambda", "must be positive");
    check(finite_pos(s.c), field + ".c", "must be positive");
    check(s.radius >= 0, field + ".radius", "must be >= 0");
  }
}

void validate_with(const RunConfig& c, const LineMap* lines) {
  const Checker check{lines};
  check(c.version == kConfigVersion, "version", "unsupported config version");
  check(std::isfinite(c.dt) && c.dt > 0, "dt", "must be positive");
  check(std::isfinite(c.t_end) && c.t_end > 0, "t_end", "must be positive");
  for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
    check(c.t_grid[i] >= 0 && c.t_grid[i] <= c.t_end * (1 + 1e-12), "t_grid", "times must lie in [0, t_end]");
    check(i == 0 || c.t_grid[i] > c.t_grid[i - 1], "t_grid", "times must be increasing");
  }
  check(c.n_replicas >= 1, "n_replicas", "must be >= 1");
  check(c.gaussian_threshold > 0, "gaussian_threshold", "must be positive");
  check(c.truncation_radius >= 0, "truncation_radius", "must be >= 0");
  check(c.sample_interval >= 0, "sample_interval", "must be >= 0");
  check(c.output.format == "jsonl+csv" || c.output.format == "csv", "output.format", "expected jsonl+csv or csv");
  check(!c.output.path.empty(), "output.path", "must not be empty");
  for (double t : c.moments.mass_times) check(t >= 0, "moments.mass_times", "times must be >= 0");
  check(c.moments.time > 0, "moments.time", "must be positive");

  if (c.model == ModelKind::feller) {
    check(c.z0 >= 0 && std::isfinite(c.z0), "z0", "must be >= 0");
    check(finite_pos(c.amplitude), "amplitude", "must be positive");
    check(c.gamma >= 0.5 && c.gamma <= 1, "gamma", "must lie in [1/2, 1]");
    return;
  }
  check(c.d >= 1 && c.d <= kMaxDim, "d", "must lie in 1.." + std::to_string(kMaxDim));
  check(c.gamma >= 0.5 && c.gamma <= 1, "gamma", "must lie in [1/2, 1]");
  GeneratorSpec g = GeneratorSpec::laplacian(c.d);
  if (!c.generator.laplacian) {
    for (const auto& j : c.generator.jumps)
      check(static_cast<int>(j.offset.size()) == c.d, "generator.jumps", "offset dimension differs from d");
    try {
      g = c.generator.build(c.d);
    } catch (const std::invalid_argument& e) {
      check(false, "generator.jumps", e.what());
    }
  }
  check_initial(c.initial, c.d, "initial", check);
  if (c.model == ModelKind::catalytic) {
    check_initial(c.initial_v, c.d, "initial_v", check);
    check(c.moments.site.empty() || static_cast<int>(c.moments.site.size()) == c.d, "moments.site",
          "site dimension differs from d");
  }
  if (c.model == ModelKind::cutoff) {
    check(c.box_radius >= 1, "box_radius", "must be >= 1");
    const LatticeState u0 = c.initial.build(c.d);
    for (const auto& [x, v] : u0)
      for (int i = 0; i < c.d; ++i)
        check(std::abs(x[i]) < c.box_radius, "initial", "support must lie strictly inside the box");
  }
  try {
    c.trajectory().validate(g);
  } catch (const NumericGuardError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    check(false, "dt", e.what());
  }
}

void emit_initial(YAML::Emitter& out, const InitialSpec& s) {
  out << YAML::BeginMap;
  if (s.kind == InitialSpec::Kind::delta) {
    out << YAML::Key << "type" << YAML::Value << "delta";
    out << YAML::Key << "points" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : s.points) {
      out << YAML::BeginMap << YAML::Key << "site" << YAML::Value << YAML::Flow << p.site;
      out << YAML::Key << "mass" << YAML::Value << p.mass << YAML::EndMap;
    }
    out << YAML::EndSeq;
  } else {
    out << YAML::Key << "type" << YAML::Value << "envelope";
    out << YAML::Key << "lambda" << YAML::Value << s.lambda;
    out << YAML::Key << "c" << YAML::Value << s.c;
    out << YAML::Key << "radius" << YAML::Value << s.radius;
  }
  out << YAML::EndMap;
}

}  // namespace

LatticeState InitialSpec::build(int dim) const {
  if (kind == Kind::envelope) return exponential_envelope(dim, c, lambda, radius);
  LatticeState u(dim);
  for (const auto& p : points) {
    if (static_cast<int>(p.site.size()) != dim) throw DimensionMismatch("initial point dimension differs from d");
    u.add(Site::from_coords(p.site), p.mass);
  }
  return u;
}

GeneratorSpec GeneratorConfig::build(int dim) const {
  if (laplacian) return GeneratorSpec::laplacian(dim);
  std::vector<Jump> js;
  for (const auto& j : jumps) js.push_back({Site::from_coords(j.offset), j.rate});
  return GeneratorSpec::explicit_rates(dim, std::move(js));
}

void RunConfig::validate() const { validate_with(*this, nullptr); }

TrajectoryConfig RunConfig::trajectory() const {
  TrajectoryConfig t;
  t.dt = dt;
  t.t_end = t_end;
  t.seed = master_seed;
  t.scheme = scheme;
  t.gaussian_threshold = gaussian_threshold;
  if (model == ModelKind::cutoff) t.box = BoxRegion(box_radius, d);
  t.truncation_radius = truncation_radius;
  t.sample_interval = sample_interval;
  return t;
}

ModelParams RunConfig::params() const { return {gamma, generator.build(d)}; }

std::vector<double> RunConfig::grid() const { return t_grid.empty() ? std::vector<double>{t_end} : t_grid; }

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("syntax error: " + e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError("top level must be a mapping", root.IsDefined() ? line_of(root) : 1);
  LineMap lines;
  check_keys(root,
             {"version", "model", "gamma", "d", "generator", "initial", "initial_v", "box_radius", "z0",
              "amplitude", "dt", "t_end", "t_grid", "n_replicas", "master_seed", "scheme",
              "gaussian_threshold", "truncation_radius", "sample_interval", "moments", "output"},
             "", lines);
  if (!root["model"]) throw ConfigError("missing required field 'model'", 1);

  RunConfig c;
  if (root["version"]) c.version = as<int>(root["version"], "version");
  const std::string model = as<std::string>(root["model"], "model");
  if (model == "single") c.model = ModelKind::single;
  else if (model == "cutoff") c.model = ModelKind::cutoff;
  else if (model == "catalytic") c.model = ModelKind::catalytic;
  else if (model == "feller") c.model = ModelKind::feller;
  else throw ConfigError("model: expected single, cutoff, catalytic or feller", line_of(root["model"]));

  if (root["gamma"]) c.gamma = as<double>(root["gamma"], "gamma");
  if (root["d"]) c.d = as<int>(root["d"], "d");
  if (const auto g = root["generator"]) {
    require_map(g, "generator");
    check_keys(g, {"type", "jumps"}, "generator", lines);
    const std::string type = g["type"] ? as<std::string>(g["type"], "generator.type") : "laplacian";
    if (type == "laplacian") {
      c.generator.laplacian = true;
      if (g["jumps"]) throw ConfigError("generator.jumps: only allowed with type explicit", line_of(g["jumps"]));
    } else if (type == "explicit") {
      c.generator.laplacian = false;
      if (!g["jumps"]) throw ConfigError("generator: explicit type needs jumps", line_of(g));
      require_seq(g["jumps"], "generator.jumps");
      for (const auto& j : g["jumps"]) {
        require_map(j, "generator.jumps");
        LineMap ignored;
        check_keys(j, {"offset", "rate"}, "generator.jumps", ignored);
        if (!j["offset"] || !j["rate"]) throw ConfigError("generator.jumps: need offset and rate", line_of(j));
        c.generator.jumps.push_back({int_list(j["offset"], "generator.jumps.offset"),
                                     as<double>(j["rate"], "generator.jumps.rate")});
      }
    } else {
      throw ConfigError("generator.type: expected laplacian or explicit", line_of(g["type"]));
    }
  }
  if (root["initial"]) c.initial = parse_initial(root["initial"], "initial", lines);
  if (root["initial_v"]) c.initial_v = parse_initial(root["initial_v"], "initial_v", lines);
  if (root["box_radius"]) c.box_radius = as<int>(root["box_radius"], "box_radius");
  if (root["z0"]) c.z0 = as<double>(root["z0"], "z0");
  if (root["amplitude"]) c.amplitude = as<double>(root["amplitude"], "amplitude");
  if (root["dt"]) c.dt = as<double>(root["dt"], "dt");
  if (root["t_end"]) c.t_end = as<double>(root["t_end"], "t_end");
  if (root["t_grid"]) c.t_grid = double_list(root["t_grid"], "t_grid");
  if (root["n_replicas"]) c.n_replicas = as<std::uint64_t>(root["n_replicas"], "n_replicas");
  if (root["master_seed"]) c.master_seed = as<std::uint64_t>(root["master_seed"], "master_seed");
  if (root["scheme"]) {
    const std::string s = as<std::string>(root["scheme"], "scheme");
    try {
      c.scheme = parse_scheme(s);
    } catch (const std::invalid_argument&) {
      throw ConfigError("scheme: expected split or euler", line_of(root["scheme"]));
    }
  }
  if (root["gaussian_threshold"]) c.gaussian_threshold = as<double>(root["gaussian_threshold"], "gaussian_threshold");
  if (root["truncation_radius"]) c.truncation_radius = as<int>(root["truncation_radius"], "truncation_radius");
  if (root["sample_interval"]) c.sample_interval = as<double>(root["sample_interval"], "sample_interval");
  if (const auto m = root["moments"]) {
    require_map(m, "moments");
    check_keys(m, {"site", "time", "mass_times"}, "moments", lines);
    if (m["site"]) c.moments.site = int_list(m["site"], "moments.site");
    if (m["time"]) c.moments.time = as<double>(m["time"], "moments.time");
    if (m["mass_times"]) c.moments.mass_times = double_list(m["mass_times"], "moments.mass_times");
  }
  if (const auto o = root["output"]) {
    require_map(o, "output");
    check_keys(o, {"path", "format"}, "output", lines);
    if (o["path"]) c.output.path = as<std::string>(o["path"], "output.path");
    if (o["format"]) c.output.format = as<std::string>(o["format"], "output.format");
  }
  validate_with(c, &lines);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << c.version;
  out << YAML::Key << "model" << YAML::Value << std::string(model_name(c.model));
  out << YAML::Key << "gamma" << YAML::Value << c.gamma;
  out << YAML::Key << "d" << YAML::Value << c.d;
  out << YAML::Key << "generator" << YAML::Value << YAML::BeginMap;
  if (c.generator.laplacian) {
    out << YAML::Key << "type" << YAML::Value << "laplacian";
  } else {
    out << YAML::Key << "type" << YAML::Value << "explicit";
    out << YAML::Key << "jumps" << YAML::Value << YAML::BeginSeq;
    for (const auto& j : c.generator.jumps) {
      out << YAML::BeginMap << YAML::Key << "offset" << YAML::Value << YAML::Flow << j.offset;
      out << YAML::Key << "rate" << YAML::Value << j.rate << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  out << YAML::Key << "initial" << YAML::Value;
  emit_initial(out, c.initial);
  out << YAML::Key << "initial_v" << YAML::Value;
  emit_initial(out, c.initial_v);
  out << YAML::Key << "box_radius" << YAML::Value << c.box_radius;
  out << YAML::Key << "z0" << YAML::Value << c.z0;
  out << YAML::Key << "amplitude" << YAML::Value << c.amplitude;
  out << YAML::Key << "dt" << YAML::Value << c.dt;
  out << YAML::Key << "t_end" << YAML::Value << c.t_end;
  out << YAML::Key << "t_grid" << YAML::Value << YAML::Flow << c.t_grid;
  out << YAML::Key << "n_replicas" << YAML::Value << c.n_replicas;
  out << YAML::Key << "master_seed" << YAML::Value << c.master_seed;
  out << YAML::Key << "scheme" << YAML::Value << std::string(scheme_name(c.scheme));
  out << YAML::Key << "gaussian_threshold" << YAML::Value << c.gaussian_threshold;
  out << YAML::Key << "truncation_radius" << YAML::Value << c.truncation_radius;
  out << YAML::Key << "sample_interval" << YAML::Value << c.sample_interval;
  out << YAML::Key << "moments" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "site" << YAML::Value << YAML::Flow << c.moments.site;
  out << YAML::Key << "time" << YAML::Value << c.moments.time;
  out << YAML::Key << "mass_times" << YAML::Value << YAML::Flow << c.moments.mass_times;
  out << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "path" << YAML::Value << c.output.path;
  out << YAML::Key << "format" << YAML::Value << c.output.format;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace lsde
