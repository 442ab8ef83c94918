#include "lsde/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lsde/config.hpp"
#include "lsde/errors.hpp"
#include "lsde/estimators.hpp"
#include "lsde/kernel.hpp"
#include "lsde/parallel.hpp"
#include "lsde/report_io.hpp"
#include "lsde/verify.hpp"

namespace lsde {

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

RunConfig load_with(const std::string& path, const Overrides& o) {
  RunConfig c = load_config(path);
  if (o.seed) c.master_seed = *o.seed;
  if (o.out) c.output.path = *o.out;
  c.validate();
  return c;
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::vector<std::optional<double>> ext_times(const std::vector<TrajectorySummary>& runs) {
  std::vector<std::optional<double>> t;
  for (const auto& r : runs) t.push_back(r.extinction_time);
  return t;
}

struct Artifacts {
  std::vector<std::string> json_lines;
  std::vector<ExtinctionCurve> curves;
};

std::vector<TrajectorySummary> feller_summaries(const RunConfig& c) {
  const FellerBatch b = run_feller_batch(c.z0, c.amplitude, c.gamma, c.dt, c.t_end, c.master_seed, 0,
                                         static_cast<std::size_t>(c.n_replicas));
  std::vector<TrajectorySummary> out(b.final_z.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].replica = i;
    if (std::isfinite(b.extinction_time[i])) out[i].extinction_time = b.extinction_time[i];
    out[i].mass_path = {{0.0, c.z0}, {c.t_end, b.final_z[i]}};
  }
  return out;
}

Artifacts simulate(const RunConfig& c) {
  Artifacts a;
  const auto grid = c.grid();
  const std::size_t n = static_cast<std::size_t>(c.n_replicas);
  const std::string model(model_name(c.model));
  a.json_lines.push_back(trajectory_header_json(model, c.master_seed, n, emit_config(c)));
  switch (c.model) {
    case ModelKind::single:
    case ModelKind::cutoff: {
      const auto runs = run_replicas(c.initial.build(c.d), c.params(), c.trajectory(), n);
      for (const auto& r : runs) a.json_lines.push_back(trajectory_json(r, "u"));
      a.curves.push_back(curve_from_times(ext_times(runs), grid, "u"));
      break;
    }
    case ModelKind::catalytic: {
      const auto runs = run_catalytic_replicas(c.initial.build(c.d), c.initial_v.build(c.d),
                                               c.generator.build(c.d), c.trajectory(), n);
      std::vector<std::optional<double>> tu, tv, te;
      for (const auto& r : runs) {
        a.json_lines.push_back(trajectory_json(r.u, "u"));
        a.json_lines.push_back(trajectory_json(r.v, "v"));
        tu.push_back(r.u.extinction_time);
        tv.push_back(r.v.extinction_time);
        if (r.u.extinction_time && r.v.extinction_time)
          te.push_back(std::min(*r.u.extinction_time, *r.v.extinction_time));
        else if (r.u.extinction_time || r.v.extinction_time)
          te.push_back(r.u.extinction_time ? r.u.extinction_time : r.v.extinction_time);
        else
          te.push_back(std::nullopt);
      }
      a.curves.push_back(curve_from_times(tu, grid, "u"));
      a.curves.push_back(curve_from_times(tv, grid, "v"));
      a.curves.push_back(curve_from_times(te, grid, "either"));
      break;
    }
    case ModelKind::feller: {
      const auto runs = feller_summaries(c);
      for (const auto& r : runs) a.json_lines.push_back(trajectory_json(r, "z"));
      a.curves.push_back(curve_from_times(ext_times(runs), grid, "z"));
      break;
    }
  }
  return a;
}

std::vector<ExtinctionCurve> curves(const RunConfig& c) {
  const auto grid = c.grid();
  const std::size_t n = static_cast<std::size_t>(c.n_replicas);
  switch (c.model) {
    case ModelKind::single:
    case ModelKind::cutoff: {
      try {
        return {estimate_extinction_curve(c.params(), c.initial.build(c.d), grid, n, c.trajectory())};
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("n_replicas: ") + e.what());
      }
    }
    case ModelKind::catalytic:
    case ModelKind::feller: {
      Artifacts a = simulate(c);
      return a.curves;
    }
  }
  return {};
}

std::vector<MomentReport> moments(const RunConfig& c) {
  const std::size_t n = static_cast<std::size_t>(c.n_replicas);
  std::vector<double> times = c.moments.mass_times.empty() ? c.grid() : c.moments.mass_times;
  switch (c.model) {
    case ModelKind::single:
    case ModelKind::cutoff:
      return check_mass_martingale(c.params(), c.initial.build(c.d), times, n, c.trajectory());
    case ModelKind::catalytic: {
      const Site x = c.moments.site.empty() ? Site::origin(c.d) : Site::from_coords(c.moments.site);
      const CatalyticMoments m = check_catalytic_moments(c.initial.build(c.d), c.initial_v.build(c.d),
                                                         c.generator.build(c.d), c.moments.time, x, n,
                                                         c.trajectory(), c.moments.mass_times);
      std::vector<MomentReport> out{m.u_site, m.v_site};
      out.insert(out.end(), m.u_mass.begin(), m.u_mass.end());
      out.insert(out.end(), m.v_mass.begin(), m.v_mass.end());
      return out;
    }
    case ModelKind::feller: {
      const FellerBatch b = run_feller_batch(c.z0, c.amplitude, c.gamma, c.dt, c.t_end, c.master_seed, 0, n);
      const SampleMoments s = sample_moments(b.final_z);
      MomentReport r;
      r.label = "feller_z";
      r.time = c.t_end;
      r.n = s.n;
      r.sample_mean = s.mean;
      r.oracle_mean = c.z0;
      r.se_mean = s.se_mean;
      r.sample_var = s.var;
      r.var_bound = std::numeric_limits<double>::infinity();
      r.se_var = s.se_var;
      judge(r);
      return {r};
    }
  }
  return {};
}

std::vector<double> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) {
      const int v = std::stoi(s);
      return {static_cast<double>(v), static_cast<double>(v)};
    }
    return {static_cast<double>(std::stoi(s.substr(0, colon))), static_cast<double>(std::stoi(s.substr(colon + 1)))};
  } catch (const std::exception&) {
    throw ConfigError("--x: expected an integer or a range a:b, got '" + s + "'");
  }
}

std::string kernel_table(int d, const std::vector<double>& ts, const std::string& xrange, double tol,
                         double rate) {
  if (!(tol > 0)) throw ConfigError("--tol must be positive");
  if (d < 1 || d > kMaxDim) throw ConfigError("--d must lie in 1.." + std::to_string(kMaxDim));
  if (!(rate > 0)) throw ConfigError("--rate must be positive");
  for (double t : ts)
    if (!(t >= 0) || !std::isfinite(t)) throw ConfigError("--t values must be finite and >= 0");
  const auto r = parse_range(xrange);
  const int lo = static_cast<int>(r[0]), hi = static_cast<int>(r[1]);
  if (lo > hi) throw ConfigError("--x: empty range");
  std::vector<KernelRow> rows;
  std::vector<int> c(static_cast<std::size_t>(d), lo);
  for (double t : ts) {
    std::fill(c.begin(), c.end(), lo);
    for (;;) {
      const Site x = Site::from_coords(c);
      const KernelBounds b = series_sandwich(t, x, rate);
      rows.push_back({t, x, rw_kernel(t, x, d, tol, rate), b.lower, b.upper});
      int i = d - 1;
      while (i >= 0 && c[static_cast<std::size_t>(i)] == hi) c[static_cast<std::size_t>(i--)] = lo;
      if (i < 0) break;
      ++c[static_cast<std::size_t>(i)];
    }
  }
  std::ostringstream os;
  write_kernel_csv(os, rows, d);
  return os.str();
}

void add_overrides(CLI::App* sub, std::string& config, Overrides& o) {
  sub->add_option("config", config, "YAML run configuration")->required();
  sub->add_option("--seed", o.seed, "override master_seed");
  sub->add_option("--out", o.out, "override output.path");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lattice SDE simulator: extinction, moments and heat-kernel tools"};
  app.require_subcommand(1);
  std::string config;
  Overrides ov;

  auto* sim = app.add_subcommand("simulate", "run replicas; write trajectories (JSON lines) and a curve CSV");
  add_overrides(sim, config, ov);
  auto* cur = app.add_subcommand("curve", "extinction-probability curve CSV");
  add_overrides(cur, config, ov);
  auto* mom = app.add_subcommand("moments", "moment checks against heat-flow oracles");
  add_overrides(mom, config, ov);

  auto* ker = app.add_subcommand("kernel", "tabulate random-walk kernels with sandwich bounds");
  int d = 1;
  std::vector<double> ts{1.0};
  std::string xrange = "0:8";
  double tol = kDefaultKernelTol, rate = 1.0;
  std::optional<std::string> kout;
  ker->add_option("--d", d, "dimension");
  ker->add_option("--t", ts, "times (comma separated)")->delimiter(',');
  ker->add_option("--x", xrange, "coordinate range a:b applied to each axis");
  ker->add_option("--tol", tol, "series tolerance");
  ker->add_option("--rate", rate, "jump rate per coordinate");
  ker->add_option("--out", kout, "CSV path (default stdout)");

  auto* ver = app.add_subcommand("verify", "run invariant suites");
  std::string suite;
  std::optional<std::string> vout;
  ver->add_option("suite", suite, "kernel, engine, estimators or all")->required();
  ver->add_option("--out", vout, "also write the JSON lines here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) {
      const RunConfig c = load_with(config, ov);
      const Artifacts a = simulate(c);
      std::string curve, jl;
      std::ostringstream cs;
      write_curve_csv(cs, a.curves, emit_config(c));
      ensure_parent(c.output.path);
      if (c.output.format == "jsonl+csv") {
        for (const auto& l : a.json_lines) jl += l + "\n";
        write_file_atomic(c.output.path + ".trajectories.jsonl", jl);
        out << "wrote " << c.output.path << ".trajectories.jsonl\n";
      }
      write_file_atomic(c.output.path + ".curve.csv", cs.str());
      out << "wrote " << c.output.path << ".curve.csv\n";
      return kExitOk;
    }
    if (cur->parsed()) {
      const RunConfig c = load_with(config, ov);
      std::ostringstream cs;
      write_curve_csv(cs, curves(c), emit_config(c));
      ensure_parent(c.output.path);
      write_file_atomic(c.output.path + ".curve.csv", cs.str());
      out << "wrote " << c.output.path << ".curve.csv\n";
      return kExitOk;
    }
    if (mom->parsed()) {
      const RunConfig c = load_with(config, ov);
      const auto reports = moments(c);
      std::ostringstream ms;
      write_moments_csv(ms, reports, emit_config(c));
      ensure_parent(c.output.path);
      write_file_atomic(c.output.path + ".moments.csv", ms.str());
      bool ok = true;
      for (const auto& r : reports) {
        ok = ok && r.pass_mean && r.pass_var;
        out << (r.pass_mean && r.pass_var ? "PASS " : "FAIL ") << r.label << " t=" << csv_number(r.time)
            << " mean=" << csv_number(r.sample_mean) << " oracle=" << csv_number(r.oracle_mean)
            << " se=" << csv_number(r.se_mean) << " var=" << csv_number(r.sample_var)
            << " var_bound=" << csv_number(r.var_bound) << '\n';
      }
      out << "wrote " << c.output.path << ".moments.csv\n";
      return ok ? kExitOk : kExitAssertion;
    }
    if (ker->parsed()) {
      const std::string csv = kernel_table(d, ts, xrange, tol, rate);
      if (kout) {
        ensure_parent(*kout);
        write_file_atomic(*kout, csv);
      } else {
        out << csv;
      }
      return kExitOk;
    }
    if (ver->parsed()) {
      std::vector<InvariantResult> rs;
      try {
        rs = run_suite(suite);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      std::string lines;
      std::size_t failed = 0;
      for (const auto& r : rs) {
        lines += invariant_json(r) + "\n";
        failed += !r.pass;
      }
      nlohmann::ordered_json s;
      s["summary"] = suite;
      s["passed"] = rs.size() - failed;
      s["failed"] = failed;
      lines += s.dump() + "\n";
      out << lines;
      if (vout) {
        ensure_parent(*vout);
        write_file_atomic(*vout, lines);
      }
      return failed ? kExitAssertion : kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericGuardError& e) {
    err << "numeric guard: " << e.what() << '\n';
    return kExitGuard;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace lsde
