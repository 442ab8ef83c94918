#include "lsde/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lsde {

using json = nlohmann::ordered_json;

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string schema_line(const std::string& kind) {
  return "# lsde." + kind + " v" + std::to_string(kSchemaVersion);
}

namespace {

void preamble(std::ostream& out, const std::string& config) {
  std::istringstream in(config);
  for (std::string line; std::getline(in, line);) out << "# " << line << '\n';
}

}  // namespace

void write_curve_csv(std::ostream& out, const std::vector<ExtinctionCurve>& curves,
                     const std::string& config) {
  out << schema_line("curve") << '\n';
  preamble(out, config);
  out << "series,t,p_hat,ci_low,ci_high,ci_half_width,n_replicas,censored\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.t_grid.size(); ++i)
      out << c.series << ',' << csv_number(c.t_grid[i]) << ',' << csv_number(c.p_hat[i]) << ','
          << csv_number(c.ci_low[i]) << ',' << csv_number(c.ci_high[i]) << ','
          << csv_number(c.ci_half_width[i]) << ',' << c.n_replicas << ',' << c.censored_count << '\n';
}

void write_kernel_csv(std::ostream& out, const std::vector<KernelRow>& rows, int d) {
  out << schema_line("kernel") << '\n';
  out << 't';
  for (int i = 1; i <= d; ++i) out << ",x" << i;
  out << ",p,lower,upper\n";
  for (const auto& r : rows) {
    out << csv_number(r.t);
    for (int i = 0; i < d; ++i) out << ',' << r.x[i];
    out << ',' << csv_number(r.p) << ',' << csv_number(r.lower) << ',' << csv_number(r.upper) << '\n';
  }
}

void write_moments_csv(std::ostream& out, const std::vector<MomentReport>& reports,
                       const std::string& config) {
  out << schema_line("moments") << '\n';
  preamble(out, config);
  out << "label,site,time,n,sample_mean,oracle_mean,se_mean,sample_var,var_bound,se_var,"
         "one_sided,pass_mean,pass_var,removed_mass\n";
  for (const auto& r : reports) {
    std::string site;
    if (r.site) {
      site = r.site->to_string();
      for (char& ch : site)
        if (ch == ',') ch = ' ';
    }
    out << r.label << ',' << site << ',' << csv_number(r.time) << ',' << r.n << ','
        << csv_number(r.sample_mean) << ',' << csv_number(r.oracle_mean) << ','
        << csv_number(r.se_mean) << ',' << csv_number(r.sample_var) << ','
        << csv_number(r.var_bound) << ',' << csv_number(r.se_var) << ',' << r.one_sided << ','
        << r.pass_mean << ',' << r.pass_var << ',' << csv_number(r.removed_mass) << '\n';
  }
}

std::string trajectory_header_json(const std::string& model, std::uint64_t seed, std::size_t n,
                                   const std::string& config) {
  json j = {{"schema", "lsde.trajectory"},
            {"version", kSchemaVersion},
            {"model", model},
            {"master_seed", seed},
            {"n_replicas", n},
            {"config", config}};
  return j.dump();
}

std::string trajectory_json(const TrajectorySummary& s, const std::string& series) {
  json j;
  j["replica"] = s.replica;
  j["series"] = series;
  j["extinction_time"] = s.extinction_time ? json(*s.extinction_time) : json(nullptr);
  auto mp = json::array();
  for (const auto& [t, m] : s.mass_path) mp.push_back({t, m});
  j["mass_path"] = std::move(mp);
  auto op = json::array();
  for (const auto& [t, k] : s.occupancy_path) op.push_back({t, k});
  j["occupancy_path"] = std::move(op);
  j["removed_mass"] = s.removed_mass;
  return j.dump();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace lsde
