#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "lsde/engine.hpp"
#include "lsde/estimators.hpp"

namespace lsde {

// Bumped whenever a CSV header or JSON key changes; golden tests pin it.
inline constexpr int kSchemaVersion = 1;

// 12 significant digits; "inf", "-inf", "nan" for non-finite values.
std::string csv_number(double v);

// First line of every CSV: "# lsde.<kind> v<version>".
std::string schema_line(const std::string& kind);

// Each line of `config` is copied into the preamble as a "# " comment.
void write_curve_csv(std::ostream& out, const std::vector<ExtinctionCurve>& curves,
                     const std::string& config = {});

struct KernelRow {
  double t;
  Site x;
  double p;
  double lower;
  double upper;
};
void write_kernel_csv(std::ostream& out, const std::vector<KernelRow>& rows, int d);

void write_moments_csv(std::ostream& out, const std::vector<MomentReport>& reports,
                       const std::string& config = {});

// JSON lines: one header object, then one object per summary.
std::string trajectory_header_json(const std::string& model, std::uint64_t seed, std::size_t n,
                                   const std::string& config = {});
std::string trajectory_json(const TrajectorySummary& s, const std::string& series);

// Writes to path.tmp and renames, so a failed run leaves no partial file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace lsde
