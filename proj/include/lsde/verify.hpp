#pragma once

#include <string>
#include <vector>

namespace lsde {

struct InvariantResult {
  std::string suite;
  std::string name;
  double measured;
  double bound;
  bool pass;
  std::string detail;
};

struct VerifyOptions {
  // Series tolerance used by the kernel suite. Test fixtures loosen it to
  // check that the suite notices.
  double kernel_tol = 1e-12;
};

// suite in {kernel, engine, estimators, all}; std::invalid_argument otherwise.
std::vector<InvariantResult> run_suite(const std::string& suite, const VerifyOptions& opt = {});

// {"suite":..,"invariant":..,"measured":..,"bound":..,"pass":..}
std::string invariant_json(const InvariantResult& r);

}  // namespace lsde
