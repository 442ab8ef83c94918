#pragma once

#include <ostream>

namespace lsde {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2, kExitGuard = 3 };

// Entry point of the `lsde` executable; output goes to out/err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lsde
