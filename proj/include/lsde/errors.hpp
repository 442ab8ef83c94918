#pragma once

#include <stdexcept>
#include <string>

namespace lsde {

// Inputs whose dimensions disagree (site vs. state vs. generator).
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numeric guard tripped: stability bound, overflow, vacuous bound request.
class NumericGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace lsde
