#pragma once

#include <stdexcept>
#include <string>

namespace tabadm {

/// Invalid user-facing configuration or input data (bad flags, malformed
/// CSV, infeasible split requests). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Training diverged (non-finite loss). Carries enough context to locate
/// the offending step in the log.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tabadm
