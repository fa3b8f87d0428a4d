#pragma once

#include <stdexcept>
#include <string>

namespace vlia {

// Error taxonomy shared with the CLI exit codes:
//   ConfigError -> 2, IoError -> 3, NumericalError -> 4, MissingPrerequisite -> 5.
// ValidationError covers rejected inputs at module boundaries (maps to 2 when
// it reaches the CLI).

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MissingPrerequisite : std::runtime_error {
  explicit MissingPrerequisite(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace vlia
