#pragma once

#include <stdexcept>
#include <string>

namespace rebalance {

// Malformed or inconsistent configuration / parameters. CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Input data that cannot be processed (I/O, ragged rows, degenerate labels).
// CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A computation refused because it would exceed a configured resource budget.
// CLI exit code 4.
class ResourceGuardError : public std::runtime_error {
 public:
  explicit ResourceGuardError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rebalance
