#pragma once

#include <stdexcept>
#include <string>

namespace satfp {

/// Bad user input: malformed constellation, degenerate ranges, unknown config keys.
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation could not produce a meaningful number (non-finite matrix,
/// singular block, zero-power burst).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace satfp
