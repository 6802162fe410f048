#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ratekit {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// File or bitstream contents violate the expected layout.
class FormatError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration: bad command template, bad parameter, bad config file.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// An external tool was invoked and something went wrong.
class ToolError : public Error {
public:
  using Error::Error;
};

/// The external executable could not be found at all.
class ToolMissingError : public ToolError {
public:
  using ToolError::ToolError;
};

/// The external tool ran but produced output we cannot parse.
class ToolOutputError : public ToolError {
public:
  using ToolError::ToolError;
};

/// The byte budget cannot cover even the cheapest selection.
class InfeasibleBudgetError : public Error {
public:
  InfeasibleBudgetError(std::uint64_t budget, std::uint64_t required)
      : Error("infeasible budget: cheapest selection needs " + std::to_string(required) +
              " bytes but only " + std::to_string(budget) + " are available (shortfall " +
              std::to_string(required - budget) + ")"),
        budget_bytes(budget),
        required_bytes(required) {}

  std::uint64_t budget_bytes;
  std::uint64_t required_bytes;
};

}  // namespace ratekit
