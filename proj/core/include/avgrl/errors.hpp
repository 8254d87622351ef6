#pragma once

#include <stdexcept>
#include <string>

namespace avgrl {

/// Raised when a caller breaks a documented precondition (dimension mismatch,
/// inverted clip bounds, out-of-range value-iteration index).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed experiment configuration or environment document.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace avgrl
