#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace spdest {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation invoked on the wrong variant of a sum type.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite intermediate values (quadrature, contrasts).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid experiment or grid configuration; maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An estimator could not produce a value (degenerate data, no convergence).
class EstimationError : public std::runtime_error {
 public:
  EstimationError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace spdest
