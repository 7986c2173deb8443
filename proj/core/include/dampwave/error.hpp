#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dampwave {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Bessel order outside the supported range |nu| <= 10.
class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

/// The adaptive ODE integrator could not reach the requested time.
class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// A decay fit was requested on data that cannot be fitted (all zero, too few samples).
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

/// A parameter lies outside the admissible interval of a formula.
class RangeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A run would exceed a configured resource cap (memory estimate).
class ResourceCap : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected; carries every violation found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) {
      out += "\n  - ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace dampwave
