#pragma once

#include <stdexcept>
#include <string>

namespace expjump {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument within the configured guard distance of a pole q^{-k}.
class PoleError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain where an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A simulation exceeded its event budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// A vertex-model particle left a fixed window.
class WindowError : public Error {
 public:
  using Error::Error;
};

// A numerical self-consistency gate failed.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A quadrature node violates the geometric contour constraints.
class ContourError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration; `field` names the offending key when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg, std::string field = {})
      : Error(field.empty() ? msg : field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace expjump
