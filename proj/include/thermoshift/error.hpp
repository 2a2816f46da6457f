#pragma once

#include <stdexcept>
#include <string>

namespace thermoshift {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A symbol, word, or value outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A finite truncation lost every symbol after zero row/column removal.
class DegenerateTruncation : public Error {
 public:
  using Error::Error;
};

/// A truncation (or subshift) expected to be topologically mixing is not.
class NotMixing : public Error {
 public:
  using Error::Error;
};

/// Bad user-supplied configuration; `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace thermoshift
