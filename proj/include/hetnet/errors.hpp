#pragma once

#include <stdexcept>
#include <string>

namespace hetnet {

//! Root of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! A parameter lies outside the domain where a quantity is defined.
class DomainError : public Error {
public:
  using Error::Error;
};

//! A weight or channel distribution lacks a required fractional moment.
class NonFiniteMoment : public Error {
public:
  using Error::Error;
};

//! Backoff limits of the contending tiers are not ordered.
class OrderingViolation : public Error {
public:
  using Error::Error;
};

//! An iterative or adaptive procedure exhausted its budget.
class NoConvergence : public Error {
public:
  using Error::Error;
};

class InfeasibleRegion : public Error {
public:
  using Error::Error;
};

class InfeasibleStart : public Error {
public:
  using Error::Error;
};

class DegenerateMeasurement : public Error {
public:
  using Error::Error;
};

class WindowTooSmall : public Error {
public:
  using Error::Error;
};

class NoAPs : public Error {
public:
  using Error::Error;
};

class InsufficientSamples : public Error {
public:
  using Error::Error;
};

//! Schema or semantic violation in an input document. `pointer` is a JSON
//! pointer to the offending value (empty when not applicable).
class ConfigError : public Error {
public:
  ConfigError(std::string pointer, const std::string &what)
      : Error(pointer.empty() ? what : pointer + ": " + what),
        pointer_(std::move(pointer)) {}
  const std::string &pointer() const noexcept { return pointer_; }

private:
  std::string pointer_;
};

class IOFailure : public Error {
public:
  using Error::Error;
};

} // namespace hetnet
