#pragma once

#include <stdexcept>
#include <string>

namespace jlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied something outside an operation's domain.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A numerical procedure failed: escape, non-convergence, bracket failure.
class NumericError : public Error {
public:
  using Error::Error;
};

/// Internal consistency check tripped.
class InvariantViolation : public Error {
public:
  using Error::Error;
};

/// Experiment configuration rejected.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace jlab
