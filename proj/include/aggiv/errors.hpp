#pragma once

#include <stdexcept>

namespace aggiv {

/// Base class for all toolkit failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable configuration input (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A model invariant or operation precondition does not hold (CLI exit code 3).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Sample-level numerical failure: rank deficiency, weak instruments,
/// degenerate designs (CLI exit code 4).
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace aggiv
