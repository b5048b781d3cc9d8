#pragma once

#include <stdexcept>
#include <string>

namespace frmc {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model, scheme or run configuration that cannot be executed as given.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An argument violating a documented precondition (monotone grids, ranges, dimensions).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite or otherwise unusable number.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. querying an index with a radius it was not built for.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// The ratio estimator had nothing to divide by (no matched pairs, cutoff disabled).
class DegenerateDenominatorError : public Error {
 public:
  using Error::Error;
};

}  // namespace frmc
