#pragma once

#include <stdexcept>
#include <string>

namespace qae {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model or numerics parameters violate their invariants.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// The requested scenario combination is outside what the model covers
/// (e.g. a Poisson population with a closing time).
class UnsupportedScenario : public Error {
 public:
  using Error::Error;
};

/// An integration step went unstable: step too large or negative mass.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Bisection failed to bracket or exhausted its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed solution/config input.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qae
