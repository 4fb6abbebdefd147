#pragma once

#include <stdexcept>
#include <string>

namespace pricelab {

// Base of every error raised by the library. Categories map onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the domain of a distribution-derived function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Root bracketing failed (misconfigured model).
class NoRootError : public Error {
 public:
  using Error::Error;
};

// A noise model and link function that cannot be combined.
class UnsupportedCombination : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Non-finite objective or similar solver breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// next_price/observe called out of order.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pricelab
