#pragma once

#include <stdexcept>
#include <string>

namespace missmass {

// Root of every error raised by the library. Each subclass names one
// failure family so callers (and the CLI exit-code mapping) can tell a
// bad argument from a degenerate run.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid constructor or operation parameter (alpha outside (0,1), J = 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed data, e.g. a sample index outside the law's support.
class DataError : public Error {
 public:
  using Error::Error;
};

// Argument outside a numeric function's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A run produced no usable statistic (every replicate exhausted the
// support, E[K_{n,1}] = 0, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class UndefinedEstimatorError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFamilyError : public Error {
 public:
  using Error::Error;
};

// Stick-breaking did not reach the requested leftover before the hard cap.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace missmass
